#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gramion/matrix.hpp"

namespace gramion::hypnet {

struct NetworkConfig {
    std::size_t n_nodes = 64;
    double degree = 1.0;  ///< network degree v in the radius law r_i = 2 ln(i / v)
    std::uint64_t seed = 0;

    void validate() const;
};

/// Node born at discrete step `birth_step` (1-based) on the unit-curvature circle.
struct Node {
    std::size_t birth_step = 0;
    double angle = 0.0;
    double radius = 0.0;
};

/// Edges are stored as (older, newer) 0-based node indices, older < newer,
/// sorted lexicographically.
struct HyperbolicNetwork {
    NetworkConfig config;
    std::vector<Node> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// pi - |pi - |a - b||, the angular separation on the circle in [0, pi].
double angular_separation(double a, double b);

/// Connection rule for a newborn node against an older node of radius
/// `older_radius`: r_j + 2 ln(separation) < 2. A zero separation counts as
/// ln(0+) = -inf and always connects.
bool connects(double older_radius, double separation);

double birth_radius(std::size_t birth_step, double degree);

/// Grows a network by sequential birth. When `forced_angles` is given it must
/// hold one angle per node and replaces the sampler (used by tests).
HyperbolicNetwork generate(const NetworkConfig& config,
                           std::optional<std::span<const double>> forced_angles = std::nullopt);

/// Symmetric 0/1 adjacency with zero diagonal.
Matrix adjacency(const HyperbolicNetwork& net);

/// Strict upper triangle of the adjacency, row-major over i < j: length n(n-1)/2.
std::vector<double> parameter_vector(const HyperbolicNetwork& net);

std::size_t parameter_count(std::size_t n);
/// Position of pair (i, j), i < j, in the strict-upper-triangle flattening.
std::size_t parameter_index(std::size_t i, std::size_t j, std::size_t n);
/// Symmetric matrix with the given strict upper triangle and zero diagonal.
Matrix matrix_from_theta(std::span<const double> theta, std::size_t n);

}  // namespace gramion::hypnet
