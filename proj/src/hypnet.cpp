#include "gramion/hypnet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gramion/error.hpp"
#include "gramion/rng.hpp"

namespace gramion::hypnet {

void NetworkConfig::validate() const {
    if (n_nodes < 2)
        throw ValidationError("network needs at least 2 nodes, got " + std::to_string(n_nodes));
    if (!(degree > 0.0) || !std::isfinite(degree))
        throw ValidationError("network degree must be positive and finite");
}

double angular_separation(double a, double b) {
    return std::numbers::pi - std::abs(std::numbers::pi - std::abs(a - b));
}

bool connects(double older_radius, double separation) {
    if (separation <= 0.0) return true;
    return older_radius + 2.0 * std::log(separation) < 2.0;
}

double birth_radius(std::size_t birth_step, double degree) {
    return 2.0 * std::log(static_cast<double>(birth_step) / degree);
}

HyperbolicNetwork generate(const NetworkConfig& config,
                           std::optional<std::span<const double>> forced_angles) {
    config.validate();
    const std::size_t n = config.n_nodes;
    if (forced_angles && forced_angles->size() != n) {
        throw ValidationError("forced angle sequence has " + std::to_string(forced_angles->size()) +
                              " entries for " + std::to_string(n) + " nodes");
    }
    HyperbolicNetwork net;
    net.config = config;
    net.nodes.reserve(n);
    UniformSampler sampler(config.seed);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle =
            forced_angles ? (*forced_angles)[k] : 2.0 * std::numbers::pi * sampler.next01();
        net.nodes.push_back(Node{k + 1, angle, birth_radius(k + 1, config.degree)});
        for (std::size_t j = 0; j < k; ++j) {
            if (connects(net.nodes[j].radius, angular_separation(angle, net.nodes[j].angle)))
                net.edges.emplace_back(j, k);
        }
    }
    std::sort(net.edges.begin(), net.edges.end());
    return net;
}

Matrix adjacency(const HyperbolicNetwork& net) {
    const std::size_t n = net.nodes.size();
    Matrix a(n, n);
    for (const auto& [i, j] : net.edges) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    return a;
}

std::size_t parameter_count(std::size_t n) { return n * (n - 1) / 2; }

std::size_t parameter_index(std::size_t i, std::size_t j, std::size_t n) {
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

std::vector<double> parameter_vector(const HyperbolicNetwork& net) {
    const std::size_t n = net.nodes.size();
    std::vector<double> theta(parameter_count(n), 0.0);
    for (const auto& [i, j] : net.edges) theta[parameter_index(i, j, n)] = 1.0;
    return theta;
}

Matrix matrix_from_theta(std::span<const double> theta, std::size_t n) {
    if (theta.size() != parameter_count(n)) {
        throw ValidationError("parameter vector of length " + std::to_string(theta.size()) +
                              " does not fit " + std::to_string(n) + " nodes");
    }
    Matrix a(n, n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j, ++k) {
            a(i, j) = theta[k];
            a(j, i) = theta[k];
        }
    }
    return a;
}

}  // namespace gramion::hypnet
