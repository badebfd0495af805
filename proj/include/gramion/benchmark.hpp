#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gramion/gramian.hpp"
#include "gramion/hypnet.hpp"
#include "gramion/io.hpp"
#include "gramion/numerics.hpp"
#include "gramion/reduce.hpp"
#include "gramion/sysmodel.hpp"

namespace gramion::bench {

enum class BcDistribution {
    unit,       ///< entries uniform in [0, 1]
    symmetric,  ///< entries uniform in [-1, 1]
};

struct BenchmarkConfig {
    hypnet::NetworkConfig network{64, 1.0, 7};
    std::size_t j_in = 8;
    std::size_t o_out = 8;
    std::uint64_t bc_seed = 11;
    BcDistribution bc_distribution = BcDistribution::unit;
    double horizon = 1.0;
    double dt = 0.01;
    double stabilization_offset = 0.5;
    std::vector<double> input_scales{1.0};
    std::vector<double> state_scales{1.0};
    std::vector<double> param_scales{0.1};
    gramian::ParameterPerturbation param_mode = gramian::ParameterPerturbation::relative;
    bool excite = true;
    double regularization = 1e-12;
    reduce::OrderRule states{reduce::OrderStrategy::fixed, 1e-8, 0.9999, 19};
    reduce::OrderRule params{reduce::OrderStrategy::fixed, 1e-8, 0.9999, 65};
    std::size_t repetitions = 100;

    void validate() const;
};

io::Json to_json(const BenchmarkConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
BenchmarkConfig config_from_json(const io::Json& j);

/// B (n x j_in) then C (o_out x n), both drawn row by row from one sampler
/// seeded with bc_seed. Rejects the draw when C equals B^T.
std::pair<Matrix, Matrix> draw_io_matrices(const BenchmarkConfig& c);

/// Network, stabilized growing system, and everything the offline phase
/// produces before orders are chosen.
struct OfflineArtifacts {
    hypnet::HyperbolicNetwork network;
    sysmodel::LtvSystem system;
    gramian::JointGramian joint;
    Matrix cross_identifiability;
    numerics::SvdResult parameter_svd;
    std::vector<double> state_singular_values;
};

OfflineArtifacts build_system(const BenchmarkConfig& c);
OfflineArtifacts run_offline(const BenchmarkConfig& c);

/// Reduced model at explicit orders from offline artifacts.
reduce::ReducedModel reduce_at(const OfflineArtifacts& art, std::size_t r, std::size_t q);

/// One impulse response per input channel.
std::vector<sysmodel::Trajectory> impulse_responses(const sysmodel::LtvSystem& sys);
std::vector<sysmodel::Trajectory> impulse_responses(const reduce::ReducedModel& model,
                                                    reduce::ReducedPath path = reduce::ReducedPath::incremental);

/// Pooled relative L2 error of the reduced impulse responses.
double impulse_error(const sysmodel::LtvSystem& sys, const reduce::ReducedModel& model);

/// | ||pv1^T pv1 theta||_1 - ||theta||_1 | / ||theta||_1.
double theta_l1_change(const std::vector<double>& theta, const reduce::ReducedModel& model);

struct Timings {
    double original_seconds = 0.0;  ///< full impulse responses, mean per repetition
    double offline_seconds = 0.0;   ///< joint gramian plus reduction
    double online_seconds = 0.0;    ///< reduced impulse responses, mean per repetition
};

struct BenchmarkReport {
    BenchmarkConfig config;
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t edges = 0;
    std::size_t r = 0;
    std::size_t q = 0;
    std::size_t knee_order = 0;
    double relative_l2_error = 0.0;
    double theta_l1_change = 0.0;
    std::size_t full_model_floats = 0;
    std::size_t reduced_model_floats = 0;
    std::size_t parameter_projection_floats = 0;
    std::vector<double> state_singular_values;
    std::vector<double> parameter_singular_values;
    Timings timings;
};

BenchmarkReport run_benchmark(const BenchmarkConfig& c);

/// Report as JSON. Everything except the "timings" object is a deterministic
/// function of the configuration.
io::Json to_json(const BenchmarkReport& r);
/// Fixed-width text table with the memory formula in its footer.
std::string format_table(const BenchmarkReport& r);

}  // namespace gramion::bench
