#include "gramion/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "gramion/error.hpp"
#include "gramion/numerics.hpp"
#include "gramion/rng.hpp"

namespace gramion::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

const char* distribution_name(BcDistribution d) {
    return d == BcDistribution::unit ? "unit" : "symmetric";
}

BcDistribution parse_distribution(const std::string& s) {
    if (s == "unit") return BcDistribution::unit;
    if (s == "symmetric") return BcDistribution::symmetric;
    throw ValidationError("bc_distribution must be 'unit' or 'symmetric', got '" + s + "'");
}

const char* mode_name(gramian::ParameterPerturbation m) {
    return m == gramian::ParameterPerturbation::relative ? "relative" : "absolute";
}

gramian::ParameterPerturbation parse_mode(const std::string& s) {
    if (s == "relative") return gramian::ParameterPerturbation::relative;
    if (s == "absolute") return gramian::ParameterPerturbation::absolute;
    throw ValidationError("param_mode must be 'relative' or 'absolute', got '" + s + "'");
}

io::Json rule_json(const reduce::OrderRule& r) {
    return io::Json{{"strategy", reduce::strategy_name(r.strategy)},
                    {"order", r.fixed_order},
                    {"knee_tolerance", r.knee_tolerance},
                    {"energy_fraction", r.energy_fraction}};
}

template <class T>
void take(const io::Json& j, const char* key, T& out, std::set<std::string>& seen) {
    if (!j.contains(key)) return;
    seen.insert(key);
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("benchmark config: field '") + key + "' has the wrong type (" +
                              e.what() + ")");
    }
}

void reject_unknown(const io::Json& j, const std::set<std::string>& seen, const std::string& where) {
    for (const auto& item : j.items())
        if (!seen.count(item.key()))
            throw ValidationError("benchmark config: unknown key '" + item.key() + "' in " + where);
}

reduce::OrderRule rule_from(const io::Json& j, reduce::OrderRule rule, const std::string& where) {
    if (!j.is_object()) throw ValidationError("benchmark config: '" + where + "' must be an object");
    std::set<std::string> seen;
    std::string strategy = reduce::strategy_name(rule.strategy);
    take(j, "strategy", strategy, seen);
    rule.strategy = reduce::parse_strategy(strategy);
    take(j, "order", rule.fixed_order, seen);
    take(j, "knee_tolerance", rule.knee_tolerance, seen);
    take(j, "energy_fraction", rule.energy_fraction, seen);
    reject_unknown(j, seen, where);
    return rule;
}

void validate_rule(const reduce::OrderRule& r, const char* what) {
    if (r.strategy == reduce::OrderStrategy::fixed && r.fixed_order == 0)
        throw ValidationError(std::string(what) + ": fixed strategy needs an order >= 1");
    if (!(r.knee_tolerance > 0.0 && r.knee_tolerance < 1.0))
        throw ValidationError(std::string(what) + ": knee tolerance must lie in (0, 1)");
    if (!(r.energy_fraction > 0.0 && r.energy_fraction <= 1.0))
        throw ValidationError(std::string(what) + ": energy fraction must lie in (0, 1]");
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(name) + " stage: " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(name) + " stage: " + e.what());
    } catch (const IoError& e) {
        throw IoError(std::string(name) + " stage: " + e.what());
    }
}

double l1(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

}  // namespace

void BenchmarkConfig::validate() const {
    network.validate();
    if (j_in == 0 || o_out == 0) throw ValidationError("benchmark needs at least one input and output");
    if (j_in != o_out)
        throw ValidationError("benchmark needs as many inputs as outputs for the cross gramian");
    sysmodel::ActivationSchedule::growing(network.n_nodes, dt, horizon).validate(network.n_nodes);
    if (!(stabilization_offset > 0.0)) throw ValidationError("stabilization offset must be positive");
    if (!(regularization >= 0.0)) throw ValidationError("regularization must be nonnegative");
    if (repetitions < 1) throw ValidationError("repetitions must be at least 1");
    gramian::PerturbationScheme scheme;
    scheme.input_scales = input_scales;
    scheme.state_scales = state_scales;
    scheme.validate(j_in, network.n_nodes);
    for (double s : param_scales)
        if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("parameter scales must be positive");
    if (param_scales.empty()) throw ValidationError("parameter scales must not be empty");
    validate_rule(states, "state order");
    validate_rule(params, "parameter order");
}

io::Json to_json(const BenchmarkConfig& c) {
    return io::Json{{"network",
                     {{"n_nodes", c.network.n_nodes}, {"degree", c.network.degree}, {"seed", c.network.seed}}},
                    {"j_in", c.j_in},
                    {"o_out", c.o_out},
                    {"bc_seed", c.bc_seed},
                    {"bc_distribution", distribution_name(c.bc_distribution)},
                    {"horizon", c.horizon},
                    {"dt", c.dt},
                    {"stabilization_offset", c.stabilization_offset},
                    {"input_scales", c.input_scales},
                    {"state_scales", c.state_scales},
                    {"param_scales", c.param_scales},
                    {"param_mode", mode_name(c.param_mode)},
                    {"excite", c.excite},
                    {"regularization", c.regularization},
                    {"states", rule_json(c.states)},
                    {"params", rule_json(c.params)},
                    {"repetitions", c.repetitions}};
}

BenchmarkConfig config_from_json(const io::Json& j) {
    if (!j.is_object()) throw ValidationError("benchmark config must be a JSON object");
    BenchmarkConfig c;
    std::set<std::string> seen;
    if (j.contains("network")) {
        seen.insert("network");
        const io::Json& net = j.at("network");
        if (!net.is_object()) throw ValidationError("benchmark config: 'network' must be an object");
        std::set<std::string> nseen;
        take(net, "n_nodes", c.network.n_nodes, nseen);
        take(net, "degree", c.network.degree, nseen);
        take(net, "seed", c.network.seed, nseen);
        reject_unknown(net, nseen, "network");
    }
    take(j, "j_in", c.j_in, seen);
    take(j, "o_out", c.o_out, seen);
    take(j, "bc_seed", c.bc_seed, seen);
    std::string dist = distribution_name(c.bc_distribution);
    take(j, "bc_distribution", dist, seen);
    c.bc_distribution = parse_distribution(dist);
    take(j, "horizon", c.horizon, seen);
    take(j, "dt", c.dt, seen);
    take(j, "stabilization_offset", c.stabilization_offset, seen);
    take(j, "input_scales", c.input_scales, seen);
    take(j, "state_scales", c.state_scales, seen);
    take(j, "param_scales", c.param_scales, seen);
    std::string mode = mode_name(c.param_mode);
    take(j, "param_mode", mode, seen);
    c.param_mode = parse_mode(mode);
    take(j, "excite", c.excite, seen);
    take(j, "regularization", c.regularization, seen);
    if (j.contains("states")) {
        seen.insert("states");
        c.states = rule_from(j.at("states"), c.states, "states");
    }
    if (j.contains("params")) {
        seen.insert("params");
        c.params = rule_from(j.at("params"), c.params, "params");
    }
    take(j, "repetitions", c.repetitions, seen);
    reject_unknown(j, seen, "the top level");
    c.validate();
    return c;
}

std::pair<Matrix, Matrix> draw_io_matrices(const BenchmarkConfig& c) {
    const std::size_t n = c.network.n_nodes;
    const double lo = c.bc_distribution == BcDistribution::unit ? 0.0 : -1.0;
    UniformSampler sampler(c.bc_seed);
    Matrix b(n, c.j_in);
    for (double& v : b.data()) v = sampler.uniform(lo, 1.0);
    Matrix cm(c.o_out, n);
    for (double& v : cm.data()) v = sampler.uniform(lo, 1.0);
    if (c.o_out == c.j_in && cm == b.transpose())
        throw ValidationError("drawn C equals B^T; choose another bc_seed");
    return {std::move(b), std::move(cm)};
}

OfflineArtifacts build_system(const BenchmarkConfig& c) {
    c.validate();
    OfflineArtifacts art;
    art.network = stage("generate", [&] { return hypnet::generate(c.network); });
    auto [b, cm] = draw_io_matrices(c);
    const std::size_t n = c.network.n_nodes;
    art.system = stage("model", [&] {
        return sysmodel::make_system(hypnet::parameter_vector(art.network), n, std::move(b), std::move(cm),
                                     sysmodel::ActivationSchedule::growing(n, c.dt, c.horizon),
                                     c.stabilization_offset);
    });
    return art;
}

OfflineArtifacts run_offline(const BenchmarkConfig& c) {
    OfflineArtifacts art = build_system(c);
    gramian::PerturbationScheme scheme;
    scheme.input_scales = c.input_scales;
    scheme.state_scales = c.state_scales;
    gramian::JointOptions options;
    options.param_scales = c.param_scales;
    options.mode = c.param_mode;
    options.excite = c.excite;
    art.joint = stage("gramian", [&] { return gramian::empirical_joint(art.system, scheme, options); });
    stage("reduce", [&] {
        art.cross_identifiability = reduce::cross_identifiability(art.joint, c.regularization);
        art.parameter_svd = numerics::svd_symmetric(art.cross_identifiability);
        art.state_singular_values = numerics::svd(art.joint.wx).s;
        return 0;
    });
    return art;
}

reduce::ReducedModel reduce_at(const OfflineArtifacts& art, std::size_t r, std::size_t q) {
    const reduce::StateProjection sp = reduce::state_projection(art.joint.wx, r);
    if (q < 1 || q > art.system.p())
        throw ValidationError("parameter order " + std::to_string(q) + " outside [1, " +
                              std::to_string(art.system.p()) + "]");
    const Matrix pv1 = art.parameter_svd.vt.block(0, 0, q, art.system.p());
    return reduce::build_reduced(art.system, sp.v1, sp.u1, pv1);
}

std::vector<sysmodel::Trajectory> impulse_responses(const sysmodel::LtvSystem& sys) {
    const auto grid = sys.schedule.grid();
    std::vector<sysmodel::Trajectory> out;
    out.reserve(sys.j_in);
    for (std::size_t j = 0; j < sys.j_in; ++j)
        out.push_back(sysmodel::simulate(sys, sysmodel::impulse_input(j, sys.j_in, grid.dt, grid.steps), sys.x0));
    return out;
}

std::vector<sysmodel::Trajectory> impulse_responses(const reduce::ReducedModel& model, reduce::ReducedPath path) {
    const auto grid = model.schedule.grid();
    const std::size_t m = model.b_red.cols();
    std::vector<sysmodel::Trajectory> out;
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j)
        out.push_back(reduce::simulate(model, sysmodel::impulse_input(j, m, grid.dt, grid.steps), path));
    return out;
}

double impulse_error(const sysmodel::LtvSystem& sys, const reduce::ReducedModel& model) {
    const auto full = impulse_responses(sys);
    const auto red = impulse_responses(model);
    return sysmodel::relative_l2_error(full, red);
}

double theta_l1_change(const std::vector<double>& theta, const reduce::ReducedModel& model) {
    const double base = l1(theta);
    if (base == 0.0) throw ValidationError("theta_l1_change: parameter vector is zero");
    return std::abs(l1(model.theta_lifted) - base) / base;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& c) {
    BenchmarkReport rep;
    rep.config = c;

    const auto offline_start = Clock::now();
    OfflineArtifacts art = run_offline(c);
    rep.r = stage("reduce", [&] { return reduce::choose_order(art.state_singular_values, c.states); });
    rep.q = stage("reduce", [&] { return reduce::choose_order(art.parameter_svd.s, c.params); });
    const reduce::ReducedModel model = stage("reduce", [&] { return reduce_at(art, rep.r, rep.q); });
    rep.timings.offline_seconds = seconds_since(offline_start);

    rep.n = art.system.n;
    rep.p = art.system.p();
    rep.edges = art.network.edges.size();
    rep.knee_order = reduce::choose_order(art.parameter_svd.s, reduce::OrderRule{});
    rep.state_singular_values = art.state_singular_values;
    rep.parameter_singular_values = art.parameter_svd.s;
    rep.full_model_floats = reduce::stored_floats(art.system);
    rep.reduced_model_floats = reduce::stored_floats(model);
    rep.parameter_projection_floats = model.pv1.size();
    rep.theta_l1_change = theta_l1_change(art.system.theta, model);

    std::vector<sysmodel::Trajectory> full;
    std::vector<sysmodel::Trajectory> red;
    stage("simulate", [&] {
        full = impulse_responses(art.system);  // warm-up, discarded from timing
        red = impulse_responses(model);
        auto start = Clock::now();
        for (std::size_t k = 0; k < c.repetitions; ++k) full = impulse_responses(art.system);
        rep.timings.original_seconds = seconds_since(start) / static_cast<double>(c.repetitions);
        start = Clock::now();
        for (std::size_t k = 0; k < c.repetitions; ++k) red = impulse_responses(model);
        rep.timings.online_seconds = seconds_since(start) / static_cast<double>(c.repetitions);
        return 0;
    });
    rep.relative_l2_error = sysmodel::relative_l2_error(full, red);
    return rep;
}

io::Json to_json(const BenchmarkReport& r) {
    const double ratio =
        static_cast<double>(r.reduced_model_floats) / static_cast<double>(r.full_model_floats);
    return io::Json{
        {"config", to_json(r.config)},
        {"dimensions", {{"n", r.n}, {"p", r.p}, {"edges", r.edges}}},
        {"orders", {{"r", r.r}, {"q", r.q}, {"parameter_knee", r.knee_order}}},
        {"relative_l2_error", r.relative_l2_error},
        {"theta_l1_change", r.theta_l1_change},
        {"memory",
         {{"full_model_floats", r.full_model_floats},
          {"reduced_model_floats", r.reduced_model_floats},
          {"reduced_to_full_ratio", ratio},
          {"parameter_projection_floats", r.parameter_projection_floats},
          {"trajectory_state_ratio", static_cast<double>(r.r) / static_cast<double>(r.n)}}},
        {"spectra",
         {{"state_sigma_1", r.state_singular_values.front()},
          {"parameter_sigma_1", r.parameter_singular_values.front()},
          {"parameter_sigma_100",
           r.parameter_singular_values.size() >= 100 ? r.parameter_singular_values[99] : 0.0}}},
        {"timings",
         {{"original_seconds", r.timings.original_seconds},
          {"offline_seconds", r.timings.offline_seconds},
          {"online_seconds", r.timings.online_seconds},
          {"repetitions", r.config.repetitions}}}};
}

std::string format_table(const BenchmarkReport& r) {
    std::ostringstream out;
    out << std::left << std::setw(16) << "Original Time" << std::setw(16) << "Offline Time"
        << std::setw(16) << "Online Time" << std::setw(18) << "Relative L2-Error" << std::setw(10)
        << "States" << "Parameters\n";
    out << std::scientific << std::setprecision(3);
    out << std::setw(16) << r.timings.original_seconds << std::setw(16) << r.timings.offline_seconds
        << std::setw(16) << r.timings.online_seconds << std::setw(18) << r.relative_l2_error;
    out << std::setw(10) << (std::to_string(r.n) + "->" + std::to_string(r.r))
        << (std::to_string(r.p) + "->" + std::to_string(r.q)) << '\n';
    out << std::defaultfloat << std::setprecision(4);
    out << "\nTimes in seconds; original and online are means over " << r.config.repetitions
        << " repetitions of all " << r.config.j_in << " impulse responses after one warm-up run.\n";
    out << "Parameter knee (tol 1e-8): " << r.knee_order << "; ||theta||_1 change at q: " << r.theta_l1_change
        << '\n';
    out << "Memory: reduced/full = " << r.reduced_model_floats << "/" << r.full_model_floats << " = "
        << static_cast<double>(r.reduced_model_floats) / static_cast<double>(r.full_model_floats)
        << " stored floats.\n"
        << "  full    = p + n*j + o*n + 2n                       (theta, B, C, x0, diagonal)\n"
        << "  reduced = 2*r*n + r*j + o*r + r + p + n           (v1, u1, B~, C~, x0~, lifted theta, diagonal)\n"
        << "  the q*p = " << r.parameter_projection_floats
        << " floats of the parameter projection are needed only to reduce new parameter vectors.\n"
        << "  per-trajectory state storage ratio r/n = "
        << static_cast<double>(r.r) / static_cast<double>(r.n) << '\n';
    return out.str();
}

}  // namespace gramion::bench
