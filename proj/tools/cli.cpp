#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>

#include "gramion/benchmark.hpp"
#include "gramion/error.hpp"
#include "gramion/gramian.hpp"
#include "gramion/hypnet.hpp"
#include "gramion/io.hpp"
#include "gramion/numerics.hpp"
#include "gramion/reduce.hpp"
#include "gramion/rng.hpp"
#include "gramion/sysmodel.hpp"

namespace gramion::cli {

namespace {

using io::Json;

struct Common {
    bool quiet = false;
    std::string json_report;
};

struct GenerateArgs {
    std::size_t nodes = 64;
    double degree = 1.0;
    std::uint64_t seed = 0;
    std::string out;
};

struct ModelArgs {
    std::string network;
    std::size_t inputs = 8;
    std::size_t outputs = 8;
    std::uint64_t bc_seed = 11;
    std::string distribution = "unit";
    double dt = 0.01;
    double horizon = 1.0;
    double offset = 0.5;
    bool fixed = false;
    std::string out;
};

struct SimulateArgs {
    std::string model;
    std::string reduced;
    std::string input = "impulse:0";
    std::string path = "incremental";
    std::string out;
};

struct GramianArgs {
    std::string model;
    std::string type = "joint";
    std::vector<double> scales{1.0};
    std::vector<double> state_scales;
    double param_scale = 0.1;
    std::string param_mode = "relative";
    bool no_excite = false;
    std::optional<double> horizon;
    std::optional<double> dt;
    std::string out;
};

struct ReduceArgs {
    std::string model;
    std::string joint;
    std::optional<std::size_t> states;
    std::optional<std::size_t> params;
    std::string strategy = "knee";
    double knee_tol = 1e-8;
    double energy = 0.9999;
    double regularization = 1e-12;
    std::string spectra_prefix;
    std::string out;
};

struct BenchmarkArgs {
    std::string config;
    std::string out_dir = ".";
    std::optional<std::size_t> repetitions;
};

void say(const Common& c, std::ostream& out, const std::string& text) {
    if (!c.quiet) out << text << '\n';
}

void finish(const Common& c, const Json& summary) {
    if (!c.json_report.empty()) io::write_json(c.json_report, summary);
}

sysmodel::InputSignal parse_input(const std::string& spec, std::size_t channels, const sysmodel::TimeGrid& grid) {
    if (spec == "zero") return sysmodel::zero_input(channels, grid.steps);
    const std::string prefix = "impulse:";
    if (spec.rfind(prefix, 0) == 0) {
        std::size_t channel = 0;
        try {
            std::size_t used = 0;
            channel = std::stoul(spec.substr(prefix.size()), &used);
            if (used != spec.size() - prefix.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError("--input: bad channel in '" + spec + "'");
        }
        if (channel >= channels)
            throw ValidationError("--input: channel " + std::to_string(channel) + " out of range (model has " +
                                  std::to_string(channels) + " inputs)");
        return sysmodel::impulse_input(channel, channels, grid.dt, grid.steps);
    }
    throw ValidationError("--input must be 'zero' or 'impulse:<channel>', got '" + spec + "'");
}

void cmd_generate(const GenerateArgs& a, const Common& c, std::ostream& out) {
    hypnet::NetworkConfig cfg{a.nodes, a.degree, a.seed};
    const auto net = hypnet::generate(cfg);
    io::write_json(a.out, io::to_json(net));
    say(c, out, "wrote " + a.out + ": " + std::to_string(net.nodes.size()) + " nodes, " +
                    std::to_string(net.edges.size()) + " edges");
    finish(c, Json{{"command", "generate"}, {"nodes", net.nodes.size()}, {"edges", net.edges.size()}});
}

void cmd_model(const ModelArgs& a, const Common& c, std::ostream& out) {
    const auto net = io::network_from_json(io::read_json(a.network));
    bench::BenchmarkConfig bc;
    bc.network = net.config;
    bc.j_in = a.inputs;
    bc.o_out = a.outputs;
    bc.bc_seed = a.bc_seed;
    if (a.distribution == "unit") {
        bc.bc_distribution = bench::BcDistribution::unit;
    } else if (a.distribution == "symmetric") {
        bc.bc_distribution = bench::BcDistribution::symmetric;
    } else {
        throw ValidationError("--distribution must be 'unit' or 'symmetric'");
    }
    if (a.inputs == 0 || a.outputs == 0) throw ValidationError("--inputs and --outputs must be positive");
    auto [b, cm] = bench::draw_io_matrices(bc);
    const std::size_t n = net.nodes.size();
    auto schedule = a.fixed ? sysmodel::ActivationSchedule::fixed(n, a.dt, a.horizon)
                            : sysmodel::ActivationSchedule::growing(n, a.dt, a.horizon);
    const auto sys = sysmodel::make_system(hypnet::parameter_vector(net), n, std::move(b), std::move(cm),
                                           std::move(schedule), a.offset);
    io::write_json(a.out, io::to_json(sys, a.offset));
    say(c, out, "wrote " + a.out + ": n = " + std::to_string(n) + ", p = " + std::to_string(sys.p()));
    finish(c, Json{{"command", "model"}, {"n", n}, {"p", sys.p()}});
}

void cmd_simulate(const SimulateArgs& a, const Common& c, std::ostream& out) {
    sysmodel::Trajectory traj;
    if (!a.reduced.empty()) {
        const auto red = io::reduced_from_json(io::read_json(a.reduced));
        const auto u = parse_input(a.input, red.b_red.cols(), red.schedule.grid());
        reduce::ReducedPath path = reduce::ReducedPath::incremental;
        if (a.path == "direct") {
            path = reduce::ReducedPath::direct;
        } else if (a.path != "incremental") {
            throw ValidationError("--path must be 'incremental' or 'direct'");
        }
        traj = reduce::simulate(red, u, path);
    } else if (!a.model.empty()) {
        const auto sys = io::system_from_json(io::read_json(a.model));
        const auto u = parse_input(a.input, sys.j_in, sys.schedule.grid());
        traj = sysmodel::simulate(sys, u, sys.x0);
    } else {
        throw ValidationError("simulate needs --model or --reduced");
    }
    io::write_text(a.out, io::trajectory_csv(traj));
    say(c, out, "wrote " + a.out + ": " + std::to_string(traj.times.size()) + " samples");
    finish(c, Json{{"command", "simulate"}, {"samples", traj.times.size()}, {"outputs", traj.outputs.cols()}});
}

void cmd_gramian(const GramianArgs& a, const Common& c, std::ostream& out) {
    auto sys = io::system_from_json(io::read_json(a.model));
    if (a.horizon || a.dt) {
        if (a.horizon) sys.schedule.horizon = *a.horizon;
        if (a.dt) sys.schedule.dt = *a.dt;
        sys.validate();
    }
    gramian::PerturbationScheme scheme;
    scheme.input_scales = a.scales;
    scheme.state_scales = a.state_scales.empty() ? a.scales : a.state_scales;
    Matrix result;
    if (a.type == "cross") {
        const auto target = sys.j_in == sys.o_out ? sys : sysmodel::embed_symmetric(sys);
        result = gramian::empirical_cross(target, scheme);
    } else if (a.type == "joint") {
        gramian::JointOptions opt;
        opt.param_scales = {a.param_scale};
        if (a.param_mode == "relative") {
            opt.mode = gramian::ParameterPerturbation::relative;
        } else if (a.param_mode == "absolute") {
            opt.mode = gramian::ParameterPerturbation::absolute;
        } else {
            throw ValidationError("--param-mode must be 'relative' or 'absolute'");
        }
        opt.excite = !a.no_excite;
        result = io::joint_to_matrix(gramian::empirical_joint(sys, scheme, opt));
    } else {
        throw ValidationError("--type must be 'cross' or 'joint', got '" + a.type + "'");
    }
    io::write_matrix_csv(a.out, result);
    say(c, out, "wrote " + a.out + ": " + result.shape() + " " + a.type + " gramian");
    finish(c, Json{{"command", "gramian"}, {"type", a.type}, {"rows", result.rows()}, {"cols", result.cols()}});
}

void cmd_reduce(const ReduceArgs& a, const Common& c, std::ostream& out) {
    const std::string model_text = io::read_text(a.model);
    const std::string joint_text = io::read_text(a.joint);
    Json model_json;
    try {
        model_json = Json::parse(model_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("'" + a.model + "' is not valid JSON: " + e.what());
    }
    const auto sys = io::system_from_json(model_json);
    const auto wj = io::joint_from_matrix(io::read_matrix_csv(a.joint), sys.n);
    if (wj.p() != sys.p())
        throw ValidationError("joint gramian has " + std::to_string(wj.p()) + " parameter columns, model has " +
                              std::to_string(sys.p()));

    reduce::OrderRule base;
    base.strategy = reduce::parse_strategy(a.strategy);
    base.knee_tolerance = a.knee_tol;
    base.energy_fraction = a.energy;
    if (base.strategy == reduce::OrderStrategy::fixed && (!a.states || !a.params))
        throw ValidationError("--strategy fixed needs both --states and --params");
    reduce::OrderRule states = base;
    reduce::OrderRule params = base;
    if (a.states) states = {reduce::OrderStrategy::fixed, a.knee_tol, a.energy, *a.states};
    if (a.params) params = {reduce::OrderStrategy::fixed, a.knee_tol, a.energy, *a.params};

    const auto red = reduce::reduce_combined(sys, wj, states, params, a.regularization);
    Json provenance{{"model_hash", io::fnv1a_hex(model_text)},
                    {"joint_hash", io::fnv1a_hex(joint_text)},
                    {"horizon", sys.schedule.horizon},
                    {"dt", sys.schedule.dt},
                    {"regularization", a.regularization},
                    {"state_strategy", reduce::strategy_name(states.strategy)},
                    {"parameter_strategy", reduce::strategy_name(params.strategy)},
                    {"parameter_knee", red.knee_order}};
    io::write_json(a.out, io::to_json(red.model, provenance));
    if (!a.spectra_prefix.empty()) {
        io::write_text(a.spectra_prefix + "wx_spectrum.csv", io::sequence_csv(red.state_singular_values, "sigma"));
        io::write_text(a.spectra_prefix + "wi_spectrum.csv",
                       io::sequence_csv(red.parameter_singular_values, "sigma"));
    }
    say(c, out, "wrote " + a.out + ": states " + std::to_string(sys.n) + " -> " + std::to_string(red.model.r()) +
                    ", parameters " + std::to_string(sys.p()) + " -> " + std::to_string(red.model.q()));
    finish(c, Json{{"command", "reduce"}, {"r", red.model.r()}, {"q", red.model.q()}, {"parameter_knee", red.knee_order}});
}

void cmd_benchmark(const BenchmarkArgs& a, const Common& c, std::ostream& out) {
    bench::BenchmarkConfig cfg;
    if (!a.config.empty()) cfg = bench::config_from_json(io::read_json(a.config));
    if (a.repetitions) cfg.repetitions = *a.repetitions;
    cfg.validate();
    const auto report = bench::run_benchmark(cfg);
    const io::fs::path dir(a.out_dir);
    std::error_code ec;
    io::fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    const Json doc = bench::to_json(report);
    io::write_json(dir / "report.json", doc);
    io::write_text(dir / "report.txt", bench::format_table(report));
    io::write_text(dir / "wx_spectrum.csv", io::sequence_csv(report.state_singular_values, "sigma"));
    io::write_text(dir / "wi_spectrum.csv", io::sequence_csv(report.parameter_singular_values, "sigma"));
    if (!c.quiet) out << bench::format_table(report);
    finish(c, doc);
}

int exit_code_for(const std::exception_ptr& e, std::ostream& err) {
    try {
        std::rethrow_exception(e);
    } catch (const IoError& x) {
        err << "error: " << x.what() << '\n';
        return 1;
    } catch (const ValidationError& x) {
        err << "error: " << x.what() << '\n';
        return 2;
    } catch (const NumericalError& x) {
        err << "error: " << x.what() << '\n';
        return 3;
    } catch (const std::exception& x) {
        err << "error: " << x.what() << '\n';
        return 3;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Combined state and parameter reduction of parametrized LTV network models", "gramion"};
    app.require_subcommand(1);
    Common common;
    app.add_flag("--quiet", common.quiet, "Suppress informational output");
    app.add_option("--json-report", common.json_report, "Write a JSON summary of the command to this path");

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Grow a hyperbolic network");
    g->add_option("--nodes", gen.nodes, "Number of nodes")->capture_default_str();
    g->add_option("--degree", gen.degree, "Network degree v")->capture_default_str();
    g->add_option("--seed", gen.seed, "Angle sampler seed")->capture_default_str();
    g->add_option("--out", gen.out, "Network JSON output")->required();

    ModelArgs mod;
    auto* m = app.add_subcommand("model", "Build an LTV model file from a network");
    m->add_option("--network", mod.network, "Network JSON")->required();
    m->add_option("--inputs", mod.inputs, "Number of inputs")->capture_default_str();
    m->add_option("--outputs", mod.outputs, "Number of outputs")->capture_default_str();
    m->add_option("--bc-seed", mod.bc_seed, "Seed for B and C")->capture_default_str();
    m->add_option("--distribution", mod.distribution, "B, C entries: unit ([0,1]) or symmetric ([-1,1])")
        ->capture_default_str();
    m->add_option("--dt", mod.dt, "Time step")->capture_default_str();
    m->add_option("--horizon", mod.horizon, "Simulation horizon")->capture_default_str();
    m->add_option("--stabilization-offset", mod.offset, "Diagonal margin beyond the row degree")
        ->capture_default_str();
    m->add_flag("--fixed", mod.fixed, "All nodes present from t = 0 (default: one birth per step)");
    m->add_option("--out", mod.out, "Model JSON output")->required();

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate a full or reduced model");
    s->add_option("--model", sim.model, "Model JSON");
    s->add_option("--reduced", sim.reduced, "Reduced model JSON");
    s->add_option("--input", sim.input, "zero or impulse:<channel>")->capture_default_str();
    s->add_option("--path", sim.path, "Reduced A update: incremental or direct")->capture_default_str();
    s->add_option("--out", sim.out, "Trajectory CSV output")->required();

    GramianArgs gra;
    auto* w = app.add_subcommand("gramian", "Empirical cross or joint gramian");
    w->add_option("--model", gra.model, "Model JSON")->required();
    w->add_option("--type", gra.type, "cross or joint")->capture_default_str();
    w->add_option("--scales", gra.scales, "Input perturbation scales (also state scales by default)")
        ->capture_default_str();
    w->add_option("--state-scales", gra.state_scales, "State perturbation scales");
    w->add_option("--param-scale", gra.param_scale, "Parameter perturbation scale")->capture_default_str();
    w->add_option("--param-mode", gra.param_mode, "relative or absolute parameter perturbation")
        ->capture_default_str();
    w->add_flag("--no-excite", gra.no_excite, "Do not drive parameter perturbations with an input impulse");
    w->add_option("--horizon", gra.horizon, "Override the model horizon");
    w->add_option("--dt", gra.dt, "Override the model time step");
    w->add_option("--out", gra.out, "Gramian CSV output")->required();

    ReduceArgs red;
    auto* r = app.add_subcommand("reduce", "Combined state and parameter reduction");
    r->add_option("--model", red.model, "Model JSON")->required();
    r->add_option("--joint", red.joint, "Joint gramian CSV")->required();
    r->add_option("--states", red.states, "State order (fixed)");
    r->add_option("--params", red.params, "Parameter order (fixed)");
    r->add_option("--strategy", red.strategy, "Order strategy for orders not given: knee, energy, fixed")
        ->capture_default_str();
    r->add_option("--knee-tol", red.knee_tol, "Knee tolerance on sigma_{r+1} / sigma_1")->capture_default_str();
    r->add_option("--energy", red.energy, "Energy fraction")->capture_default_str();
    r->add_option("--regularization", red.regularization, "Relative shift of sym(W_X) before inversion")
        ->capture_default_str();
    r->add_option("--spectra-prefix", red.spectra_prefix, "Write <prefix>wx_spectrum.csv and <prefix>wi_spectrum.csv");
    r->add_option("--out", red.out, "Reduced model JSON output")->required();

    BenchmarkArgs ben;
    auto* b = app.add_subcommand("benchmark", "Run the network reduction benchmark");
    b->add_option("--config", ben.config, "Benchmark config JSON (defaults otherwise)");
    b->add_option("--out-dir", ben.out_dir, "Directory for report and spectra")->capture_default_str();
    b->add_option("--repetitions", ben.repetitions, "Override timing repetitions");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (g->parsed()) cmd_generate(gen, common, out);
        if (m->parsed()) cmd_model(mod, common, out);
        if (s->parsed()) cmd_simulate(sim, common, out);
        if (w->parsed()) cmd_gramian(gra, common, out);
        if (r->parsed()) cmd_reduce(red, common, out);
        if (b->parsed()) cmd_benchmark(ben, common, out);
    } catch (...) {
        return exit_code_for(std::current_exception(), err);
    }
    return 0;
}

}  // namespace gramion::cli
