#include "gramion/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "gramion/error.hpp"
#include "gramion/numerics.hpp"

namespace gramion::io {

namespace {

template <class T>
T field(const Json& j, const char* key, const std::string& what) {
    if (!j.is_object() || !j.contains(key))
        throw ValidationError(what + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(what + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

Json schedule_json(const sysmodel::ActivationSchedule& s) {
    return Json{{"dt", s.dt}, {"horizon", s.horizon}, {"birth_times", s.birth_times}};
}

sysmodel::ActivationSchedule schedule_from(const Json& j) {
    sysmodel::ActivationSchedule s;
    s.dt = field<double>(j, "dt", "schedule");
    s.horizon = field<double>(j, "horizon", "schedule");
    s.birth_times = field<std::vector<double>>(j, "birth_times", "schedule");
    return s;
}

std::string csv_number(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

}  // namespace

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
    return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.close();
    if (!out) throw IoError("error while writing '" + path.string() + "'");
}

Json read_json(const fs::path& path) {
    const std::string text = read_text(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_json(const fs::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
    const auto rows = field<std::size_t>(j, "rows", what);
    const auto cols = field<std::size_t>(j, "cols", what);
    const auto data = field<std::vector<std::vector<double>>>(j, "data", what);
    if (data.size() != rows) throw ValidationError(what + ": expected " + std::to_string(rows) + " rows");
    std::vector<double> flat;
    flat.reserve(rows * cols);
    for (const auto& r : data) {
        if (r.size() != cols)
            throw ValidationError(what + ": every row needs " + std::to_string(cols) + " entries");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return Matrix(rows, cols, std::move(flat));
}

Json to_json(const hypnet::HyperbolicNetwork& net) {
    Json angles = Json::array();
    for (const auto& node : net.nodes) angles.push_back(node.angle);
    Json edges = Json::array();
    for (const auto& [i, j] : net.edges) edges.push_back(Json::array({i, j}));
    return Json{{"config",
                 {{"n_nodes", net.config.n_nodes},
                  {"degree", net.config.degree},
                  {"seed", net.config.seed}}},
                {"angles", std::move(angles)},
                {"edges", std::move(edges)}};
}

hypnet::HyperbolicNetwork network_from_json(const Json& j) {
    const Json cfg = field<Json>(j, "config", "network");
    hypnet::NetworkConfig config;
    config.n_nodes = field<std::size_t>(cfg, "n_nodes", "network config");
    config.degree = field<double>(cfg, "degree", "network config");
    config.seed = field<std::uint64_t>(cfg, "seed", "network config");
    const auto angles = field<std::vector<double>>(j, "angles", "network");
    const auto edges = field<std::vector<std::pair<std::size_t, std::size_t>>>(j, "edges", "network");
    hypnet::HyperbolicNetwork net = hypnet::generate(config, std::span<const double>(angles));
    if (edges != net.edges)
        throw ValidationError("network: stored edges disagree with the connection rule for the stored angles");
    return net;
}

Json to_json(const sysmodel::LtvSystem& sys, double stabilization_offset) {
    return Json{{"n", sys.n},
                {"j_in", sys.j_in},
                {"o_out", sys.o_out},
                {"theta", sys.theta},
                {"b", to_json(sys.b)},
                {"c", to_json(sys.c)},
                {"x0", sys.x0},
                {"schedule", schedule_json(sys.schedule)},
                {"stabilization", {{"offset", stabilization_offset}, {"shift", sys.stabilization_shift}}}};
}

sysmodel::LtvSystem system_from_json(const Json& j) {
    sysmodel::LtvSystem sys;
    sys.n = field<std::size_t>(j, "n", "model");
    sys.j_in = field<std::size_t>(j, "j_in", "model");
    sys.o_out = field<std::size_t>(j, "o_out", "model");
    sys.theta = field<std::vector<double>>(j, "theta", "model");
    sys.b = matrix_from_json(field<Json>(j, "b", "model"), "model.b");
    sys.c = matrix_from_json(field<Json>(j, "c", "model"), "model.c");
    sys.x0 = field<std::vector<double>>(j, "x0", "model");
    sys.schedule = schedule_from(field<Json>(j, "schedule", "model"));
    const Json stab = field<Json>(j, "stabilization", "model");
    if (stab.contains("shift")) {
        sys.stabilization_shift = field<std::vector<double>>(stab, "shift", "model.stabilization");
    } else {
        sys.stabilization_shift = sysmodel::stabilization_shift(
            sys.theta, sys.n, field<double>(stab, "offset", "model.stabilization"));
    }
    sys.validate();
    return sys;
}

Json to_json(const reduce::ReducedModel& m, const Json& provenance) {
    return Json{{"orders", {{"r", m.r()}, {"q", m.q()}, {"n", m.n()}, {"p", m.p()}}},
                {"v1", to_json(m.v1)},
                {"u1", to_json(m.u1)},
                {"pv1", to_json(m.pv1)},
                {"b_red", to_json(m.b_red)},
                {"c_red", to_json(m.c_red)},
                {"x0_red", m.x0_red},
                {"theta_reduced", m.theta_reduced},
                {"theta_lifted", m.theta_lifted},
                {"stabilization_shift", m.stabilization_shift},
                {"schedule", schedule_json(m.schedule)},
                {"provenance", provenance}};
}

reduce::ReducedModel reduced_from_json(const Json& j) {
    reduce::ReducedModel m;
    m.v1 = matrix_from_json(field<Json>(j, "v1", "reduced"), "reduced.v1");
    m.u1 = matrix_from_json(field<Json>(j, "u1", "reduced"), "reduced.u1");
    m.pv1 = matrix_from_json(field<Json>(j, "pv1", "reduced"), "reduced.pv1");
    m.b_red = matrix_from_json(field<Json>(j, "b_red", "reduced"), "reduced.b_red");
    m.c_red = matrix_from_json(field<Json>(j, "c_red", "reduced"), "reduced.c_red");
    m.x0_red = field<std::vector<double>>(j, "x0_red", "reduced");
    m.theta_reduced = field<std::vector<double>>(j, "theta_reduced", "reduced");
    m.theta_lifted = field<std::vector<double>>(j, "theta_lifted", "reduced");
    m.stabilization_shift = field<std::vector<double>>(j, "stabilization_shift", "reduced");
    m.schedule = schedule_from(field<Json>(j, "schedule", "reduced"));
    m.validate();
    return m;
}

std::string matrix_csv(const Matrix& m) {
    std::ostringstream out;
    numerics::write_csv(out, m);
    return out.str();
}

void write_matrix_csv(const fs::path& path, const Matrix& m) { write_text(path, matrix_csv(m)); }

Matrix read_matrix_csv(const fs::path& path) {
    std::istringstream in(read_text(path));
    try {
        return numerics::read_csv(in);
    } catch (const IoError& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
}

Matrix joint_to_matrix(const gramian::JointGramian& wj) { return hconcat(wj.wx, wj.wm); }

gramian::JointGramian joint_from_matrix(const Matrix& m, std::size_t n) {
    if (m.rows() != n || m.cols() < n)
        throw ValidationError("joint gramian must have " + std::to_string(n) + " rows and at least " +
                              std::to_string(n) + " columns, got " + m.shape());
    return {m.block(0, 0, n, n), m.block(0, n, n, m.cols() - n)};
}

std::string trajectory_csv(const sysmodel::Trajectory& traj) {
    std::ostringstream out;
    out << 't';
    for (std::size_t j = 0; j < traj.outputs.cols(); ++j) out << ",y" << (j + 1);
    out << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << csv_number(traj.times[k]);
        for (double v : traj.outputs.row(k)) out << ',' << csv_number(v);
        out << '\n';
    }
    return out.str();
}

std::string sequence_csv(std::span<const double> values, const std::string& name) {
    std::ostringstream out;
    out << "index," << name << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) out << (i + 1) << ',' << csv_number(values[i]) << '\n';
    return out.str();
}

}  // namespace gramion::io
