#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "../tools/cli.hpp"
#include "gramion/io.hpp"
#include "gramion/sysmodel.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
namespace io = gramion::io;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = gramion::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gramion_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& p) {
    std::istringstream in(io::read_text(p.string()));
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("generate writes the requested network and is reproducible") {
    const auto dir = scratch("generate");
    const auto a = dir / "a.json";
    const auto b = dir / "b.json";
    REQUIRE(run({"--quiet", "generate", "--nodes", "20", "--seed", "4", "--out", a.string()}).code == 0);
    REQUIRE(run({"--quiet", "generate", "--nodes", "20", "--seed", "4", "--out", b.string()}).code == 0);
    const auto doc = io::read_json(a.string());
    CHECK(doc["config"]["n_nodes"] == 20);
    CHECK(doc["angles"].size() == 20);
    CHECK(io::read_text(a.string()) == io::read_text(b.string()));

    const auto bad = run({"generate", "--nodes", "1", "--out", (dir / "c.json").string()});
    CHECK(bad.code == 2);
    CHECK_FALSE(bad.err.empty());
    CHECK_FALSE(fs::exists(dir / "c.json"));
}

TEST_CASE("simulating the scalar model gives a decaying exponential") {
    const auto dir = scratch("scalar");
    io::write_json((dir / "scalar.json").string(), io::to_json(testing::scalar_system(0.01, 1.0), 0.0));
    const auto csv = dir / "y.csv";
    REQUIRE(run({"--quiet", "simulate", "--model", (dir / "scalar.json").string(), "--input", "impulse:0", "--out",
                 csv.string()})
                .code == 0);
    const auto rows = read_csv_rows(csv);
    REQUIRE(rows.size() == 101);
    for (const auto& row : rows) CHECK(row[1] == doctest::Approx(std::exp(-row[0])).epsilon(1e-8));
}

TEST_CASE("missing input file is an I/O error naming the path") {
    const auto r = run({"simulate", "--model", "/nonexistent/model.json", "--out", "/tmp/never.csv"});
    CHECK(r.code == 1);
    CHECK(r.err.find("/nonexistent/model.json") != std::string::npos);
}

TEST_CASE("cross gramian of the scalar system over a long horizon") {
    const auto dir = scratch("cross");
    io::write_json((dir / "scalar.json").string(), io::to_json(testing::scalar_system(0.01, 1.0), 0.0));
    const auto csv = dir / "wx.csv";
    REQUIRE(run({"--quiet", "gramian", "--model", (dir / "scalar.json").string(), "--type", "cross", "--horizon", "20",
                 "--out", csv.string()})
                .code == 0);
    const auto m = io::read_matrix_csv(csv.string());
    REQUIRE(m.rows() == 1);
    CHECK(m(0, 0) == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("generate, model, joint gramian, reduce, simulate") {
    const auto dir = scratch("chain");
    const auto p = [&](const char* f) { return (dir / f).string(); };
    REQUIRE(run({"--quiet", "generate", "--nodes", "12", "--seed", "3", "--out", p("net.json")}).code == 0);
    REQUIRE(run({"--quiet", "model", "--network", p("net.json"), "--inputs", "2", "--outputs", "2", "--out",
                 p("model.json")})
                .code == 0);
    REQUIRE(run({"--quiet", "gramian", "--model", p("model.json"), "--type", "joint", "--out", p("wj.csv")}).code == 0);
    const auto wj = io::read_matrix_csv(p("wj.csv"));
    CHECK(wj.rows() == 12);
    CHECK(wj.cols() == 12 + 66);

    // Full orders reproduce the original trajectory.
    REQUIRE(run({"--quiet", "reduce", "--model", p("model.json"), "--joint", p("wj.csv"), "--states", "12",
                 "--params", "66", "--out", p("full.json")})
                .code == 0);
    REQUIRE(run({"--quiet", "simulate", "--model", p("model.json"), "--out", p("y_full.csv")}).code == 0);
    REQUIRE(run({"--quiet", "simulate", "--reduced", p("full.json"), "--out", p("y_red.csv")}).code == 0);
    const auto a = read_csv_rows(p("y_full.csv"));
    const auto b = read_csv_rows(p("y_red.csv"));
    REQUIRE(a.size() == b.size());
    double scale = 0.0;
    double diff = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t j = 1; j < a[k].size(); ++j) {
            scale = std::max(scale, std::abs(a[k][j]));
            diff = std::max(diff, std::abs(a[k][j] - b[k][j]));
        }
    CHECK(diff <= 1e-8 * scale);

    REQUIRE(run({"--quiet", "reduce", "--model", p("model.json"), "--joint", p("wj.csv"), "--states", "4", "--out",
                 p("small.json")})
                .code == 0);
    const auto small = io::read_json(p("small.json"));
    CHECK(small["orders"]["r"] == 4);
    CHECK(small.contains("provenance"));

    const auto too_big = run({"reduce", "--model", p("model.json"), "--joint", p("wj.csv"), "--states", "13", "--out",
                              p("bad.json")});
    CHECK(too_big.code == 2);
}

TEST_CASE("toy benchmark finishes quickly and writes its artifacts") {
    const auto dir = scratch("bench");
    io::Json cfg = {{"network", {{"n_nodes", 8}, {"degree", 1.0}, {"seed", 7}}},
                    {"j_in", 2},
                    {"o_out", 2},
                    {"states", {{"strategy", "fixed"}, {"order", 4}}},
                    {"params", {{"strategy", "knee"}}},
                    {"repetitions", 3}};
    io::write_json((dir / "cfg.json").string(), cfg);
    const auto start = std::chrono::steady_clock::now();
    const auto r = run({"--quiet", "benchmark", "--config", (dir / "cfg.json").string(), "--out-dir",
                        (dir / "out").string()});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    REQUIRE(r.code == 0);
    CHECK(seconds < 5.0);
    for (const char* f : {"report.json", "report.txt", "wx_spectrum.csv", "wi_spectrum.csv"})
        CHECK(fs::exists(dir / "out" / f));
    const auto report = io::read_json((dir / "out" / "report.json").string());
    CHECK(report["orders"]["r"] == 4);
}
