#include <doctest.h>

#include <cmath>

#include "gramion/error.hpp"
#include "gramion/hypnet.hpp"
#include "gramion/io.hpp"
#include "gramion/sysmodel.hpp"
#include "support.hpp"

using gramion::Matrix;
namespace sm = gramion::sysmodel;
namespace nm = gramion::numerics;
using namespace testing;

namespace {

double max_err_vs(const sm::Trajectory& t, std::size_t channel, double rate) {
    double e = 0.0;
    for (std::size_t k = 0; k < t.times.size(); ++k)
        e = std::max(e, std::abs(t.outputs(k, channel) - std::exp(-rate * t.times[k])));
    return e;
}

sm::Trajectory add(sm::Trajectory a, const sm::Trajectory& b) {
    a.outputs += b.outputs;
    return a;
}

}  // namespace

TEST_CASE("schedules") {
    const auto g = sm::ActivationSchedule::growing(5, 0.01, 1.0);
    CHECK(g.steps() == 100);
    CHECK(g.birth_times[0] == 0.0);
    CHECK(g.birth_times[4] == doctest::Approx(0.04));
    CHECK(g.born_by(0.0) == 1);
    CHECK(g.born_by(0.015) == 2);
    CHECK(g.born_by(1.0) == 5);
    CHECK(sm::ActivationSchedule::fixed(5, 0.01, 1.0).born_by(0.0) == 5);
    auto bad = g;
    bad.dt = 0.03;
    CHECK_THROWS_AS(bad.validate(5), gramion::ValidationError);
    bad = g;
    bad.birth_times[2] = 2.0;
    CHECK_THROWS_AS(bad.validate(5), gramion::ValidationError);
    CHECK_THROWS_AS(g.validate(4), gramion::ValidationError);
}

TEST_CASE("assemble_a follows the birth mask") {
    const auto sys = network_system(12, 2, 3);
    const Matrix first = sm::assemble_a(sys, 0.005);
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 12; ++j)
            CHECK(first(i, j) == (i == j ? sys.stabilization_shift[i] : 0.0));

    const Matrix grown = sm::assemble_a(sys, 1.0);
    Matrix expect = gramion::hypnet::matrix_from_theta(sys.theta, 12);
    for (std::size_t i = 0; i < 12; ++i) expect(i, i) = sys.stabilization_shift[i];
    CHECK(grown == expect);

    for (double t : {0.0, 0.033, 0.05, 0.0999, 0.11}) {
        const Matrix a = sm::assemble_a(sys, t);
        CHECK(a == a.transpose());
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = 0; j < 12; ++j) {
                if (i == j) continue;
                const bool born = sys.schedule.birth_times[i] <= t && sys.schedule.birth_times[j] <= t;
                const std::size_t lo = std::min(i, j);
                const std::size_t hi = std::max(i, j);
                CHECK(a(i, j) == (born ? sys.theta[gramion::hypnet::parameter_index(lo, hi, 12)] : 0.0));
            }
    }
    CHECK_THROWS_AS(sm::assemble_a(sys, -0.1), gramion::ValidationError);
    CHECK_THROWS_AS(sm::assemble_a(sys, 1.5), gramion::ValidationError);
}

TEST_CASE("stabilization makes the grown matrix diagonally dominant") {
    const auto sys = network_system(64, 8, 7);
    const Matrix a = sm::assemble_a(sys, 1.0);
    for (std::size_t i = 0; i < 64; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < 64; ++j)
            if (j != i) off += std::abs(a(i, j));
        CHECK(-a(i, i) == doctest::Approx(off + 0.5));
    }
}

TEST_CASE("impulse input") {
    const auto u = sm::impulse_input(0, 3, 0.01, 100);
    CHECK(u.samples(0, 0) == 100.0);
    double integral = 0.0;
    for (std::size_t k = 0; k <= 100; ++k) {
        integral += 0.01 * u.samples(k, 0);
        CHECK(u.samples(k, 1) == 0.0);
        CHECK(u.samples(k, 2) == 0.0);
        if (k > 0) CHECK(u.samples(k, 0) == 0.0);
    }
    CHECK(integral == doctest::Approx(1.0));
    CHECK_THROWS_AS(sm::impulse_input(3, 3, 0.01, 100), gramion::ValidationError);
}

TEST_CASE("scalar impulse response is the exponential") {
    const auto sys = scalar_system();
    const auto t = sm::simulate(sys, sm::impulse_input(0, 1, 0.01, 100), sys.x0);
    CHECK(t.times.size() == 101);
    CHECK(t.times[100] == doctest::Approx(1.0));
    CHECK(max_err_vs(t, 0, 1.0) <= 1e-6);
}

TEST_CASE("zero input and zero state stay at zero") {
    const auto sys = network_system(10, 2, 1);
    const auto t = sm::simulate(sys, sm::zero_input(2, 100), sys.x0, true);
    CHECK(t.outputs.max_abs() == 0.0);
    CHECK(t.states->max_abs() == 0.0);
}

TEST_CASE("time-invariant diagonal system matches the closed form") {
    const Matrix a = Matrix::from_rows({{-1, 0}, {0, -2}});
    const auto sys = lti_system(a, Matrix::identity(2), Matrix::identity(2), 0.01, 1.0);
    const std::vector<double> x0{1.0, 1.0};
    const auto t = sm::simulate(sys, sm::zero_input(2, 100), x0);
    CHECK(max_err_vs(t, 0, 1.0) <= 1e-6);
    CHECK(max_err_vs(t, 1, 2.0) <= 1e-6);
}

TEST_CASE("RK4 converges at fourth order") {
    auto err = [](double dt) {
        const auto sys = scalar_system(dt, 1.0);
        const std::vector<double> x0{1.0};
        const auto t = sm::simulate(sys, sm::zero_input(1, sys.schedule.steps()), x0);
        return std::abs(t.outputs(t.times.size() - 1, 0) - std::exp(-1.0));
    };
    const double ratio = err(0.1) / err(0.05);
    CHECK(ratio >= 8.0);
    CHECK(ratio <= 32.0);
}

TEST_CASE("simulate is linear and superposes state and input responses") {
    const auto sys = network_system(16, 3, 4);
    const std::size_t steps = sys.schedule.steps();
    sm::InputSignal u1{random_matrix(steps + 1, 3, 5)};
    sm::InputSignal u2{random_matrix(steps + 1, 3, 6)};
    sm::InputSignal u12{u1.samples + u2.samples};
    const std::vector<double> zero(16, 0.0);
    const auto y1 = sm::simulate(sys, u1, zero);
    const auto y2 = sm::simulate(sys, u2, zero);
    const auto y12 = sm::simulate(sys, u12, zero);
    CHECK(sm::relative_l2_error(y12, add(y1, y2)) <= 1e-9);

    const std::vector<double> x0 = random_matrix(16, 1, 7).column_copy(0);
    const auto yx = sm::simulate(sys, sm::zero_input(3, steps), x0);
    const auto both = sm::simulate(sys, u1, x0);
    CHECK(sm::relative_l2_error(both, add(yx, y1)) <= 1e-9);
}

TEST_CASE("divergence is reported with the step") {
    const auto sys = lti_system(Matrix::from_rows({{40.0}}), Matrix::from_rows({{1.0}}), Matrix::from_rows({{1.0}}),
                                0.01, 1.0);
    const std::vector<double> x0{1.0};
    try {
        sm::simulate(sys, sm::zero_input(1, 100), x0);
        FAIL("expected a NumericalError");
    } catch (const gramion::NumericalError& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("system validation") {
    auto sys = network_system(6, 2, 2);
    auto bad = sys;
    bad.b = Matrix(5, 2);
    CHECK_THROWS_AS(bad.validate(), gramion::ValidationError);
    bad = sys;
    bad.theta.pop_back();
    CHECK_THROWS_AS(bad.validate(), gramion::ValidationError);
    bad = sys;
    bad.x0 = {1.0};
    CHECK_THROWS_AS(bad.validate(), gramion::ValidationError);
    const std::vector<double> x0(6, 0.0);
    CHECK_THROWS_AS(sm::simulate(sys, sm::zero_input(3, 100), x0), gramion::ValidationError);
}

TEST_CASE("augmented system") {
    const auto sys = network_system(10, 2, 8);
    const auto aug = sm::augment(sys);
    CHECK(aug.dim() == 10 + 45);
    const auto xi = aug.initial_state();
    CHECK(std::equal(sys.theta.begin(), sys.theta.end(), xi.begin() + 10));

    const auto u = sm::impulse_input(1, 2, 0.01, 100);
    const auto base = sm::simulate(sys, u, sys.x0, true);
    const auto full = sm::simulate(aug, u, xi, true);
    CHECK(full.outputs == base.outputs);
    for (std::size_t k = 0; k < full.times.size(); ++k) {
        for (std::size_t i = 0; i < 10; ++i) CHECK((*full.states)(k, i) == (*base.states)(k, i));
        for (std::size_t i = 0; i < 45; ++i) CHECK((*full.states)(k, 10 + i) == sys.theta[i]);
    }
}

TEST_CASE("a parameter changes outputs exactly when its edge becomes active") {
    auto sys = network_system(8, 2, 9);
    // Node 7 is born at the horizon, so no integration step ever sees it.
    sys.schedule.birth_times[7] = sys.schedule.horizon;
    const auto aug = sm::augment(sys);
    const auto u = sm::impulse_input(0, 2, 0.01, 100);
    const auto nominal = sm::simulate(sys, u, sys.x0);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = i + 1; j < 8; ++j) {
            auto xi = aug.initial_state();
            xi[8 + gramion::hypnet::parameter_index(i, j, 8)] += 0.3;
            const auto perturbed = sm::simulate(aug, u, xi);
            const bool changed = !(perturbed.outputs == nominal.outputs);
            CHECK(changed == (j != 7));
        }
}

TEST_CASE("symmetric embedding") {
    const Matrix a = random_stable_symmetric(5, 10);
    const Matrix b = random_matrix(5, 2, 11);
    const Matrix c = random_matrix(3, 5, 12);
    const auto e = sm::embed_symmetric(a, b, c);
    CHECK(e.a == a);
    CHECK(e.b.rows() == 5);
    CHECK(e.b.cols() == 5);
    CHECK(e.c.rows() == 5);
    CHECK(e.c.cols() == 5);
    // gain -C^ A^-1 B^ is symmetric for symmetric A
    const Matrix g = nm::matmul(e.c, nm::solve_linear(a, e.b)) * -1.0;
    CHECK(max_abs_diff(g, g.transpose()) <= 1e-8 * g.max_abs());

    const auto self = sm::embed_symmetric(a, b, b.transpose());
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(self.b(i, j) == self.b(i, j + 2));
    const Matrix cb = nm::matmul(self.c, self.b);
    CHECK(max_abs_diff(cb, cb.transpose()) == 0.0);

    CHECK_THROWS_AS(sm::embed_symmetric(Matrix::from_rows({{-1, 1}, {0, -1}}), Matrix(2, 1), Matrix(1, 2)),
                    gramion::ValidationError);

    const auto sys = network_system(12, 3, 13);
    const auto emb = sm::embed_symmetric(sys);
    CHECK(emb.n == 12);
    CHECK(emb.j_in == 6);
    CHECK(emb.o_out == 6);
}

TEST_CASE("relative L2 error") {
    const auto sys = network_system(8, 2, 14);
    const auto y = sm::simulate(sys, sm::impulse_input(0, 2, 0.01, 100), sys.x0);
    CHECK(sm::relative_l2_error(y, y) == 0.0);
    auto twice = y;
    twice.outputs *= 2.0;
    CHECK(sm::relative_l2_error(y, twice) == doctest::Approx(1.0).epsilon(1e-14));
    const auto zero = sm::simulate(sys, sm::zero_input(2, 100), sys.x0);
    CHECK_THROWS_AS(sm::relative_l2_error(zero, y), gramion::ValidationError);
    auto shorter = y;
    shorter.times.pop_back();
    CHECK_THROWS_AS(sm::relative_l2_error(y, shorter), gramion::ValidationError);
}

TEST_CASE("model json round trip") {
    const auto sys = network_system(9, 2, 15);
    const auto doc = gramion::io::to_json(sys, 0.5);
    const auto back = gramion::io::system_from_json(doc);
    CHECK(back.theta == sys.theta);
    CHECK(back.b == sys.b);
    CHECK(back.c == sys.c);
    CHECK(back.stabilization_shift == sys.stabilization_shift);
    CHECK(back.schedule.birth_times == sys.schedule.birth_times);
    CHECK(gramion::io::to_json(back, 0.5).dump() == doc.dump());
    auto missing = doc;
    missing.erase("theta");
    CHECK_THROWS_AS(gramion::io::system_from_json(missing), gramion::ValidationError);
}

TEST_CASE("trajectory csv layout") {
    const auto sys = network_system(6, 2, 16);
    const auto y = sm::simulate(sys, sm::impulse_input(0, 2, 0.01, 100), sys.x0);
    const std::string csv = gramion::io::trajectory_csv(y);
    CHECK(csv.rfind("t,y1,y2\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 102);
}
