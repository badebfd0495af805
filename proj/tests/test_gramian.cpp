#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gramion/error.hpp"
#include "gramion/gramian.hpp"
#include "gramion/hypnet.hpp"
#include "support.hpp"

using gramion::Matrix;
namespace gm = gramion::gramian;
namespace sm = gramion::sysmodel;
namespace nm = gramion::numerics;
using namespace testing;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

Matrix from_eigen(const Eigen::MatrixXd& e) {
    Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = e(static_cast<int>(i), static_cast<int>(j));
    return m;
}

// e^{At} for symmetric A through its eigen-decomposition.
Eigen::MatrixXd expm_symmetric(const Eigen::MatrixXd& a, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::VectorXd ex = (es.eigenvalues() * t).array().exp();
    return es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().transpose();
}

Matrix orthogonal(std::size_t n, std::uint64_t seed) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(to_eigen(random_matrix(n, n, seed)));
    return from_eigen(qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<int>(n), static_cast<int>(n)));
}

double rel(const Matrix& a, const Matrix& b) { return (a - b).frobenius_norm() / b.frobenius_norm(); }

}  // namespace

TEST_CASE("scalar cross gramian is one half") {
    const auto sys = scalar_system(0.01, 20.0);
    const Matrix w = gm::empirical_cross(sys, {});
    REQUIRE(w.rows() == 1);
    CHECK(std::abs(w(0, 0) - 0.5) <= 2e-3);
    CHECK(gm::analytic_cross(Matrix::from_rows({{-1}}), Matrix::from_rows({{1}}), Matrix::from_rows({{1}}))(0, 0) ==
          doctest::Approx(0.5));
}

TEST_CASE("empirical cross gramian converges to the Sylvester solution") {
    const Matrix a = random_stable_symmetric(8, 21);
    const Matrix b = random_matrix(8, 3, 22);
    const Matrix c = b.transpose();
    const auto sys = lti_system(a, b, c, 1e-3, 20.0);
    const Matrix analytic = gm::analytic_cross(a, b, c);
    CHECK(rel(gm::empirical_cross(sys, {}), analytic) <= 1e-2);
    // Coarser grid and shorter horizon: still close, and no better.
    const auto coarse = lti_system(a, b, c, 1e-2, 2.0);
    CHECK(rel(gm::empirical_cross(coarse, {}), analytic) >= rel(gm::empirical_cross(sys, {}), analytic));
}

TEST_CASE("analytic cross gramian equals the time integral of e^{At} B C e^{At}") {
    const Matrix a = random_stable_symmetric(5, 23);
    const Matrix b = random_matrix(5, 2, 24);
    const Matrix c = random_matrix(2, 5, 25);
    const Eigen::MatrixXd ea = to_eigen(a);
    const Eigen::MatrixXd bc = to_eigen(b) * to_eigen(c);
    // Composite Simpson on [0, 40] with a fine grid.
    const int steps = 40000;
    const double h = 40.0 / steps;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(5, 5);
    const Eigen::MatrixXd step = expm_symmetric(ea, h);
    Eigen::MatrixXd e = Eigen::MatrixXd::Identity(5, 5);
    for (int k = 0; k <= steps; ++k) {
        const double w = (k == 0 || k == steps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += w * e * bc * e;
        e = e * step;
    }
    acc *= h / 3.0;
    const Matrix w = gm::analytic_cross(a, b, c);
    CHECK(max_abs_diff(w, from_eigen(acc)) <= 1e-6);
}

TEST_CASE("analytic controllability and observability gramians") {
    CHECK(gm::analytic_controllability(Matrix::from_rows({{-1}}), Matrix::from_rows({{1}}))(0, 0) ==
          doctest::Approx(0.5));
    const Matrix b = Matrix::identity(3) * std::sqrt(2.0);
    CHECK(max_abs_diff(gm::analytic_controllability(Matrix::identity(3) * -1.0, b), Matrix::identity(3)) <= 1e-14);
    Matrix a = random_matrix(6, 6, 26);
    for (std::size_t i = 0; i < 6; ++i) a(i, i) -= 4.0;
    const Matrix bb = random_matrix(6, 2, 27);
    const Matrix cc = random_matrix(3, 6, 28);
    const Matrix wc = gm::analytic_controllability(a, bb);
    const Matrix wo = gm::analytic_observability(a, cc);
    const Matrix qc = nm::matmul(bb, bb.transpose());
    const Matrix qo = nm::matmul_tn(cc, cc);
    CHECK((nm::matmul(a, wc) + nm::matmul(wc, a.transpose()) + qc).frobenius_norm() <= 1e-8 * qc.frobenius_norm());
    CHECK((nm::matmul(a.transpose(), wo) + nm::matmul(wo, a) + qo).frobenius_norm() <= 1e-8 * qo.frobenius_norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ec(to_eigen(wc));
    CHECK(ec.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("Hankel identity for symmetric systems") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix a = random_stable_symmetric(8, 30 + seed);
        const Matrix b = random_matrix(8, 8, 40 + seed);
        const Matrix wx = gm::analytic_cross(a, b, b.transpose());
        Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(wx));
        std::vector<double> lam;
        for (int i = 0; i < 8; ++i) lam.push_back(std::abs(es.eigenvalues()(i)));
        std::sort(lam.rbegin(), lam.rend());
        const auto hsv = nm::hankel_singular_values(gm::analytic_controllability(a, b),
                                                    gm::analytic_observability(a, b.transpose()));
        for (std::size_t i = 0; i < 8; ++i) CHECK(lam[i] == doctest::Approx(hsv[i]).epsilon(1e-6));
    }
}

TEST_CASE("uniform rescaling of perturbation scales leaves the gramian unchanged") {
    const auto sys = sm::embed_symmetric(network_system(12, 2, 31));
    gm::PerturbationScheme base;
    base.input_scales = {0.5, 1.0};
    base.state_scales = {0.25, 2.0};
    gm::PerturbationScheme doubled = base;
    for (double& s : doubled.input_scales) s *= 2.0;
    for (double& s : doubled.state_scales) s *= 2.0;
    const Matrix w1 = gm::empirical_cross(sys, base);
    const Matrix w2 = gm::empirical_cross(sys, doubled);
    CHECK(rel(w2, w1) <= 1e-9);
    CHECK(rel(gm::empirical_cross(sys, {}), w1) <= 1e-9);
}

TEST_CASE("orthogonal input and state rotations do not change a linear system's gramian") {
    const auto sys = sm::embed_symmetric(network_system(10, 2, 32));
    gm::PerturbationScheme rot;
    rot.input_rotations = {Matrix::identity(4), orthogonal(4, 33)};
    rot.state_rotations = {orthogonal(10, 34)};
    const Matrix plain = gm::empirical_cross(sys, {});
    const Matrix rotated = gm::empirical_cross(sys, rot);
    CHECK(rel(rotated, plain) <= 1e-9);
    CHECK(rel(gm::reference::empirical_cross(sys, rot), rotated) <= 1e-12);
}

TEST_CASE("perturbation loop order does not matter") {
    const auto sys = sm::embed_symmetric(network_system(12, 2, 35));
    gm::PerturbationScheme a;
    a.input_scales = {0.5, 1.0, 2.0};
    a.state_scales = {1.0, 3.0};
    gm::PerturbationScheme b = a;
    std::reverse(b.input_scales.begin(), b.input_scales.end());
    std::reverse(b.state_scales.begin(), b.state_scales.end());
    b.input_directions = {3, 2, 1, 0};
    for (std::size_t i = 12; i-- > 0;) b.state_directions.push_back(i);
    CHECK(rel(gm::empirical_cross(sys, b), gm::empirical_cross(sys, a)) <= 1e-12);
}

TEST_CASE("direction subsets select gramian columns") {
    const auto sys = sm::embed_symmetric(network_system(8, 2, 36));
    gm::PerturbationScheme part;
    part.state_directions = {1, 4};
    const Matrix full = gm::empirical_cross(sys, {});
    const Matrix w = gm::empirical_cross(sys, part);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) {
            if (j == 1 || j == 4) {
                CHECK(w(i, j) == full(i, j));
            } else {
                CHECK(w(i, j) == 0.0);
            }
        }
}

TEST_CASE("scheme validation") {
    gm::PerturbationScheme s;
    s.input_scales = {1.0, -1.0};
    CHECK_THROWS_AS(s.validate(2, 4), gramion::ValidationError);
    s = {};
    s.state_directions = {0, 0};
    CHECK_THROWS_AS(s.validate(2, 4), gramion::ValidationError);
    s = {};
    s.input_directions = {5};
    CHECK_THROWS_AS(s.validate(2, 4), gramion::ValidationError);
    s = {};
    s.input_rotations = {Matrix::from_rows({{1, 0.1}, {0, 1}})};
    CHECK_THROWS_AS(s.validate(2, 4), gramion::ValidationError);
    s = {};
    s.state_rotations = {Matrix::identity(3)};
    CHECK_THROWS_AS(s.validate(2, 4), gramion::ValidationError);
    const auto nonsquare = network_system(6, 2, 37);
    auto wide = nonsquare;
    wide.c = random_matrix(3, 6, 38);
    wide.o_out = 3;
    CHECK_THROWS_AS(gm::empirical_cross(wide, {}), gramion::ValidationError);
}

TEST_CASE("joint gramian: state block equals the plain cross gramian of the embedded system") {
    const auto sys = network_system(8, 2, 39);
    const auto wj = gm::empirical_joint(sys, {});
    CHECK(wj.n() == 8);
    CHECK(wj.p() == 28);
    const Matrix wx = gm::empirical_cross(sm::embed_symmetric(sys), {});
    CHECK(max_abs_diff(wj.wx, wx) <= 1e-6 * wx.max_abs());
}

TEST_CASE("joint gramian without parameters degenerates to the cross gramian") {
    const auto sys = scalar_system(0.01, 5.0);
    const auto wj = gm::empirical_joint(sys, {});
    CHECK(wj.p() == 0);
    CHECK(max_abs_diff(wj.wx, gm::empirical_cross(sm::embed_symmetric(sys), {})) == 0.0);
}

TEST_CASE("never-activated edges give zero coupling columns") {
    auto sys = network_system(8, 2, 40);
    sys.schedule.birth_times[7] = sys.schedule.horizon;
    gm::JointOptions opt;
    opt.mode = gm::ParameterPerturbation::absolute;
    const auto wj = gm::empirical_joint(sys, {}, opt);
    for (std::size_t i = 0; i < 7; ++i) {
        const std::size_t k = gramion::hypnet::parameter_index(i, 7, 8);
        for (std::size_t r = 0; r < 8; ++r) CHECK(std::abs(wj.wm(r, k)) <= 1e-10);
    }
    // Active edges do couple.
    CHECK(wj.wm.max_abs() > 1e-6);
}

TEST_CASE("relative parameter perturbation leaves absent edges unperturbed") {
    const auto sys = network_system(10, 2, 41);
    const auto wj = gm::empirical_joint(sys, {});
    for (std::size_t k = 0; k < sys.p(); ++k) {
        double col = 0.0;
        for (std::size_t r = 0; r < 10; ++r) col = std::max(col, std::abs(wj.wm(r, k)));
        if (sys.theta[k] == 0.0) {
            CHECK(col == 0.0);
        } else {
            CHECK(col > 0.0);
        }
    }
}

TEST_CASE("parallel and reference joint gramians agree") {
    const auto sys = network_system(10, 2, 42);
    gm::PerturbationScheme s;
    s.input_scales = {1.0, 0.5};
    for (auto mode : {gm::ParameterPerturbation::relative, gm::ParameterPerturbation::absolute}) {
        gm::JointOptions opt;
        opt.mode = mode;
        const auto fast = gm::empirical_joint(sys, s, opt);
        const auto slow = gm::reference::empirical_joint(sys, s, opt);
        CHECK(max_abs_diff(fast.wx, slow.wx) <= 1e-12 * slow.wx.max_abs());
        CHECK(max_abs_diff(fast.wm, slow.wm) <= 1e-12 * slow.wm.max_abs());
    }
}

TEST_CASE("joint gramian is deterministic") {
    const auto sys = network_system(12, 2, 43);
    const auto a = gm::empirical_joint(sys, {});
    const auto b = gm::empirical_joint(sys, {});
    CHECK(a.wx == b.wx);
    CHECK(a.wm == b.wm);
}
