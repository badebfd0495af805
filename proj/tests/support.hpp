#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gramion/hypnet.hpp"
#include "gramion/matrix.hpp"
#include "gramion/numerics.hpp"
#include "gramion/rng.hpp"
#include "gramion/sysmodel.hpp"

namespace testing {

using gramion::Matrix;

inline Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    gramion::UniformSampler s(seed);
    Matrix m(r, c);
    for (double& v : m.data()) v = s.uniform(lo, hi);
    return m;
}

inline Matrix random_symmetric(std::size_t n, std::uint64_t seed) {
    Matrix m = random_matrix(n, n, seed);
    Matrix s = m + m.transpose();
    s *= 0.5;
    return s;
}

/// Q diag(-lambda) Q^T with lambda uniform in [lo, hi] and Q from a QR-free
/// orthogonalization (Gram-Schmidt on a random matrix).
inline Matrix random_stable_symmetric(std::size_t n, std::uint64_t seed, double lo = 0.5, double hi = 3.0) {
    Matrix q = random_matrix(n, n, seed);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double d = 0.0;
            for (std::size_t i = 0; i < n; ++i) d += q(i, j) * q(i, k);
            for (std::size_t i = 0; i < n; ++i) q(i, j) -= d * q(i, k);
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) nrm += q(i, j) * q(i, j);
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < n; ++i) q(i, j) /= nrm;
    }
    gramion::UniformSampler s(seed ^ 0x9e3779b97f4a7c15ULL);
    Matrix a(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lambda = -s.uniform(lo, hi);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) += q(i, k) * lambda * q(j, k);
    }
    Matrix sym = a + a.transpose();
    sym *= 0.5;
    return sym;
}

inline Matrix naive_product(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

inline double rel_fro(const Matrix& a, const Matrix& ref) {
    return (a - ref).frobenius_norm() / ref.frobenius_norm();
}

/// Time-invariant system with a given symmetric A: off-diagonals become the
/// parameters, the diagonal becomes the stabilization shift, all nodes exist
/// from t = 0.
inline gramion::sysmodel::LtvSystem lti_system(const Matrix& a, const Matrix& b, const Matrix& c, double dt,
                                               double horizon) {
    const std::size_t n = a.rows();
    gramion::sysmodel::LtvSystem sys;
    sys.n = n;
    sys.j_in = b.cols();
    sys.o_out = c.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) sys.theta.push_back(a(i, j));
    sys.b = b;
    sys.c = c;
    sys.x0.assign(n, 0.0);
    sys.schedule = gramion::sysmodel::ActivationSchedule::fixed(n, dt, horizon);
    for (std::size_t i = 0; i < n; ++i) sys.stabilization_shift.push_back(a(i, i));
    sys.validate();
    return sys;
}

inline gramion::sysmodel::LtvSystem scalar_system(double dt = 0.01, double horizon = 1.0) {
    return lti_system(Matrix::from_rows({{-1.0}}), Matrix::from_rows({{1.0}}), Matrix::from_rows({{1.0}}), dt,
                      horizon);
}

/// Growing network model with B, C uniform in [0, 1].
inline gramion::sysmodel::LtvSystem network_system(std::size_t n, std::size_t m, std::uint64_t seed,
                                                   double dt = 0.01, double horizon = 1.0) {
    const auto net = gramion::hypnet::generate({n, 1.0, seed});
    return gramion::sysmodel::make_system(gramion::hypnet::parameter_vector(net), n,
                                          random_matrix(n, m, seed + 100, 0.0, 1.0),
                                          random_matrix(m, n, seed + 200, 0.0, 1.0),
                                          gramion::sysmodel::ActivationSchedule::growing(n, dt, horizon));
}

}  // namespace testing
