#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gramion/error.hpp"
#include "gramion/numerics.hpp"

namespace gramion::numerics {

namespace {

constexpr int kMaxQlIterations = 60;

struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;  // off[i] couples i and i+1; off[n-1] == 0
    Matrix z;                 // rows are the columns of the accumulated transform
};

// Householder reduction of a symmetric matrix, row-major friendly: every
// update touches whole contiguous rows of the trailing block.
Tridiagonal tridiagonalize(const Matrix& m) {
    const std::size_t n = m.rows();
    Matrix w = m;
    Tridiagonal t{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), Matrix()};
    std::vector<std::vector<double>> reflectors(n > 2 ? n - 2 : 0);
    std::vector<double> betas(reflectors.size(), 0.0);

    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t len = n - k - 1;
        std::vector<double> v(w.row(k).begin() + static_cast<std::ptrdiff_t>(k + 1), w.row(k).end());
        t.diag[k] = w(k, k);
        // Work with v / max|v| so columns that have decayed towards the
        // underflow range still give a finite reflector.
        double scale = 0.0;
        for (std::size_t i = 1; i < len; ++i) scale = std::max(scale, std::abs(v[i]));
        if (scale == 0.0) {
            t.off[k] = v[0];
            continue;
        }
        scale = std::max(scale, std::abs(v[0]));
        for (double& x : v) x /= scale;
        double tail = 0.0;
        for (std::size_t i = 1; i < len; ++i) tail += v[i] * v[i];
        const double norm = std::sqrt(v[0] * v[0] + tail);
        const double alpha = v[0] > 0.0 ? -norm : norm;
        v[0] -= alpha;
        const double beta = 2.0 / (v[0] * v[0] + tail);
        t.off[k] = alpha * scale;

        // p = beta * S v, with S the trailing block.
        std::vector<double> p(len, 0.0);
        const auto first = static_cast<std::ptrdiff_t>(0);
        const auto last = static_cast<std::ptrdiff_t>(len);
        const bool big = len > 256;
#pragma omp parallel for schedule(static) if (big)
        for (std::ptrdiff_t ii = first; ii < last; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            const auto row = w.row(k + 1 + i);
            double s = 0.0;
            for (std::size_t j = 0; j < len; ++j) s += row[k + 1 + j] * v[j];
            p[i] = beta * s;
        }
        double ptv = 0.0;
        for (std::size_t i = 0; i < len; ++i) ptv += p[i] * v[i];
        const double kfac = 0.5 * beta * ptv;
        for (std::size_t i = 0; i < len; ++i) p[i] -= kfac * v[i];
        // S -= v p^T + p v^T
#pragma omp parallel for schedule(static) if (big)
        for (std::ptrdiff_t ii = first; ii < last; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            auto row = w.row(k + 1 + i);
            const double vi = v[i];
            const double pi = p[i];
            for (std::size_t j = 0; j < len; ++j) row[k + 1 + j] -= vi * p[j] + pi * v[j];
        }
        reflectors[k] = std::move(v);
        betas[k] = beta;
    }
    if (n >= 2) {
        t.diag[n - 2] = w(n - 2, n - 2);
        t.off[n - 2] = w(n - 2, n - 1);
    }
    if (n >= 1) t.diag[n - 1] = w(n - 1, n - 1);

    // Q = H_0 H_1 ... H_{n-3}, accumulated backwards so each reflector only
    // touches the trailing block that is not yet the identity.
    Matrix q = Matrix::identity(n);
    for (std::size_t kk = reflectors.size(); kk-- > 0;) {
        if (betas[kk] == 0.0) continue;
        const auto& v = reflectors[kk];
        const std::size_t off = kk + 1;
        const std::size_t len = n - off;
        std::vector<double> z(len, 0.0);
        for (std::size_t i = 0; i < len; ++i) {
            const double vi = v[i];
            if (vi == 0.0) continue;
            const auto row = q.row(off + i);
            for (std::size_t j = 0; j < len; ++j) z[j] += vi * row[off + j];
        }
        const double beta = betas[kk];
        for (std::size_t i = 0; i < len; ++i) {
            const double f = beta * v[i];
            if (f == 0.0) continue;
            auto row = q.row(off + i);
            for (std::size_t j = 0; j < len; ++j) row[off + j] -= f * z[j];
        }
    }
    t.z = q.transpose();
    return t;
}

// Implicit QL with Wilkinson-type shifts; rotations are applied to rows of z.
void ql_implicit(Tridiagonal& t) {
    auto& d = t.diag;
    auto& e = t.off;
    const std::size_t n = d.size();
    const double eps = std::numeric_limits<double>::epsilon();
    // Deflation threshold: relative to the neighbouring diagonal, or to the
    // norm of the whole tridiagonal (zero diagonal pairs never pass the first).
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm = std::max(norm, std::abs(d[i]) + std::abs(e[i]));
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m = l;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd || std::abs(e[m]) <= eps * norm) break;
            }
            if (m == l) break;
            if (iter++ == kMaxQlIterations) {
                throw NumericalError("symmetric_eigen: QL iteration did not converge for eigenvalue " +
                                     std::to_string(l) + " after " +
                                     std::to_string(kMaxQlIterations) + " iterations");
            }
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0;
            double c = 1.0;
            double p = 0.0;
            bool underflow = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                auto zi = t.z.row(i);
                auto zi1 = t.z.row(i + 1);
                for (std::size_t k = 0; k < n; ++k) {
                    f = zi1[k];
                    zi1[k] = s * zi[k] + c * f;
                    zi[k] = c * zi[k] - s * f;
                }
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (m != l);
    }
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& m) {
    if (!m.square()) throw ValidationError("symmetric_eigen needs a square matrix, got " + m.shape());
    if (!m.all_finite()) throw ValidationError("symmetric_eigen input is not finite");
    const std::size_t n = m.rows();
    const double scale = m.max_abs();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-10 * scale)
                throw ValidationError("symmetric_eigen input is not symmetric at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
    Tridiagonal t = tridiagonalize(m);
    ql_implicit(t);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return t.diag[a] < t.diag[b]; });
    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = t.diag[order[k]];
        const auto zr = t.z.row(order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = zr[i];
    }
    return out;
}

SvdResult svd_symmetric(const Matrix& m) {
    SymmetricEigen eig = symmetric_eigen(m);
    const std::size_t n = eig.values.size();
    // Descending |lambda|; eigenpairs arrive in ascending lambda order, the
    // stable sort keeps that order among equal magnitudes.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(eig.values[a]) > std::abs(eig.values[b]);
    });
    SvdResult r{Matrix(n, n), std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        const double lambda = eig.values[j];
        const double sign = lambda < 0.0 ? -1.0 : 1.0;
        r.s[k] = std::abs(lambda);
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(eig.vectors(i, j)) > best) {
                best = std::abs(eig.vectors(i, j));
                arg = i;
            }
        }
        const double flip = eig.vectors(arg, j) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            r.u(i, k) = flip * eig.vectors(i, j);
            r.vt(k, i) = flip * sign * eig.vectors(i, j);
        }
    }
    return r;
}

}  // namespace gramion::numerics
