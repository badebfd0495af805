#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "gramion/error.hpp"
#include "gramion/numerics.hpp"

namespace gramion::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxJacobiSweeps = 80;

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
    return s;
}

// Rebuilds an orthonormal set in place, processing columns in order. A column
// that collapses under projection (zero singular value) is replaced by the
// first standard basis vector that survives orthogonalization.
void orthonormalize_columns(std::vector<std::vector<double>>& cols, std::size_t dim) {
    std::size_t next_basis = 0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        auto project_out = [&](std::vector<double>& v) {
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t i = 0; i < j; ++i) {
                    const double h = dot(cols[i], v);
                    for (std::size_t k = 0; k < dim; ++k) v[k] -= h * cols[i][k];
                }
            }
            return std::sqrt(dot(v, v));
        };
        std::vector<double> v = cols[j];
        double norm = project_out(v);
        while (!(norm > 0.5)) {
            if (next_basis >= dim) throw NumericalError("svd: could not complete orthonormal basis");
            v.assign(dim, 0.0);
            v[next_basis++] = 1.0;
            norm = project_out(v);
        }
        for (double& x : v) x /= norm;
        cols[j] = std::move(v);
    }
}

// Flip each (u column, vt row) pair so the largest-magnitude entry of the u
// column is positive.
void normalize_signs(SvdResult& r) {
    for (std::size_t j = 0; j < r.s.size(); ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < r.u.rows(); ++i) {
            const double a = std::abs(r.u(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (r.u(arg, j) < 0.0) {
            for (std::size_t i = 0; i < r.u.rows(); ++i) r.u(i, j) = -r.u(i, j);
            for (double& v : r.vt.row(j)) v = -v;
        }
    }
}

// Jacobi SVD for rows >= cols. Works on column-major copies so that the
// rotations stream through contiguous memory.
SvdResult svd_tall(const Matrix& m) {
    const std::size_t rows = m.rows();
    const std::size_t n = m.cols();
    std::vector<std::vector<double>> a(n, std::vector<double>(rows));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < n; ++j) a[j][i] = m(i, j);
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

    const double tol = kEps * static_cast<double>(std::max<std::size_t>(rows, 1));
    bool converged = n < 2;
    int sweep = 0;
    for (; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double alpha = dot(a[p], a[p]);
                const double beta = dot(a[q], a[q]);
                const double gamma = dot(a[p], a[q]);
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::hypot(1.0, t);
                const double s = c * t;
                auto rotate = [c, s](std::vector<double>& x, std::vector<double>& y) {
                    for (std::size_t k = 0; k < x.size(); ++k) {
                        const double xp = x[k];
                        const double yq = y[k];
                        x[k] = c * xp - s * yq;
                        y[k] = s * xp + c * yq;
                    }
                };
                rotate(a[p], a[q]);
                rotate(v[p], v[q]);
            }
        }
        converged = !rotated;
    }
    if (!converged) {
        throw NumericalError("svd: Jacobi iteration did not converge after " +
                             std::to_string(sweep) + " sweeps");
    }

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(dot(a[j], a[j]));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    std::vector<std::vector<double>> ucols(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        ucols[k] = a[j];
        if (sigma[j] > 0.0)
            for (double& x : ucols[k]) x /= sigma[j];
        else
            std::fill(ucols[k].begin(), ucols[k].end(), 0.0);
    }
    orthonormalize_columns(ucols, rows);

    SvdResult r{Matrix(rows, n), std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        r.s[k] = sigma[j];
        for (std::size_t i = 0; i < rows; ++i) r.u(i, k) = ucols[k][i];
        for (std::size_t i = 0; i < n; ++i) r.vt(k, i) = v[j][i];
    }
    return r;
}

void require_square(const Matrix& m, const char* what) {
    if (!m.square()) throw ValidationError(std::string(what) + " needs a square matrix, got " + m.shape());
}

// LU with partial pivoting on a dense copy; overwrites rhs with the solution.
void lu_solve_inplace(Matrix a, Matrix& rhs) {
    const std::size_t n = a.rows();
    const double scale = std::max(a.max_abs(), std::numeric_limits<double>::min());
    const double pivot_floor = kEps * static_cast<double>(n) * scale;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (!(best > pivot_floor)) {
            std::ostringstream msg;
            msg << "matrix is singular to working precision: pivot " << k << " has magnitude "
                << std::setprecision(3) << best;
            throw NumericalError(msg.str());
        }
        if (piv != k) {
            std::swap_ranges(a.row(k).begin(), a.row(k).end(), a.row(piv).begin());
            std::swap_ranges(rhs.row(k).begin(), rhs.row(k).end(), rhs.row(piv).begin());
        }
        const auto pivot_row = a.row(k);
        const auto rhs_pivot = rhs.row(k);
        const double inv = 1.0 / pivot_row[k];
        const auto first = static_cast<std::ptrdiff_t>(k + 1);
        const auto last = static_cast<std::ptrdiff_t>(n);
        const bool big = (n - k) * (n - k) > 16384;
#pragma omp parallel for schedule(static) if (big)
        for (std::ptrdiff_t ii = first; ii < last; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            auto row = a.row(i);
            const double f = row[k] * inv;
            if (f == 0.0) continue;
            row[k] = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) row[j] -= f * pivot_row[j];
            auto r = rhs.row(i);
            for (std::size_t j = 0; j < r.size(); ++j) r[j] -= f * rhs_pivot[j];
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        auto r = rhs.row(kk);
        for (std::size_t j = kk + 1; j < n; ++j) {
            const double f = a(kk, j);
            if (f == 0.0) continue;
            const auto done = rhs.row(j);
            for (std::size_t c = 0; c < r.size(); ++c) r[c] -= f * done[c];
        }
        const double inv = 1.0 / a(kk, kk);
        for (double& x : r) x *= inv;
    }
}

}  // namespace

SvdResult svd(const Matrix& m) {
    if (!m.all_finite()) throw ValidationError("svd input " + m.shape() + " is not finite");
    SvdResult r;
    if (m.rows() >= m.cols()) {
        r = svd_tall(m);
    } else {
        SvdResult t = svd_tall(m.transpose());
        r = SvdResult{t.vt.transpose(), std::move(t.s), t.u.transpose()};
    }
    normalize_signs(r);
    return r;
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
    require_square(a, "solve_linear");
    if (b.rows() != a.rows()) {
        throw ValidationError("solve_linear dimension mismatch: " + a.shape() + " \\ " + b.shape());
    }
    Matrix x = b;
    lu_solve_inplace(a, x);
    return x;
}

Matrix cholesky(const Matrix& m) {
    require_square(m, "cholesky");
    const std::size_t n = m.rows();
    const double scale = m.max_abs();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale)
                throw ValidationError("cholesky input is not symmetric at (" + std::to_string(i) +
                                      "," + std::to_string(j) + ")");
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) {
            throw NumericalError("cholesky: matrix is not positive definite (leading minor " +
                                 std::to_string(j + 1) + ")");
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
    require_square(a, "solve_sylvester");
    require_square(b, "solve_sylvester");
    const std::size_t n = a.rows();
    const std::size_t m = b.rows();
    if (c.rows() != n || c.cols() != m) {
        throw ValidationError("solve_sylvester: c must be " + std::to_string(n) + "x" +
                              std::to_string(m) + ", got " + c.shape());
    }
    // Unknown index for w(i, j) is i + n * j (column-major vec).
    const std::size_t dim = n * m;
    Matrix k(dim, dim);
    Matrix rhs(dim, 1);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t row = i + n * j;
            rhs(row, 0) = c(i, j);
            for (std::size_t p = 0; p < n; ++p) k(row, p + n * j) += a(i, p);
            for (std::size_t l = 0; l < m; ++l) k(row, i + n * l) += b(l, j);
        }
    }
    try {
        lu_solve_inplace(std::move(k), rhs);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("solve_sylvester: spectra of a and -b overlap (") +
                             e.what() + ")");
    }
    Matrix w(n, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) w(i, j) = rhs(i + n * j, 0);
    return w;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
    Matrix w = solve_sylvester(a, a.transpose(), q);
    const std::size_t n = w.rows();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double s = 0.5 * (w(i, j) + w(j, i));
            w(i, j) = s;
            w(j, i) = s;
        }
    }
    return w;
}

std::vector<double> hankel_singular_values(const Matrix& wc, const Matrix& wo) {
    require_square(wc, "hankel_singular_values");
    if (wo.rows() != wc.rows() || !wo.square()) {
        throw ValidationError("hankel_singular_values: gramian orders differ: " + wc.shape() +
                              " vs " + wo.shape());
    }
    const std::size_t n = wc.rows();
    auto regularized = [n](const Matrix& w) {
        Matrix r = w;
        const double eps = 1e-12 * std::abs(w.trace()) / static_cast<double>(std::max<std::size_t>(n, 1));
        for (std::size_t i = 0; i < n; ++i) r(i, i) += eps;
        return r;
    };
    const Matrix lc = cholesky(regularized(wc));
    const Matrix lo = cholesky(regularized(wo));
    return svd(matmul_tn(lo, lc)).s;
}

void write_csv(std::ostream& out, const Matrix& m) {
    out << m.rows() << ',' << m.cols() << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
}

Matrix read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("matrix csv: missing header line");
    std::size_t rows = 0;
    std::size_t cols = 0;
    {
        std::istringstream header(line);
        char comma = 0;
        if (!(header >> rows >> comma >> cols) || comma != ',')
            throw IoError("matrix csv: malformed header '" + line + "'");
    }
    std::vector<double> entries;
    entries.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
            throw IoError("matrix csv: expected " + std::to_string(rows) + " rows, got " +
                          std::to_string(i));
        std::istringstream row(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(row, cell, ',')) {
            try {
                std::size_t used = 0;
                entries.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw IoError("matrix csv: bad number '" + cell + "' in row " + std::to_string(i));
            }
            ++count;
        }
        if (count != cols)
            throw IoError("matrix csv: row " + std::to_string(i) + " has " + std::to_string(count) +
                          " entries, expected " + std::to_string(cols));
    }
    return Matrix(rows, cols, std::move(entries));
}

}  // namespace gramion::numerics
