#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "gramion/matrix.hpp"

namespace gramion::numerics {

/// Thin singular value decomposition m = u * diag(s) * vt.
///
/// For an r x c input with k = min(r, c): u is r x k with orthonormal
/// columns, s holds k nonnegative values in nonincreasing order, vt is k x c
/// with orthonormal rows. Each left singular vector is signed so that its
/// largest-magnitude entry (first one on ties) is positive.
struct SvdResult {
    Matrix u;
    std::vector<double> s;
    Matrix vt;
};

/// Eigen-decomposition of a symmetric matrix: m = vectors * diag(values) * vectors^T,
/// values ascending, eigenvectors in the columns of `vectors`.
struct SymmetricEigen {
    std::vector<double> values;
    Matrix vectors;
};

// ---------------------------------------------------------------------------
// Data-parallel kernels. The OpenMP versions partition work by output rows or
// columns only, so every output element is produced by the same sequence of
// floating point operations as in the serial reference: results are bitwise
// identical for any thread count.

Matrix matmul(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
/// a^T * b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

namespace reference {
/// Serial versions of the kernels above, kept for testing and benchmarking.
Matrix matmul(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
}  // namespace reference

// ---------------------------------------------------------------------------
// Factorizations and equation solvers.

/// One-sided (Hestenes) Jacobi SVD.
SvdResult svd(const Matrix& m);

/// SVD of a symmetric matrix through its eigen-decomposition: singular values
/// are |lambda|, u the eigenvectors, vt the eigenvectors signed by sign(lambda).
/// O(n^3) with a small constant; preferred for large symmetric inputs.
SvdResult svd_symmetric(const Matrix& m);

/// Householder tridiagonalization followed by implicit QL iteration.
SymmetricEigen symmetric_eigen(const Matrix& m);

/// Solves a * x = b by LU with partial pivoting.
Matrix solve_linear(const Matrix& a, const Matrix& b);

/// Lower-triangular l with l * l^T = m.
Matrix cholesky(const Matrix& m);

/// Solves a * w + w * b = c through the Kronecker-vectorized dense system
/// (I (x) a + b^T (x) I) vec(w) = vec(c). Intended for n * m up to a few thousand.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

/// Solves a * w + w * a^T = q and returns the symmetrized solution.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// sqrt(lambda_i(wo * wc)) in descending order, computed as the singular
/// values of lo^T * lc with wc = lc lc^T and wo = lo lo^T. Both gramians are
/// shifted by 1e-12 * trace / n before factorization.
std::vector<double> hankel_singular_values(const Matrix& wc, const Matrix& wo);

// ---------------------------------------------------------------------------
// Matrix CSV: first line "rows,cols", then one row per line, 17 significant digits.

void write_csv(std::ostream& out, const Matrix& m);
Matrix read_csv(std::istream& in);

}  // namespace gramion::numerics
