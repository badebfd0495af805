#include <omp.h>

#include "gramion/error.hpp"
#include "gramion/numerics.hpp"

namespace gramion::numerics {

namespace {

void check_product(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ValidationError("matmul dimension mismatch: " + a.shape() + " * " + b.shape());
    }
}

// i-k-j ordering: the inner loop streams a row of b into a row of the result.
inline void product_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    auto out = c.row(i);
    const auto arow = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
        const double aik = arow[k];
        if (aik == 0.0) continue;
        const auto brow = b.row(k);
        for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
    }
}

inline double dot_row(const Matrix& a, std::size_t i, std::span<const double> x) {
    const auto arow = a.row(i);
    double s = 0.0;
    for (std::size_t k = 0; k < arow.size(); ++k) s += arow[k] * x[k];
    return s;
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_product(a, b);
    Matrix c(a.rows(), b.cols());
    const auto rows = static_cast<std::ptrdiff_t>(a.rows());
    const bool big = a.rows() * a.cols() * b.cols() > 32768;
#pragma omp parallel for schedule(static) if (big)
    for (std::ptrdiff_t i = 0; i < rows; ++i) product_row(a, b, c, static_cast<std::size_t>(i));
    return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) {
        throw ValidationError("matvec dimension mismatch: " + a.shape() + " * " +
                              std::to_string(x.size()));
    }
    std::vector<double> y(a.rows());
    const auto rows = static_cast<std::ptrdiff_t>(a.rows());
    const bool big = a.size() > 65536;
#pragma omp parallel for schedule(static) if (big)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
        y[static_cast<std::size_t>(i)] = dot_row(a, static_cast<std::size_t>(i), x);
    return y;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ValidationError("matmul_tn dimension mismatch: " + a.shape() + "^T * " + b.shape());
    }
    Matrix c(a.cols(), b.cols());
    const auto rows = static_cast<std::ptrdiff_t>(a.cols());
    const bool big = a.rows() * a.cols() * b.cols() > 32768;
#pragma omp parallel for schedule(static) if (big)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        auto out = c.row(i);
        for (std::size_t k = 0; k < a.rows(); ++k) {
            const double aki = a(k, i);
            if (aki == 0.0) continue;
            const auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aki * brow[j];
        }
    }
    return c;
}

namespace reference {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_product(a, b);
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) product_row(a, b, c, i);
    return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) {
        throw ValidationError("matvec dimension mismatch: " + a.shape() + " * " +
                              std::to_string(x.size()));
    }
    std::vector<double> y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot_row(a, i, x);
    return y;
}

}  // namespace reference

}  // namespace gramion::numerics
