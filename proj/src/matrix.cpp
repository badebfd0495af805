#include "gramion/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "gramion/error.hpp"

namespace gramion {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw ValidationError("matrix " + shape() + " needs " + std::to_string(rows_ * cols_) +
                              " entries, got " + std::to_string(data_.size()));
    }
    if (!all_finite()) {
        throw ValidationError("matrix " + shape() + " contains non-finite entries");
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t nrows = rows.size();
    const std::size_t ncols = nrows == 0 ? 0 : rows.begin()->size();
    std::vector<double> entries;
    entries.reserve(nrows * ncols);
    for (const auto& r : rows) {
        if (r.size() != ncols) throw ValidationError("ragged matrix literal");
        entries.insert(entries.end(), r.begin(), r.end());
    }
    return Matrix(nrows, ncols, std::move(entries));
}

Matrix Matrix::column(std::span<const double> values) {
    return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

std::string Matrix::shape() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::block(std::size_t row0, std::size_t col0, std::size_t nrows,
                     std::size_t ncols) const {
    if (row0 + nrows > rows_ || col0 + ncols > cols_) {
        throw ValidationError("block out of range of " + shape());
    }
    Matrix b(nrows, ncols);
    for (std::size_t i = 0; i < nrows; ++i)
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((row0 + i) * cols_ + col0), ncols,
                    b.data_.begin() + static_cast<std::ptrdiff_t>(i * ncols));
    return b;
}

std::vector<double> Matrix::column_copy(std::size_t j) const {
    std::vector<double> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double Matrix::frobenius_norm() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Matrix::trace() const noexcept {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw ValidationError("cannot add " + other.shape() + " to " + shape());
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw ValidationError("cannot subtract " + other.shape() + " from " + shape());
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double factor) noexcept {
    for (double& v : data_) v *= factor;
    return *this;
}

Matrix hconcat(const Matrix& left, const Matrix& right) {
    if (left.rows() != right.rows())
        throw ValidationError("hconcat row mismatch: " + left.shape() + " | " + right.shape());
    Matrix m(left.rows(), left.cols() + right.cols());
    for (std::size_t i = 0; i < left.rows(); ++i) {
        auto dst = m.row(i);
        std::copy(left.row(i).begin(), left.row(i).end(), dst.begin());
        std::copy(right.row(i).begin(), right.row(i).end(), dst.begin() + static_cast<std::ptrdiff_t>(left.cols()));
    }
    return m;
}

Matrix vconcat(const Matrix& top, const Matrix& bottom) {
    if (top.cols() != bottom.cols())
        throw ValidationError("vconcat column mismatch: " + top.shape() + " / " + bottom.shape());
    Matrix m(top.rows() + bottom.rows(), top.cols());
    std::copy(top.data().begin(), top.data().end(), m.data().begin());
    std::copy(bottom.data().begin(), bottom.data().end(),
              m.data().begin() + static_cast<std::ptrdiff_t>(top.size()));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("max_abs_diff shape mismatch: " + a.shape() + " vs " + b.shape());
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

}  // namespace gramion
