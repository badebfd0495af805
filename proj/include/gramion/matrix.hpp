#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gramion {

/// Dense, row-major matrix of doubles.
///
/// Constructing from an entry sequence rejects NaN/Inf. Element access is
/// unchecked; kernels that write through operator() are responsible for
/// keeping the entries finite.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> values);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix column(std::span<const double> values);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }
    [[nodiscard]] std::string shape() const;

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<double> row(std::size_t i) noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] Matrix block(std::size_t row0, std::size_t col0, std::size_t nrows,
                               std::size_t ncols) const;
    [[nodiscard]] std::vector<double> column_copy(std::size_t j) const;

    [[nodiscard]] bool all_finite() const noexcept;
    [[nodiscard]] double max_abs() const noexcept;
    [[nodiscard]] double frobenius_norm() const noexcept;
    [[nodiscard]] double trace() const noexcept;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double factor) noexcept;

    friend Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
    friend Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
    friend Matrix operator*(Matrix lhs, double factor) { return lhs *= factor; }
    friend Matrix operator*(double factor, Matrix rhs) { return rhs *= factor; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Horizontal concatenation [left | right]; row counts must agree.
Matrix hconcat(const Matrix& left, const Matrix& right);
/// Vertical concatenation [top; bottom]; column counts must agree.
Matrix vconcat(const Matrix& top, const Matrix& bottom);

/// Largest absolute entrywise difference.
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace gramion
