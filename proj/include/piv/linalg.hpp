#pragma once

// Small dense linear algebra for the least-squares oracle. Sizes stay below
// 16x16 so plain Gaussian elimination is enough.

#include <cstddef>
#include <span>
#include <vector>

namespace piv::linalg {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data_).subspan(i * cols_, cols_);
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix transpose(const Matrix& a);
Matrix multiply(const Matrix& a, const Matrix& b);
std::vector<double> multiply(const Matrix& a, std::span<const double> x);
Matrix add(const Matrix& a, const Matrix& b);

// Relative pivot floor: elimination fails with Error(SingularDesign) when the
// smallest pivot falls below this fraction of the largest.
inline constexpr double kPivotTolerance = 1e-10;

// Solves a x = b by Gaussian elimination with partial pivoting.
std::vector<double> solve(Matrix a, std::vector<double> b);

// Gauss-Jordan inverse with partial pivoting.
Matrix inverse(const Matrix& a);

double max_abs(const Matrix& a) noexcept;
double max_abs_diff(const Matrix& a, const Matrix& b);

} // namespace piv::linalg
