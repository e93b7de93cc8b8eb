#include "piv/linalg.hpp"

#include "piv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace piv::linalg {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw Error(ErrorKind::InvalidArgument, what);
    }
}

[[noreturn]] void singular() {
    throw Error(ErrorKind::SingularDesign, "design matrix is singular to working precision");
}

// Row-reduces [a | rhs] in place; afterwards a is upper triangular (or the
// diagonal when gauss_jordan is set).
void eliminate(Matrix& a, Matrix& rhs, bool gauss_jordan) {
    const std::size_t n = a.rows();
    double largest = 0.0;
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::fabs(a(i, k)) > std::fabs(a(piv, k))) {
                piv = i;
            }
        }
        const double pivot = a(piv, k);
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            singular();
        }
        largest = std::max(largest, std::fabs(pivot));
        smallest = std::min(smallest, std::fabs(pivot));
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(k, j), a(piv, j));
            }
            for (std::size_t j = 0; j < rhs.cols(); ++j) {
                std::swap(rhs(k, j), rhs(piv, j));
            }
        }
        const std::size_t first = gauss_jordan ? 0 : k + 1;
        for (std::size_t i = first; i < n; ++i) {
            if (i == k) {
                continue;
            }
            const double f = a(i, k) / pivot;
            if (f == 0.0) {
                continue;
            }
            for (std::size_t j = k; j < n; ++j) {
                a(i, j) -= f * a(k, j);
            }
            for (std::size_t j = 0; j < rhs.cols(); ++j) {
                rhs(i, j) -= f * rhs(k, j);
            }
        }
    }
    if (smallest < kPivotTolerance * largest) {
        singular();
    }
}

} // namespace

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            t(j, i) = a(i, j);
        }
    }
    return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matrix product: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

std::vector<double> multiply(const Matrix& a, std::span<const double> x) {
    require(a.cols() == x.size(), "matrix-vector product: dimensions differ");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            y[i] += a(i, j) * x[j];
        }
    }
    return y;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix sum: shapes differ");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            c(i, j) = a(i, j) + b(i, j);
        }
    }
    return c;
}

std::vector<double> solve(Matrix a, std::vector<double> b) {
    require(a.rows() == a.cols() && a.rows() == b.size(), "solve: shapes differ");
    const std::size_t n = a.rows();
    Matrix rhs(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        rhs(i, 0) = b[i];
    }
    eliminate(a, rhs, false);
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = rhs(ii, 0);
        for (std::size_t j = ii + 1; j < n; ++j) {
            s -= a(ii, j) * x[j];
        }
        x[ii] = s / a(ii, ii);
    }
    return x;
}

Matrix inverse(const Matrix& a) {
    require(a.rows() == a.cols(), "inverse: matrix is not square");
    Matrix work = a;
    Matrix inv = Matrix::identity(a.rows());
    eliminate(work, inv, true);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double d = work(i, i);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            inv(i, j) /= d;
        }
    }
    return inv;
}

double max_abs(const Matrix& a) noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (double v : a.row(i)) {
            m = std::max(m, std::fabs(v));
        }
    }
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix difference: shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            m = std::max(m, std::fabs(a(i, j) - b(i, j)));
        }
    }
    return m;
}

} // namespace piv::linalg
