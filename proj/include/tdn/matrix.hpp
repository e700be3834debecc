#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tdn/errors.hpp"

namespace tdn {

/// Dense row-major matrix of doubles. Small and deliberately simple: the
/// networks in this project are desk-scale, and keeping the arithmetic in
/// plain loops makes run-to-run determinism easy to reason about.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }
    std::span<const double> row_span(std::size_t r) const { return {row(r), cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline void require_shape(const Matrix& m, std::size_t rows, std::size_t cols,
                          const std::string& what) {
    if (m.rows() != rows || m.cols() != cols)
        throw ShapeError(what + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
}

/// C = A * B^T.  A is n x k, B is m x k, C is n x m. Both operands are
/// traversed row-wise, so this is the cache-friendly product for forward
/// passes (activations times weight^T).
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw ShapeError("matmul_nt: inner dims " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()));
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* bj = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += ai[k] * bj[k];
            ci[j] = acc;
        }
    }
    return c;
}

/// C = A^T * B.  A is n x m, B is n x k, C is m x k (gradient accumulation).
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw ShapeError("matmul_tn: row counts " + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()));
    Matrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        const double* bi = b.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double v = ai[j];
            if (v == 0.0) continue;
            double* cj = c.row(j);
            for (std::size_t k = 0; k < b.cols(); ++k) cj[k] += v * bi[k];
        }
    }
    return c;
}

/// C = A * B.  A is n x m, B is m x k, C is n x k.
inline Matrix matmul_nn(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul_nn: inner dims " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()));
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double v = ai[j];
            if (v == 0.0) continue;
            const double* bj = b.row(j);
            for (std::size_t k = 0; k < b.cols(); ++k) ci[k] += v * bj[k];
        }
    }
    return c;
}

inline std::vector<double> column_means(const Matrix& m) {
    std::vector<double> mu(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* ri = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) mu[j] += ri[j];
    }
    for (double& v : mu) v /= static_cast<double>(m.rows());
    return mu;
}

inline std::vector<double> column_stddevs(const Matrix& m, const std::vector<double>& mu) {
    std::vector<double> sd(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* ri = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double d = ri[j] - mu[j];
            sd[j] += d * d;
        }
    }
    for (double& v : sd) v = std::sqrt(v / static_cast<double>(m.rows()));
    return sd;
}

} // namespace tdn
