#pragma once

#include <string>
#include <vector>

#include "tdn/matrix.hpp"

namespace tdn {

/// Per-column standardization fitted on the normal training data only.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> std;

    std::size_t dim() const { return mean.size(); }
};

inline Scaler fit_scaler(const Matrix& data) {
    if (data.rows() == 0 || data.cols() == 0) throw DataError("fit_scaler: empty data");
    Scaler s;
    s.mean = column_means(data);
    s.std = column_stddevs(data, s.mean);
    for (std::size_t j = 0; j < s.std.size(); ++j)
        if (s.std[j] <= 0.0)
            throw ConfigError("fit_scaler: column " + std::to_string(j + 1) +
                              " has zero variance");
    return s;
}

inline Matrix apply_scaler(const Scaler& s, const Matrix& z) {
    if (z.cols() != s.dim()) throw ShapeError("apply_scaler: column count mismatch");
    Matrix out(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j)
            out(i, j) = (z(i, j) - s.mean[j]) / s.std[j];
    return out;
}

inline Matrix invert_scaler(const Scaler& s, const Matrix& z) {
    if (z.cols() != s.dim()) throw ShapeError("invert_scaler: column count mismatch");
    Matrix out(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j)
            out(i, j) = z(i, j) * s.std[j] + s.mean[j];
    return out;
}

/// Scale an additive quantity (a fault signal) without re-centering.
inline Matrix scale_additive(const Scaler& s, const Matrix& f) {
    if (f.cols() != s.dim()) throw ShapeError("scale_additive: column count mismatch");
    Matrix out(f.rows(), f.cols());
    for (std::size_t i = 0; i < f.rows(); ++i)
        for (std::size_t j = 0; j < f.cols(); ++j) out(i, j) = f(i, j) / s.std[j];
    return out;
}

} // namespace tdn
