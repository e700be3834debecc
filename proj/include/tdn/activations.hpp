#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "tdn/errors.hpp"

namespace tdn {

/// The five activation kinds used throughout the project. Values are part of
/// the model file format; do not reorder.
enum class Activation : std::uint8_t {
    Affine = 0,   // x
    Square = 1,   // x^2
    Sigmoid = 2,  // 1 / (1 + e^-x)
    Gaussian = 3, // 1 - e^{-x^2}
    Tanh = 4,     // (e^x - e^-x) / (e^x + e^-x)
};

inline double activate(Activation a, double x) {
    switch (a) {
        case Activation::Affine: return x;
        case Activation::Square: return x * x;
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Activation::Gaussian: return 1.0 - std::exp(-x * x);
        case Activation::Tanh: return std::tanh(x);
    }
    throw ConfigError("unknown activation tag");
}

/// Analytic derivative evaluated at the pre-activation value.
inline double activate_deriv(Activation a, double x) {
    switch (a) {
        case Activation::Affine: return 1.0;
        case Activation::Square: return 2.0 * x;
        case Activation::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 - s);
        }
        case Activation::Gaussian: return 2.0 * x * std::exp(-x * x);
        case Activation::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
    }
    throw ConfigError("unknown activation tag");
}

inline std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Affine: return "affine";
        case Activation::Square: return "square";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Gaussian: return "gaussian";
        case Activation::Tanh: return "tanh";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "affine") return Activation::Affine;
    if (s == "square") return Activation::Square;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "gaussian") return Activation::Gaussian;
    if (s == "tanh") return Activation::Tanh;
    throw ConfigError("unknown activation name: " + s);
}

} // namespace tdn
