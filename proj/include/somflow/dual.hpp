#pragma once

#include <cmath>
#include <numbers>

namespace somflow {

/// First-order dual number for forward-mode differentiation.
/// (a + eps b)(c + eps d) = ac + eps(ad + bc); eps^2 = 0.
struct Dual {
    double primal = 0.0;
    double tangent = 0.0;

    constexpr Dual() = default;
    constexpr Dual(double p) : primal(p) {}
    constexpr Dual(double p, double t) : primal(p), tangent(t) {}
};

constexpr Dual operator+(Dual a, Dual b) { return {a.primal + b.primal, a.tangent + b.tangent}; }
constexpr Dual operator-(Dual a, Dual b) { return {a.primal - b.primal, a.tangent - b.tangent}; }
constexpr Dual operator-(Dual a) { return {-a.primal, -a.tangent}; }

constexpr Dual operator*(Dual a, Dual b) {
    return {a.primal * b.primal, a.primal * b.tangent + a.tangent * b.primal};
}

constexpr Dual operator/(Dual a, Dual b) {
    const double inv = 1.0 / b.primal;
    return {a.primal * inv, (a.tangent - a.primal * inv * b.tangent) * inv};
}

inline Dual exp(Dual a) {
    const double e = std::exp(a.primal);
    return {e, e * a.tangent};
}

inline Dual log(Dual a) { return {std::log(a.primal), a.tangent / a.primal}; }

inline Dual sqrt(Dual a) {
    const double r = std::sqrt(a.primal);
    return {r, 0.5 * a.tangent / r};
}

inline Dual erf(Dual a) {
    const double d = 2.0 / std::numbers::sqrt2 / std::sqrt(std::numbers::pi) *
                     std::exp(-a.primal * a.primal);
    return {std::erf(a.primal), d * a.tangent};
}

/// Exact (erf-based) GELU: x Phi(x).
inline double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
}

/// d/dx gelu = Phi(x) + x phi(x).
inline double gelu_derivative(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + x * pdf;
}

inline Dual gelu(Dual a) {
    return {gelu(a.primal), gelu_derivative(a.primal) * a.tangent};
}

}  // namespace somflow
