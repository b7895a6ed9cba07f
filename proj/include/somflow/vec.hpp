#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace somflow {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec operator+(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec operator-(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec operator*(double c, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

inline bool all_finite(const Vec& a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

inline Vec clamp(const Vec& a, double lo, double hi) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = std::min(hi, std::max(lo, a[i]));
    return r;
}

}  // namespace somflow
