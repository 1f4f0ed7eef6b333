/// @file torus.hpp
/// @brief Arithmetic on the one-dimensional torus T = [0,1) with endpoints identified.

#pragma once

#include <cmath>

namespace tcs {

/// Canonical representative in [0,1).
inline double wrap_unit(double a) noexcept {
    double r = a - std::floor(a);
    // a slightly negative input can round up to exactly 1.0
    return r >= 1.0 ? 0.0 : r;
}

/// Signed displacement a - b reduced to (-1/2, 1/2].
inline double torus_displacement(double a, double b) noexcept {
    const double d = a - b;
    return d - std::ceil(d - 0.5);
}

/// A point of T stored by its representative in [0,1).
class TorusPoint {
public:
    constexpr TorusPoint() = default;
    explicit TorusPoint(double a) noexcept : a_(wrap_unit(a)) {}

    double value() const noexcept { return a_; }

    friend TorusPoint operator+(TorusPoint x, TorusPoint y) noexcept { return TorusPoint(x.a_ + y.a_); }
    friend TorusPoint operator-(TorusPoint x) noexcept { return TorusPoint(-x.a_); }
    friend TorusPoint operator-(TorusPoint x, TorusPoint y) noexcept { return TorusPoint(x.a_ - y.a_); }
    friend bool operator==(TorusPoint x, TorusPoint y) noexcept { return x.a_ == y.a_; }

private:
    double a_ = 0.0;
};

/// Geodesic distance |a - b + n| with n chosen so that a - b + n lies in (-1/2, 1/2].
inline double torus_dist(TorusPoint x, TorusPoint y) noexcept {
    return std::abs(torus_displacement(x.value(), y.value()));
}

inline double torus_dist(double a, double b) noexcept { return std::abs(torus_displacement(a, b)); }

}  // namespace tcs
