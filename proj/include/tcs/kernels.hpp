/// @file kernels.hpp
/// @brief Influence functions and aggregation potentials on the torus.
///
/// Influence functions are evaluated at a geodesic distance d in [0, 1/2].
/// Potential gradients are evaluated at a signed displacement in (-1/2, 1/2];
/// they are odd in the displacement, and the antipode 1/2 (its own inverse on T)
/// maps to zero.

#pragma once

#include <string>

namespace tcs {

/// Communication weight phi or zeta.
///
///  - unit:      phi = 1
///  - regular:   phi(d) = (1 + c d^2)^(-lambda/2)
///  - singular:  phi(d) = (eps^2 + c d^2)^(-lambda/2)
///
/// with c = 2^(2/lambda) - 1, so that the regular kernel drops to 1/2 at d = 1.
class InfluenceFn {
public:
    enum class Kind { unit, regular, singular };

    static InfluenceFn unit();
    static InfluenceFn regular(double lambda);
    static InfluenceFn singular(double lambda, double eps);

    double operator()(double d) const noexcept;

    Kind kind() const noexcept { return kind_; }
    double lambda() const noexcept { return lambda_; }
    double eps() const noexcept { return eps_; }
    double coefficient() const noexcept { return c_; }
    /// Value at the origin, which is also the sup norm.
    double sup() const noexcept { return (*this)(0.0); }
    std::string describe() const;

private:
    InfluenceFn(Kind kind, double lambda, double eps);

    Kind kind_ = Kind::unit;
    double lambda_ = 0.0;
    double eps_ = 0.0;
    double c_ = 0.0;
    double base_ = 1.0;  // 1 for regular, eps^2 for singular
};

/// c_lambda = 2^(2/lambda) - 1.
double influence_coefficient(double lambda);

/// Smooth cutoff: 1 on [0, 1/6], 0 on [1/3, inf), C-infinity in between.
double bump(double r) noexcept;
double bump_derivative(double r) noexcept;

/// Aggregation potential W together with its gradient.
///
///  - none:                W = 0
///  - periodic_log_bump:   W(x) = eta(|x|) (log(1+|x|^2)/2 - log(5/4)/2)
///  - cucker_dong:         (1 + c|x|^2)^((1-l)/2) / ((1-l) sqrt c), or log(1+c|x|^2)/(2 sqrt c) at l = 1
///  - cucker_dong_scaled:  the same with 1 replaced by eps^2
///
/// The Cucker-Dong family is restricted to the fundamental cell (-1/2, 1/2].
class AggregationPotential {
public:
    enum class Kind { none, periodic_log_bump, cucker_dong, cucker_dong_scaled };

    static AggregationPotential none();
    static AggregationPotential periodic_log_bump();
    static AggregationPotential cucker_dong(double lambda3);
    static AggregationPotential cucker_dong_scaled(double lambda3, double eps);

    double value(double disp) const noexcept;
    double gradient(double disp) const noexcept;

    Kind kind() const noexcept { return kind_; }
    double lambda() const noexcept { return lambda_; }
    double eps() const noexcept { return eps_; }
    bool is_zero() const noexcept { return kind_ == Kind::none; }
    /// max |W'| over the torus, sampled on a fine grid.
    double gradient_sup() const;
    std::string describe() const;

private:
    AggregationPotential(Kind kind, double lambda, double eps);

    Kind kind_ = Kind::none;
    double lambda_ = 0.0;
    double eps_ = 0.0;
    double c_ = 0.0;
    double base_ = 1.0;
};

}  // namespace tcs
