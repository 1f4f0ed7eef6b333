#include "tcs/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tcs/errors.hpp"

namespace tcs {

double influence_coefficient(double lambda) { return std::exp2(2.0 / lambda) - 1.0; }

InfluenceFn::InfluenceFn(Kind kind, double lambda, double eps) : kind_(kind), lambda_(lambda), eps_(eps) {
    if (kind_ == Kind::unit) return;
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) throw ConfigError("influence function: lambda must be positive");
    c_ = influence_coefficient(lambda_);
    if (kind_ == Kind::singular) {
        if (!(eps_ > 0.0) || !std::isfinite(eps_)) throw ConfigError("singular influence function: epsilon must be positive");
        base_ = eps_ * eps_;
    }
}

InfluenceFn InfluenceFn::unit() { return InfluenceFn(Kind::unit, 0.0, 0.0); }
InfluenceFn InfluenceFn::regular(double lambda) { return InfluenceFn(Kind::regular, lambda, 0.0); }
InfluenceFn InfluenceFn::singular(double lambda, double eps) { return InfluenceFn(Kind::singular, lambda, eps); }

double InfluenceFn::operator()(double d) const noexcept {
    if (kind_ == Kind::unit) return 1.0;
    const double q = base_ + c_ * d * d;
    // the common exponents avoid pow() in the pair loops
    if (lambda_ == 1.0) return 1.0 / std::sqrt(q);
    if (lambda_ == 2.0) return 1.0 / q;
    return std::pow(q, -0.5 * lambda_);
}

std::string InfluenceFn::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::unit: os << "unit"; break;
        case Kind::regular: os << "regular(lambda=" << lambda_ << ")"; break;
        case Kind::singular: os << "singular(lambda=" << lambda_ << ", eps=" << eps_ << ")"; break;
    }
    return os.str();
}

namespace {

// Transition profile S(s): 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s) noexcept {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double g = 1.0 / s - 1.0 / (1.0 - s);
    if (g > 0.0) {
        const double e = std::exp(-g);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(g));
}

double smooth_step_derivative(double s) noexcept {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double g = 1.0 / s - 1.0 / (1.0 - s);
    const double e = std::exp(-std::abs(g));
    const double dg = 1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s));
    return dg * e / ((1.0 + e) * (1.0 + e));
}

constexpr double kPlateau = 1.0 / 6.0;
constexpr double kSupport = 1.0 / 3.0;

}  // namespace

double bump(double r) noexcept { return smooth_step((kSupport - r) / (kSupport - kPlateau)); }

double bump_derivative(double r) noexcept {
    return -smooth_step_derivative((kSupport - r) / (kSupport - kPlateau)) / (kSupport - kPlateau);
}

AggregationPotential::AggregationPotential(Kind kind, double lambda, double eps)
    : kind_(kind), lambda_(lambda), eps_(eps) {
    if (kind_ == Kind::cucker_dong || kind_ == Kind::cucker_dong_scaled) {
        if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) throw ConfigError("Cucker-Dong potential: lambda3 must be positive");
        c_ = influence_coefficient(lambda_);
    }
    if (kind_ == Kind::cucker_dong_scaled) {
        if (!(eps_ > 0.0) || !std::isfinite(eps_)) throw ConfigError("scaled Cucker-Dong potential: epsilon must be positive");
        base_ = eps_ * eps_;
    }
}

AggregationPotential AggregationPotential::none() { return {Kind::none, 0.0, 0.0}; }
AggregationPotential AggregationPotential::periodic_log_bump() { return {Kind::periodic_log_bump, 1.0, 0.0}; }
AggregationPotential AggregationPotential::cucker_dong(double lambda3) { return {Kind::cucker_dong, lambda3, 0.0}; }
AggregationPotential AggregationPotential::cucker_dong_scaled(double lambda3, double eps) {
    return {Kind::cucker_dong_scaled, lambda3, eps};
}

double AggregationPotential::value(double disp) const noexcept {
    const double r = std::abs(disp);
    switch (kind_) {
        case Kind::none: return 0.0;
        case Kind::periodic_log_bump:
            if (r >= kSupport) return 0.0;
            return bump(r) * 0.5 * (std::log1p(r * r) - std::log(1.25));
        case Kind::cucker_dong:
        case Kind::cucker_dong_scaled: {
            const double q = base_ + c_ * r * r;
            if (lambda_ == 1.0) return std::log(q) / (2.0 * std::sqrt(c_));
            return std::pow(q, 0.5 * (1.0 - lambda_)) / ((1.0 - lambda_) * std::sqrt(c_));
        }
    }
    return 0.0;
}

double AggregationPotential::gradient(double disp) const noexcept {
    const double r = std::abs(disp);
    switch (kind_) {
        case Kind::none: return 0.0;
        case Kind::periodic_log_bump: {
            if (r >= kSupport || r == 0.0) return 0.0;
            const double radial = r <= kPlateau
                                      ? r / (1.0 + r * r)
                                      : bump_derivative(r) * 0.5 * (std::log1p(r * r) - std::log(1.25)) +
                                            bump(r) * r / (1.0 + r * r);
            return std::copysign(radial, disp);
        }
        case Kind::cucker_dong:
        case Kind::cucker_dong_scaled: {
            if (r >= 0.5) return 0.0;
            const double q = base_ + c_ * disp * disp;
            const double scale = lambda_ == 1.0 ? 1.0 / q : std::pow(q, -0.5 * (1.0 + lambda_));
            return std::sqrt(c_) * disp * scale;
        }
    }
    return 0.0;
}

double AggregationPotential::gradient_sup() const {
    if (kind_ == Kind::none) return 0.0;
    constexpr int samples = 20000;
    double best = 0.0;
    for (int k = 0; k < samples; ++k) {
        best = std::max(best, std::abs(gradient(0.5 * k / samples)));
    }
    return best;
}

std::string AggregationPotential::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::none: os << "none"; break;
        case Kind::periodic_log_bump: os << "periodic-log-bump"; break;
        case Kind::cucker_dong: os << "cucker-dong(lambda3=" << lambda_ << ")"; break;
        case Kind::cucker_dong_scaled: os << "cucker-dong-scaled(lambda3=" << lambda_ << ", eps=" << eps_ << ")"; break;
    }
    return os.str();
}

}  // namespace tcs
