/// @file diagnostics.hpp
/// @brief Weak metrics on the torus, decay-rate fits, the order parameter and
///        the kinetic-versus-macro epsilon sweep.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcs/grid.hpp"

namespace tcs {

/// |dx sum_i (cos 2 pi x_i, sin 2 pi x_i) rho_i|.
double order_parameter(const GridFn1D& rho);

/// W1 on the circle: min_c dx sum_i |F_a - F_b - c| with F the cumulative sums.
/// Both inputs must have unit mass to within `mass_tol`, otherwise ConfigError.
double wasserstein1_periodic(const GridFn1D& a, const GridFn1D& b, double mass_tol = 1e-8);

/// sup over a fixed family of Lipschitz-normalized random Fourier features psi of
/// |dx sum_i psi(x_i) (a_i - b_i)|. Suitable for signed fields.
class BoundedLipschitzDual {
public:
    explicit BoundedLipschitzDual(std::size_t features = 64, std::uint64_t seed = 20240917);

    double distance(const GridFn1D& a, const GridFn1D& b) const;

    std::size_t size() const noexcept { return freq_.size(); }
    /// Feature k evaluated at x.
    double feature(std::size_t k, double x) const;

private:
    std::vector<int> freq_;
    std::vector<double> phase_;
};

struct RateFit {
    double rate = 0.0;       // series ~ amplitude * exp(-rate t)
    double amplitude = 0.0;
    double residual = 0.0;   // RMS of log-space residuals
    std::size_t points = 0;
};

/// Log-linear least squares over samples with t in [t_lo, t_hi].
/// Throws ConfigError on non-positive values in the window, fewer than two
/// points, or a series with no decay information (constant values).
RateFit fit_decay(const std::vector<double>& t, const std::vector<double>& values, double t_lo, double t_hi);

/// [2 sqrt(eps), min(1, 20 eps theta_M^2)].
std::pair<double, double> decay_fit_window(double eps, double theta_M);

/// True when every entry is strictly smaller than the one before it.
bool strictly_decreasing(const std::vector<double>& v);

}  // namespace tcs
