/// @file background.hpp
/// @brief Hydrodynamic TCS background fluid (rho, rho u, rho e) on the torus,
///        advanced by the staggered Nessyahu-Tadmor central scheme, and the
///        scalar series theta_inf(t), u_inf/theta_inf(t) it publishes.

#pragma once

#include <cstddef>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "tcs/grid.hpp"
#include "tcs/kernels.hpp"

namespace tcs {

enum class GridParity { regular, staggered };

struct FluidParams {
    InfluenceFn phi = InfluenceFn::regular(1.0);
    InfluenceFn zeta = InfluenceFn::regular(1.0);
    double cfl = 0.45;
    double rho_floor = 1e-10;
};

/// Conservative variables. On the staggered grid node i sits at (i + 1/2)/M.
struct FluidState {
    GridParity parity = GridParity::regular;
    GridFn1D rho;
    GridFn1D mom;
    GridFn1D energy;
    double t = 0.0;

    std::size_t size() const noexcept { return rho.size(); }
    double node(std::size_t i) const noexcept;
    GridFn1D velocity(double rho_floor = 1e-10) const;
    GridFn1D internal(double rho_floor = 1e-10) const;

    static FluidState from_primitive(const GridFn1D& rho, const GridFn1D& u, const GridFn1D& e, double t = 0.0);
};

struct SourceTerms {
    GridFn1D momentum;
    GridFn1D energy;
};

/// Momentum and internal-energy sources by the rectangle rule (density source is zero).
SourceTerms tcs_source(const FluidState& state, const FluidParams& params);

/// Largest dt allowed by the CFL restriction cfl * dx / max(|u| + 1).
double max_stable_dt(const FluidState& state, const FluidParams& params);

/// One predictor-corrector step; the result lives on the complementary grid.
FluidState nt_step(const FluidState& state, double dt, const FluidParams& params);

struct MeanQuantities {
    double theta_inf = 0.0;
    double u_over_theta = 0.0;
    double fluct_u = 0.0;
    double fluct_e = 0.0;
};

MeanQuantities mean_quantities(const FluidState& state, double rho_floor = 1e-10);

/// Two-point average back onto the regular grid (identity for regular parity).
FluidState to_regular_grid(const FluidState& state);

/// Time series of theta_inf and u_inf/theta_inf with linear interpolation.
/// Appends take an exclusive lock, queries a shared one.
class BackgroundSource {
public:
    BackgroundSource() = default;
    BackgroundSource(const BackgroundSource& other);
    BackgroundSource& operator=(const BackgroundSource& other);

    static BackgroundSource constant(double theta_inf, double u_over_theta, double t_end = 1e300);

    void append(double t, double theta_inf, double u_over_theta);

    double theta_inf(double t) const;
    double u_over_theta(double t) const;
    double u_inf(double t) const { return theta_inf(t) * u_over_theta(t); }

    std::size_t size() const;
    double t_begin() const;
    double t_end() const;
    bool is_constant() const noexcept { return constant_; }

    /// Extremes over the recorded samples.
    double theta_min() const;
    double theta_max() const;
    double ratio_abs_max() const;
    /// Finite-difference slope extremes of theta_inf between consecutive samples.
    double theta_rate_max() const;
    /// Most negative single-sample decrement of theta_inf (0 if monotone).
    double theta_worst_decrease() const;

    std::vector<double> times() const;

private:
    double interpolate(const std::vector<double>& series, double t) const;

    mutable std::shared_mutex mutex_;
    std::vector<double> t_;
    std::vector<double> theta_;
    std::vector<double> ratio_;
    bool constant_ = false;
};

struct BackgroundRecord {
    double t;
    double theta_inf;
    double u_over_theta;
    double fluct_u;
    double fluct_e;
};

/// Owns a FluidState and advances it, recording mean quantities and audits.
class BackgroundSolver {
public:
    BackgroundSolver(FluidState initial, FluidParams params);

    const FluidState& state() const noexcept { return state_; }
    const FluidParams& params() const noexcept { return params_; }
    double t() const noexcept { return state_.t; }

    double stable_dt() const { return max_stable_dt(state_, params_); }
    void step(double dt);
    /// Steps with the largest stable dt until t reaches t_end exactly.
    void advance_to(double t_end);

    const std::vector<BackgroundRecord>& records() const noexcept { return records_; }
    const BackgroundSource& source() const noexcept { return source_; }
    std::shared_ptr<const BackgroundSource> shared_source() const;

    struct Totals {
        double mass;
        double momentum;
        double energy;
    };
    Totals totals() const;
    const Totals& initial_totals() const noexcept { return initial_totals_; }

    /// Largest amount by which e left [min e0, max e0] over all steps so far.
    double envelope_excess() const noexcept { return envelope_excess_; }
    std::size_t steps() const noexcept { return steps_; }

private:
    void record();

    FluidState state_;
    FluidParams params_;
    std::vector<BackgroundRecord> records_;
    BackgroundSource source_;
    Totals initial_totals_{};
    double e_lo_ = 0.0;
    double e_hi_ = 0.0;
    double envelope_excess_ = 0.0;
    std::size_t steps_ = 0;
};

/// Evolves a background from `initial` to t_end and returns the published series.
std::shared_ptr<const BackgroundSource> precompute_background(const FluidState& initial, const FluidParams& params,
                                                              double t_end);

}  // namespace tcs
