/// @file macro.hpp
/// @brief Limiting macroscopic systems: WENO5/TVD-RK3 transport of rho and the
///        implicit linear velocity equation, plus the relaxation ODE for theta.

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "tcs/background.hpp"
#include "tcs/grid.hpp"
#include "tcs/kernels.hpp"

namespace tcs {

enum class Relaxation { strong, weak };

const char* to_string(Relaxation r) noexcept;

/// -d/dx(rho u) by finite-difference WENO5-JS with global Lax-Friedrichs splitting.
GridFn1D weno_rhs(const GridFn1D& rho, const GridFn1D& u);

double transport_stable_dt(const GridFn1D& u, double cfl = 0.4);

struct TransportResult {
    GridFn1D rho;
    double clipped = 0.0;  // dx * sum of negative parts removed
};

/// One TVD-RK3 step, then negatives clipped and the mass restored.
TransportResult transport_step(const GridFn1D& rho, const GridFn1D& u, double dt, double cfl = 0.4);

/// Phi_ij = phi(x_i - x_j) rho_j - delta_ij sum_k phi(x_i - x_k) rho_k.
Eigen::MatrixXd assemble_phi(const GridFn1D& rho, const InfluenceFn& phi);

/// dx * sum_j W'(x_i - x_j) rho_j.
GridFn1D aggregation_field(const GridFn1D& rho, const AggregationPotential& W);

struct VelocitySolution {
    GridFn1D u;
    double residual = 0.0;  // |A u - rhs|_inf / |rhs|_inf
};

/// Solves (I - dx Phi) u = forcing - theta_eff * dx * (W' rho).
///   strong: forcing = u_inf,                 theta_eff = theta_inf
///   weak:   forcing = (theta/theta_inf) u_inf, theta_eff = theta
VelocitySolution solve_velocity(const GridFn1D& rho, const InfluenceFn& phi, const AggregationPotential& W,
                                double forcing, double theta_eff);

/// RK4 for theta' = 1/theta - 1/theta_inf(t) on [t0, t0 + T] with steps of at most dt.
/// Returns (t, theta) pairs including both ends.
std::vector<std::pair<double, double>> relax_theta(double theta0, const BackgroundSource& source, double t0,
                                                   double dt, double T);

/// Single RK4 step of the relaxation ODE, halving on loss of positivity.
double relax_theta_step(double theta, const BackgroundSource& source, double t, double dt);

struct MacroConfig {
    Relaxation regime = Relaxation::strong;
    double T = 20.0;
    double cfl = 0.4;
    /// Weak regime only. A non-positive value means theta(0) = theta_inf(0).
    double theta0 = 5.0;
    InfluenceFn phi = InfluenceFn::regular(1.0);
    AggregationPotential W = AggregationPotential::periodic_log_bump();
    FluidParams fluid;
    /// Times at which (rho, u) are stored; the stepper lands on them exactly.
    std::vector<double> snapshot_times;
};

struct MacroState {
    GridFn1D rho;
    GridFn1D u;
    double theta = 0.0;
    double t = 0.0;
};

struct MacroRecord {
    double t;
    double R;
    double theta;
    double theta_inf;
    double max_u;
};

struct MacroSnapshot {
    double t;
    GridFn1D rho;
    GridFn1D u;
};

struct MacroRun {
    std::vector<MacroRecord> records;
    std::vector<MacroSnapshot> snapshots;
    std::vector<BackgroundRecord> background;
    MacroState final_state;
    double max_clip = 0.0;
    double max_residual = 0.0;
    double mass_initial = 0.0;
    double max_mass_drift = 0.0;  // max |mass(t) - mass(0)|
    std::size_t steps = 0;
    BackgroundSolver::Totals background_initial{};
    BackgroundSolver::Totals background_final{};
};

/// Per step: (1) advance the background, (2) transport rho with the lagged u,
/// (3) refresh theta (weak) and solve for u at the new time.
MacroRun run_macro(const MacroConfig& config, const GridFn1D& rho0, const FluidState& background0);

/// max |u_i| over nodes with rho_i >= rho_min.
double max_speed_on_support(const GridFn1D& rho, const GridFn1D& u, double rho_min = 1e-6);

}  // namespace tcs
