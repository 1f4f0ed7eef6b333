/// @file sweep.hpp
/// @brief Kinetic-versus-macro comparison over a list of epsilons.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tcs/background.hpp"
#include "tcs/diagnostics.hpp"
#include "tcs/kinetic.hpp"
#include "tcs/macro.hpp"

namespace tcs {

struct SweepConfig {
    Relaxation regime = Relaxation::strong;
    KernelFamily kernels = KernelFamily::regular;
    std::vector<double> epsilons{0.2, 0.1, 0.05};
    std::vector<double> snapshot_times{0.5, 1.0, 2.0};
    std::size_t M = 128;
    std::size_t N = 2048;
    double bandwidth = 0.02;
    double dt = 0.01;
    double cfl = 0.4;
    double sigma_v = 0.01;
    double theta_lo = 1.6;
    double theta_hi = 1.9;
    std::uint64_t seed = 1;
    AggregationPotential W = AggregationPotential::periodic_log_bump();
    FluidParams fluid;
    /// Run the kinetic solves on worker threads.
    bool parallel = false;
};

/// Per-epsilon output of the kinetic solve.
struct EpsilonRun {
    double eps = 0.0;
    std::vector<KineticSample> samples;
    std::size_t steps = 0;
    double seconds = 0.0;
    bool has_fit = false;
    RateFit theta_fit;       // fit of D_theta over decay_fit_window
    std::string fit_error;
};

/// Distances indexed [epsilon][snapshot]; the metric for rho is periodic W1 between
/// the kernel deposit of the cloud and the same kernel applied to the macro density,
/// the metric for j is the bounded-Lipschitz dual norm against the smoothed rho u.
struct LimitComparison {
    Relaxation regime = Relaxation::strong;
    std::vector<double> epsilons;
    std::vector<double> snapshots;
    std::vector<std::vector<double>> rho_distance;
    std::vector<std::vector<double>> j_distance;
    std::vector<bool> rho_monotone;  // per snapshot: strictly decreasing as eps decreases
    std::vector<bool> j_monotone;
    bool monotone = false;
    std::vector<EpsilonRun> runs;
    /// Macro relaxation-ODE trajectory (weak) or theta_inf (strong), sampled at the macro steps.
    std::vector<std::pair<double, double>> theta_reference;
    double initial_theta_mean = 0.0;
    double theta_m = 0.0;            // concentration-lemma constants of the shared initial cloud
    double theta_M = 0.0;
    bool complete = false;
    std::string error;
};

/// Shared initial data: rho0 on the config grid, cloud velocities from the macro
/// velocity solve at t = 0, theta uniform on [theta_lo, theta_hi]. In the weak regime the
/// macro run starts from the cloud-mean theta. Snapshot epsilons are processed in the given
/// order; a failure stops the sweep and leaves complete = false with the message in error.
LimitComparison epsilon_sweep(const SweepConfig& config, const GridFn1D& rho0, const FluidState& background0);

/// True when the sequence is strictly decreasing (a single entry counts as decreasing).
bool monotone_in_eps(const std::vector<double>& d);

void write_sweep_report(std::ostream& out, const LimitComparison& cmp);
void print_sweep_summary(std::ostream& out, const LimitComparison& cmp);

}  // namespace tcs
