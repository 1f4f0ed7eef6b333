/// @file kinetic.hpp
/// @brief Scaled kinetic TCS equation solved along characteristics of a weighted
///        particle cloud, coupled to a published background series.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "tcs/background.hpp"
#include "tcs/grid.hpp"
#include "tcs/kernels.hpp"
#include "tcs/macro.hpp"

namespace tcs {

enum class KernelFamily { regular, singular };

const char* to_string(KernelFamily k) noexcept;

struct ScalingRegime {
    Relaxation relaxation = Relaxation::strong;
    KernelFamily kernels = KernelFamily::regular;
    double eps = 0.1;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    /// Set to use the scaled Cucker-Dong potential W_eps with this exponent.
    std::optional<double> lambda3;

    /// Throws ConfigError for eps <= 0, non-positive exponents, or singular kernels with lambda1 > 1.
    void validate() const;
    InfluenceFn phi() const;
    InfluenceFn zeta() const;
};

struct Particle {
    double x = 0.0;
    double v = 0.0;
    double theta = 1.0;
    double weight = 0.0;
};

class KineticCloud {
public:
    KineticCloud(std::vector<Particle> particles, ScalingRegime regime, AggregationPotential W,
                 std::shared_ptr<const BackgroundSource> background, double t0 = 0.0);

    const std::vector<Particle>& particles() const noexcept { return particles_; }
    const ScalingRegime& regime() const noexcept { return regime_; }
    const AggregationPotential& potential() const noexcept { return W_; }
    const BackgroundSource& background() const noexcept { return *background_; }
    const InfluenceFn& phi() const noexcept { return phi_; }
    const InfluenceFn& zeta() const noexcept { return zeta_; }
    double t() const noexcept { return t_; }

    /// Replaces the particle states; weights must be left untouched.
    void set_state(std::vector<Particle> particles, double t);

private:
    std::vector<Particle> particles_;
    ScalingRegime regime_;
    AggregationPotential W_;
    InfluenceFn phi_;
    InfluenceFn zeta_;
    std::shared_ptr<const BackgroundSource> background_;
    double t_ = 0.0;
};

struct KineticRates {
    std::vector<double> dv;
    std::vector<double> dtheta;
};

/// dv = (F + H + F_c)/eps; dtheta = G/eps + G_c/eps (strong) or G/eps + G_c (weak).
KineticRates kinetic_forces(const KineticCloud& cloud, double t);

struct SupportDiameters {
    double D_x = 0.0;
    double D_v = 0.0;
    double D_theta = 0.0;
    double R_x = 0.0;
    double R_v = 0.0;
};

SupportDiameters support_diameters(const std::vector<Particle>& particles);

struct MomentSet {
    GridFn1D rho;
    GridFn1D j;
    GridFn1D h;
    GridFn1D A;
    GridFn1D B;
    GridFn1D S_v;
    GridFn1D S_theta;
};

/// Deposits of the weights times 1, v, theta, v/theta, 1/theta, v^2, v theta.
MomentSet moments_on_grid(const std::vector<Particle>& particles, std::size_t M, double bandwidth);

struct KineticSample {
    double t;
    double theta_min;
    double theta_max;
    double theta_mean;
    double theta_inf;
    double D_v;
    double R_v;
    double v2_moment;  // sum_p w_p v_p^2
};

struct KineticSnapshot {
    double t;
    std::vector<Particle> particles;
};

struct AdvanceOptions {
    double dt = 0.01;
    double T = 1.0;
    std::vector<double> snapshot_times;
};

struct KineticRun {
    std::vector<KineticSample> samples;
    std::vector<KineticSnapshot> snapshots;
    std::size_t steps = 0;
    double step_size = 0.0;
};

/// Exponential-integrator Heun steps of size min(dt, eps/4): the linear relaxation of
/// v towards its instantaneous target and of theta towards its fixed point are
/// integrated exactly with frozen mean fields, and the mean fields are averaged
/// between the start and predicted end of each step.
KineticRun advance(KineticCloud& cloud, const AdvanceOptions& options);

/// Initial data for a cloud: x by inverse CDF of rho0, v = u0(x) + sigma_v * N(0,1),
/// theta uniform on [theta_lo, theta_hi], all from a shifted Kronecker sequence.
struct CloudInit {
    GridFn1D rho0;
    GridFn1D u0;
    double sigma_v = 0.01;
    double theta_lo = 1.6;
    double theta_hi = 1.9;
    std::size_t N = 2048;
    std::uint64_t seed = 1;
};

std::vector<Particle> sample_initial_cloud(const CloudInit& init);

/// Periodic linear interpolation of grid data at x.
double interpolate_periodic(const GridFn1D& g, double x);

/// Constants of the concentration lemma and its compatibility hypothesis.
struct ConcentrationBounds {
    double theta_m = 0.0;      // min(theta_m0, bar_theta_m)
    double theta_M = 0.0;      // max(theta_M0, bar_theta_M)
    double decay_rate = 0.0;   // 1 / (eps theta_M^2)
    double compat_gap = 0.0;   // theta_m^2/theta_M - (theta_M0 - theta_m0); positive when compatible
    bool compatible = false;
    /// Singular-kernel hypothesis D_theta(0)/eps < theta_m^2/theta_M.
    bool strongly_concentrated = false;
};

ConcentrationBounds concentration_bounds(double theta_m0, double theta_M0, double bar_theta_m, double bar_theta_M,
                                         double eps);

/// Velocity-radius bound of the weak regime: v_M = v_M0 + C2/C1.
struct WeakSupportBounds {
    double C1 = 0.0;
    double C2 = 0.0;
    double v_M = 0.0;
};

WeakSupportBounds weak_support_bounds(const ConcentrationBounds& b, double theta_m0, double theta_M0, double phi_sup,
                                      double ratio_sup, double grad_W_sup, double v_M0);

/// Right-hand side C (eps E0 + C G0^2) of the time-integrated second velocity moment
/// bound, with C = 1/delta, delta = 1/theta_M - |phi| D_theta(0)/theta_m^2,
/// G0 = F0 + sqrt(T) |W'|, F0 = sqrt(T) v_bar_M / bar_theta_m.
/// Returns +infinity when delta <= 0.
double moment_budget(const ConcentrationBounds& b, double D_theta0, double phi_sup, double E0, double eps, double T,
                     double v_bar_M, double bar_theta_m, double grad_W_sup);

/// Upper bound on |d theta_inf/dt| from the background envelope:
/// |zeta| bar_theta_M^2 / bar_theta_m^5 (bar_theta_M - bar_theta_m)^2.
double theta_inf_rate_bound(double zeta_sup, double bar_theta_m, double bar_theta_M);

}  // namespace tcs
