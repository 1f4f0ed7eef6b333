/// @file config.hpp
/// @brief Experiment configuration: INI-style key/value files, code-defined presets
///        and validation.
///
/// Recognized sections and keys (all optional unless noted):
///
///     [run]      scenario (required), preset, M, T, cfl, output, snapshots, deterministic
///     [regime]   relaxation, kernels, epsilon, lambda1, lambda2, lambda3, potential
///     [initial]  theta0
///     [fluid]    cfl
///     [kinetic]  N, dt, sigma_v, theta_lo, theta_hi, seed
///     [particle] N, dt, kappa, nu, theta_lo, theta_hi, seed, stride
///     [sweep]    epsilons, M, N, bandwidth, parallel
///
/// Lists are comma separated. Unknown sections or keys are rejected.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tcs/background.hpp"
#include "tcs/grid.hpp"
#include "tcs/kinetic.hpp"

namespace tcs {

enum class Scenario { background_only, macro_strong, macro_weak, kinetic, particle, epsilon_sweep };

const char* to_string(Scenario s) noexcept;
Scenario parse_scenario(const std::string& name);

enum class PotentialKind { none, periodic_log_bump, cucker_dong, cucker_dong_scaled };

struct ExperimentConfig {
    Scenario scenario = Scenario::background_only;
    std::string preset = "paper-5.1";
    std::size_t M = 256;
    double T = 20.0;
    double cfl = 0.4;
    double fluid_cfl = 0.45;
    std::string output;
    std::vector<double> snapshots;
    bool deterministic = true;

    ScalingRegime regime;
    bool eps_given = false;
    PotentialKind potential = PotentialKind::periodic_log_bump;
    /// Weak-regime theta(0); non-positive means theta_inf(0).
    double theta0 = 0.0;

    std::size_t kinetic_N = 2048;
    double kinetic_dt = 0.01;
    double sigma_v = 0.01;
    double theta_lo = 1.6;
    double theta_hi = 1.9;
    std::uint64_t seed = 1;

    std::size_t particle_N = 64;
    double particle_dt = 1e-3;
    double kappa = 1.0;
    double nu = 1.0;
    std::size_t stride = 100;

    std::vector<double> sweep_eps{0.2, 0.1, 0.05};
    std::size_t sweep_M = 128;
    std::size_t sweep_N = 2048;
    double bandwidth = 0.02;
    bool parallel = false;

    std::vector<std::string> warnings;

    AggregationPotential potential_fn() const;
    /// Text form that round-trips through parse_config; used for hashing.
    std::string canonical() const;
};

/// Parses the key/value text. `source` names the input in error messages.
/// Throws ConfigError naming the line or key at fault, and runs validate().
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<input>");
ExperimentConfig load_config(const std::string& path);

/// Checks the cross-field conditions; fills `warnings` for the compatibility condition
/// and throws ConfigError for hard violations.
void validate(ExperimentConfig& c);

/// Initial background of a preset on M nodes.
FluidState preset_background(const std::string& preset, std::size_t M);
/// Initial macroscopic density of a preset on M nodes (unit mass on the grid).
GridFn1D preset_density(const std::string& preset, std::size_t M);
/// theta(0) of the weak regime implied by a preset (5 for paper-5.2), or 0 when unset.
double preset_theta0(const std::string& preset);

/// 64-bit FNV-1a of a string.
std::uint64_t fnv1a(const std::string& s);

}  // namespace tcs
