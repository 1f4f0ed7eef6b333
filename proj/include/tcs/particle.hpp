/// @file particle.hpp
/// @brief Two-species micro-micro TCS system on the torus and its RK4 integrator.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "tcs/grid.hpp"
#include "tcs/kernels.hpp"

namespace tcs {

struct AgentState {
    double x = 0.0;
    double v = 0.0;
    double theta = 1.0;
};

/// Time derivative of one agent.
struct AgentRate {
    double x = 0.0;
    double v = 0.0;
    double theta = 0.0;
};

/// Species 1 carries the aggregation term; species 2 is the large population.
/// Self-interactions are multiplied by w_s = N / N_s (or 1 with uniform_weights),
/// cross-interactions by 1/N.
struct TwoSpeciesSystem {
    std::vector<AgentState> species1;
    std::vector<AgentState> species2;
    double m1 = 1.0, m2 = 1.0;
    double kappa1 = 0.0, kappa2 = 0.0, kappa_c = 0.0, kappa_a = 0.0;
    double nu1 = 0.0, nu2 = 0.0, nu_c = 0.0;
    InfluenceFn phi1 = InfluenceFn::regular(1.0);
    InfluenceFn phi2 = InfluenceFn::regular(1.0);
    InfluenceFn phi_c = InfluenceFn::regular(1.0);
    InfluenceFn zeta1 = InfluenceFn::regular(1.0);
    InfluenceFn zeta2 = InfluenceFn::regular(1.0);
    InfluenceFn zeta_c = InfluenceFn::regular(1.0);
    AggregationPotential W1 = AggregationPotential::none();
    bool uniform_weights = false;

    std::size_t total() const noexcept { return species1.size() + species2.size(); }
    double w1() const;
    double w2() const;
};

/// Single-species TCS: dv_i = kappa/N sum phi (v_j/theta_j - v_i/theta_i), dtheta_i = nu/N sum zeta (1/theta_i - 1/theta_j).
TwoSpeciesSystem make_tcs(std::vector<AgentState> agents, double kappa, double nu, const InfluenceFn& phi,
                          const InfluenceFn& zeta);

struct MicroRates {
    std::vector<AgentRate> species1;
    std::vector<AgentRate> species2;
};

/// Throws DomainError if some theta <= 0.
MicroRates micro_rhs(const TwoSpeciesSystem& s);

/// Cucker-Smale: dv_i = kappa/N sum phi (v_j - v_i). Theta is ignored and left unchanged.
std::vector<AgentRate> cs_rhs(const std::vector<AgentState>& agents, double kappa, const InfluenceFn& phi);

struct Trajectory {
    std::vector<double> t;
    std::vector<std::vector<AgentState>> species1;
    std::vector<std::vector<AgentState>> species2;
    std::size_t halvings = 0;
};

/// Classical RK4 from 0 to T with step dt; every `stride`-th state (and the last) is stored.
/// A step whose result has some theta <= 1e-6 is redone as two half steps; steps
/// below 1e-12 raise NumericError.
Trajectory integrate(TwoSpeciesSystem s, double dt, double T, std::size_t stride = 1);

/// RK4 for the Cucker-Smale system with the same stepping and storage rules.
std::vector<std::vector<AgentState>> integrate_cs(std::vector<AgentState> agents, double kappa,
                                                  const InfluenceFn& phi, double dt, double T,
                                                  std::size_t stride = 1);

struct EmpiricalMoments {
    GridFn1D rho;
    GridFn1D j;
    GridFn1D h;
};

/// Gaussian deposit of mass 1/N, momentum v/N and internal variable theta/N.
EmpiricalMoments empirical_moments(const std::vector<AgentState>& agents, std::size_t M, double bandwidth);

/// CSV rows t,species,agent_id,x,v,theta.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace tcs
