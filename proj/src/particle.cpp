#include "tcs/particle.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "tcs/errors.hpp"
#include "tcs/torus.hpp"

namespace tcs {

namespace {

constexpr double kThetaFloor = 1e-6;
constexpr double kMinStep = 1e-12;

void check_theta(const std::vector<AgentState>& agents, const char* species) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (!(agents[i].theta > 0.0)) {
            std::ostringstream os;
            os << "micro_rhs: " << species << " agent " << i << " has theta = " << agents[i].theta;
            throw DomainError(os.str());
        }
    }
}

// Adds scale * sum_j phi(x_i - y_j) (v_j/theta_j - v_i/theta_i) and the zeta analogue to rates.
void add_tcs(std::vector<AgentRate>& rates, const std::vector<AgentState>& a, const std::vector<AgentState>& b,
             double kv, const InfluenceFn& phi, double kt, const InfluenceFn& zeta) {
    if (kv == 0.0 && kt == 0.0) return;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = a[i].v / a[i].theta;
        const double bi = 1.0 / a[i].theta;
        double sv = 0.0, st = 0.0;
        for (const AgentState& o : b) {
            const double d = torus_dist(a[i].x, o.x);
            if (kv != 0.0) sv += phi(d) * (o.v / o.theta - ai);
            if (kt != 0.0) st += zeta(d) * (bi - 1.0 / o.theta);
        }
        rates[i].v += kv * sv;
        rates[i].theta += kt * st;
    }
}

using Flat = std::vector<AgentState>;

Flat axpy(const Flat& y, double h, const std::vector<AgentRate>& k) {
    Flat out = y;
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i].x += h * k[i].x;
        out[i].v += h * k[i].v;
        out[i].theta += h * k[i].theta;
    }
    return out;
}

bool theta_ok(const Flat& y) {
    for (const AgentState& a : y) {
        if (!(a.theta > kThetaFloor)) return false;
    }
    return true;
}

// One RK4 step with halving. `rhs` maps a concatenated state to its rates.
template <class Rhs>
Flat rk4_guarded(const Flat& y, double h, const Rhs& rhs, std::size_t& halvings) {
    if (h < kMinStep) {
        throw NumericError("particle integrator: step size fell below 1e-12; the system is too stiff, "
                           "use a larger epsilon or an implicit integrator");
    }
    bool ok = true;
    const auto k1 = rhs(y);
    const Flat y2 = axpy(y, 0.5 * h, k1);
    Flat out;
    if ((ok = theta_ok(y2))) {
        const auto k2 = rhs(y2);
        const Flat y3 = axpy(y, 0.5 * h, k2);
        if ((ok = theta_ok(y3))) {
            const auto k3 = rhs(y3);
            const Flat y4 = axpy(y, h, k3);
            if ((ok = theta_ok(y4))) {
                const auto k4 = rhs(y4);
                out = y;
                for (std::size_t i = 0; i < y.size(); ++i) {
                    out[i].x = wrap_unit(y[i].x + h / 6.0 * (k1[i].x + 2.0 * k2[i].x + 2.0 * k3[i].x + k4[i].x));
                    out[i].v += h / 6.0 * (k1[i].v + 2.0 * k2[i].v + 2.0 * k3[i].v + k4[i].v);
                    out[i].theta +=
                        h / 6.0 * (k1[i].theta + 2.0 * k2[i].theta + 2.0 * k3[i].theta + k4[i].theta);
                }
                ok = theta_ok(out);
            }
        }
    }
    if (ok) return out;
    ++halvings;
    const Flat mid = rk4_guarded(y, 0.5 * h, rhs, halvings);
    return rk4_guarded(mid, 0.5 * h, rhs, halvings);
}

void check_steps(double dt, double T, std::size_t stride) {
    if (!(dt > 0.0)) throw ConfigError("integrate: dt must be positive");
    if (!(T >= 0.0)) throw ConfigError("integrate: T must be non-negative");
    if (stride == 0) throw ConfigError("integrate: stride must be positive");
}

}  // namespace

double TwoSpeciesSystem::w1() const {
    if (uniform_weights || species1.empty()) return 1.0;
    return static_cast<double>(total()) / static_cast<double>(species1.size());
}

double TwoSpeciesSystem::w2() const {
    if (uniform_weights || species2.empty()) return 1.0;
    return static_cast<double>(total()) / static_cast<double>(species2.size());
}

TwoSpeciesSystem make_tcs(std::vector<AgentState> agents, double kappa, double nu, const InfluenceFn& phi,
                          const InfluenceFn& zeta) {
    TwoSpeciesSystem s;
    s.species1 = std::move(agents);
    s.kappa1 = kappa;
    s.nu1 = nu;
    s.phi1 = phi;
    s.zeta1 = zeta;
    return s;
}

MicroRates micro_rhs(const TwoSpeciesSystem& s) {
    check_theta(s.species1, "species 1");
    check_theta(s.species2, "species 2");
    const double N = static_cast<double>(s.total());
    MicroRates r{std::vector<AgentRate>(s.species1.size()), std::vector<AgentRate>(s.species2.size())};
    if (s.total() == 0) return r;

    for (std::size_t i = 0; i < s.species1.size(); ++i) r.species1[i].x = s.species1[i].v;
    for (std::size_t k = 0; k < s.species2.size(); ++k) r.species2[k].x = s.species2[k].v;

    add_tcs(r.species1, s.species1, s.species1, s.w1() * s.kappa1 / N, s.phi1, s.w1() * s.nu1 / N, s.zeta1);
    add_tcs(r.species1, s.species1, s.species2, s.kappa_c / N, s.phi_c, s.nu_c / N, s.zeta_c);
    add_tcs(r.species2, s.species2, s.species2, s.w2() * s.kappa2 / N, s.phi2, s.w2() * s.nu2 / N, s.zeta2);
    add_tcs(r.species2, s.species2, s.species1, s.kappa_c / N, s.phi_c, s.nu_c / N, s.zeta_c);

    if (s.kappa_a != 0.0 && !s.W1.is_zero()) {
        const double ka = s.w1() * s.kappa_a / N;
        for (std::size_t i = 0; i < s.species1.size(); ++i) {
            double g = 0.0;
            for (const AgentState& o : s.species1) g += s.W1.gradient(torus_displacement(s.species1[i].x, o.x));
            r.species1[i].v -= ka * g;
        }
    }
    for (AgentRate& a : r.species1) a.v /= s.m1;
    for (AgentRate& a : r.species2) a.v /= s.m2;
    return r;
}

std::vector<AgentRate> cs_rhs(const std::vector<AgentState>& agents, double kappa, const InfluenceFn& phi) {
    const double N = static_cast<double>(agents.size());
    std::vector<AgentRate> r(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        double s = 0.0;
        for (const AgentState& o : agents) s += phi(torus_dist(agents[i].x, o.x)) * (o.v - agents[i].v);
        r[i].x = agents[i].v;
        r[i].v = kappa / N * s;
    }
    return r;
}

Trajectory integrate(TwoSpeciesSystem s, double dt, double T, std::size_t stride) {
    check_steps(dt, T, stride);
    const std::size_t n1 = s.species1.size();
    auto rhs = [&s, n1](const Flat& y) {
        TwoSpeciesSystem tmp = s;
        tmp.species1.assign(y.begin(), y.begin() + static_cast<long>(n1));
        tmp.species2.assign(y.begin() + static_cast<long>(n1), y.end());
        MicroRates m = micro_rhs(tmp);
        m.species1.insert(m.species1.end(), m.species2.begin(), m.species2.end());
        return m.species1;
    };
    Flat y = s.species1;
    y.insert(y.end(), s.species2.begin(), s.species2.end());
    for (AgentState& a : y) a.x = wrap_unit(a.x);

    Trajectory traj;
    auto store = [&](double t) {
        traj.t.push_back(t);
        traj.species1.emplace_back(y.begin(), y.begin() + static_cast<long>(n1));
        traj.species2.emplace_back(y.begin() + static_cast<long>(n1), y.end());
    };
    store(0.0);
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    for (std::size_t n = 1; n <= steps; ++n) {
        y = rk4_guarded(y, dt, rhs, traj.halvings);
        if (n % stride == 0 || n == steps) store(static_cast<double>(n) * dt);
    }
    return traj;
}

std::vector<std::vector<AgentState>> integrate_cs(std::vector<AgentState> agents, double kappa,
                                                  const InfluenceFn& phi, double dt, double T,
                                                  std::size_t stride) {
    check_steps(dt, T, stride);
    auto rhs = [kappa, &phi](const Flat& y) { return cs_rhs(y, kappa, phi); };
    for (AgentState& a : agents) a.x = wrap_unit(a.x);
    std::vector<std::vector<AgentState>> frames{agents};
    std::size_t halvings = 0;
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    for (std::size_t n = 1; n <= steps; ++n) {
        agents = rk4_guarded(agents, dt, rhs, halvings);
        if (n % stride == 0 || n == steps) frames.push_back(agents);
    }
    return frames;
}

EmpiricalMoments empirical_moments(const std::vector<AgentState>& agents, std::size_t M, double bandwidth) {
    const GaussianDeposit dep(M, bandwidth);
    EmpiricalMoments m{GridFn1D(M), GridFn1D(M), GridFn1D(M)};
    if (agents.empty()) return m;
    const double q = 1.0 / static_cast<double>(agents.size());
    for (const AgentState& a : agents) {
        dep.add(m.rho.values(), a.x, q);
        dep.add(m.j.values(), a.x, q * a.v);
        dep.add(m.h.values(), a.x, q * a.theta);
    }
    return m;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,species,agent_id,x,v,theta\n";
    out.precision(17);
    for (std::size_t n = 0; n < traj.t.size(); ++n) {
        for (std::size_t i = 0; i < traj.species1[n].size(); ++i) {
            const AgentState& a = traj.species1[n][i];
            out << traj.t[n] << ",1," << i << ',' << a.x << ',' << a.v << ',' << a.theta << '\n';
        }
        for (std::size_t i = 0; i < traj.species2[n].size(); ++i) {
            const AgentState& a = traj.species2[n][i];
            out << traj.t[n] << ",2," << i << ',' << a.x << ',' << a.v << ',' << a.theta << '\n';
        }
    }
}

}  // namespace tcs
