#include "tcs/macro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tcs/diagnostics.hpp"
#include "tcs/errors.hpp"

namespace tcs {

namespace {

constexpr double kWenoEps = 1e-12;

// Left-biased WENO5-JS reconstruction at the interface between c and d given values a..e.
double weno5(double a, double b, double c, double d, double e) noexcept {
    const double q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0;
    const double q1 = (-b + 5.0 * c + 2.0 * d) / 6.0;
    const double q2 = (2.0 * c + 5.0 * d - e) / 6.0;
    const double s0 = 13.0 / 12.0 * (a - 2.0 * b + c) * (a - 2.0 * b + c) + 0.25 * (a - 4.0 * b + 3.0 * c) * (a - 4.0 * b + 3.0 * c);
    const double s1 = 13.0 / 12.0 * (b - 2.0 * c + d) * (b - 2.0 * c + d) + 0.25 * (b - d) * (b - d);
    const double s2 = 13.0 / 12.0 * (c - 2.0 * d + e) * (c - 2.0 * d + e) + 0.25 * (3.0 * c - 4.0 * d + e) * (3.0 * c - 4.0 * d + e);
    const double a0 = 0.1 / ((kWenoEps + s0) * (kWenoEps + s0));
    const double a1 = 0.6 / ((kWenoEps + s1) * (kWenoEps + s1));
    const double a2 = 0.3 / ((kWenoEps + s2) * (kWenoEps + s2));
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2);
}

double max_abs(const GridFn1D& g) {
    double m = 0.0;
    for (double v : g.values()) m = std::max(m, std::abs(v));
    return m;
}

void check_finite(const GridFn1D& g, const char* what, double t) {
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!std::isfinite(g[i])) {
            std::ostringstream os;
            os << what << ": non-finite value at node " << i << ", t = " << t;
            throw NumericError(os.str());
        }
    }
}

}  // namespace

const char* to_string(Relaxation r) noexcept { return r == Relaxation::strong ? "strong" : "weak"; }

GridFn1D weno_rhs(const GridFn1D& rho, const GridFn1D& u) {
    if (rho.size() != u.size()) throw DimensionError("weno_rhs: rho and u differ in size");
    const std::size_t M = rho.size();
    if (M < 5) throw DimensionError("weno_rhs: needs at least 5 nodes");
    const double alpha = max_abs(u);
    std::vector<double> fp(M), fm(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double f = rho[i] * u[i];
        fp[i] = 0.5 * (f + alpha * rho[i]);
        fm[i] = 0.5 * (f - alpha * rho[i]);
    }
    auto at = [M](const std::vector<double>& v, long i) {
        const long m = static_cast<long>(M);
        return v[static_cast<std::size_t>(((i % m) + m) % m)];
    };
    // F[i] is the numerical flux at x_{i+1/2}
    std::vector<double> F(M);
    for (long i = 0; i < static_cast<long>(M); ++i) {
        const double plus = weno5(at(fp, i - 2), at(fp, i - 1), at(fp, i), at(fp, i + 1), at(fp, i + 2));
        const double minus = weno5(at(fm, i + 3), at(fm, i + 2), at(fm, i + 1), at(fm, i), at(fm, i - 1));
        F[static_cast<std::size_t>(i)] = plus + minus;
    }
    GridFn1D out(M);
    const double inv_dx = static_cast<double>(M);
    for (std::size_t i = 0; i < M; ++i) out[i] = -(F[i] - F[(i + M - 1) % M]) * inv_dx;
    return out;
}

double transport_stable_dt(const GridFn1D& u, double cfl) {
    const double a = max_abs(u);
    if (a == 0.0) return std::numeric_limits<double>::infinity();
    return cfl * u.dx() / a;
}

TransportResult transport_step(const GridFn1D& rho, const GridFn1D& u, double dt, double cfl) {
    if (!(dt > 0.0)) throw ConfigError("transport_step: dt must be positive");
    const double bound = transport_stable_dt(u, cfl);
    if (dt > bound * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "transport_step: dt = " << dt << " violates CFL bound " << bound;
        throw ConfigError(os.str());
    }
    const std::size_t M = rho.size();
    const double mass0 = rho.integral();

    GridFn1D s1(M), s2(M), s3(M);
    const GridFn1D L0 = weno_rhs(rho, u);
    for (std::size_t i = 0; i < M; ++i) s1[i] = rho[i] + dt * L0[i];
    const GridFn1D L1 = weno_rhs(s1, u);
    for (std::size_t i = 0; i < M; ++i) s2[i] = 0.75 * rho[i] + 0.25 * (s1[i] + dt * L1[i]);
    const GridFn1D L2 = weno_rhs(s2, u);
    for (std::size_t i = 0; i < M; ++i) s3[i] = rho[i] / 3.0 + 2.0 / 3.0 * (s2[i] + dt * L2[i]);
    check_finite(s3, "transport_step", 0.0);

    TransportResult out{std::move(s3), 0.0};
    double neg = 0.0;
    for (double& v : out.rho.values()) {
        if (v < 0.0) {
            neg -= v;
            v = 0.0;
        }
    }
    if (neg > 0.0) {
        out.clipped = neg * out.rho.dx();
        const double scale = mass0 / out.rho.integral();
        for (double& v : out.rho.values()) v *= scale;
    }
    return out;
}

Eigen::MatrixXd assemble_phi(const GridFn1D& rho, const InfluenceFn& phi) {
    const std::size_t M = rho.size();
    const GridFn1D row = sample_influence(M, phi);
    Eigen::MatrixXd P(M, M);
    for (std::size_t i = 0; i < M; ++i) {
        // extended accumulation keeps the row sums at the rounding of a single entry
        long double off = 0.0L;
        for (std::size_t j = 0; j < M; ++j) {
            const double v = row[(i + M - j) % M] * rho[j];
            P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            if (j != i) off += v;
        }
        P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -static_cast<double>(off);
    }
    return P;
}

GridFn1D aggregation_field(const GridFn1D& rho, const AggregationPotential& W) {
    const std::size_t M = rho.size();
    if (W.is_zero()) return GridFn1D(M);
    const GridFn1D row = sample_kernel(M, [&W](double d) { return W.gradient(d); });
    return periodic_convolve(row, rho);
}

VelocitySolution solve_velocity(const GridFn1D& rho, const InfluenceFn& phi, const AggregationPotential& W,
                                double forcing, double theta_eff) {
    const std::size_t M = rho.size();
    const auto n = static_cast<Eigen::Index>(M);
    Eigen::MatrixXd A = -rho.dx() * assemble_phi(rho, phi);
    A.diagonal().array() += 1.0;
    const GridFn1D agg = aggregation_field(rho, W);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) rhs(i) = forcing - theta_eff * agg[static_cast<std::size_t>(i)];

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd x = lu.solve(rhs);
    VelocitySolution sol{GridFn1D(M), 0.0};
    for (Eigen::Index i = 0; i < n; ++i) sol.u[static_cast<std::size_t>(i)] = x(i);
    check_finite(sol.u, "solve_velocity", 0.0);
    const double scale = std::max(rhs.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    sol.residual = (A * x - rhs).cwiseAbs().maxCoeff() / scale;
    if (sol.residual > 1e-10) {
        std::ostringstream os;
        os << "solve_velocity: relative residual " << sol.residual << " exceeds 1e-10";
        throw NumericError(os.str());
    }
    return sol;
}

double relax_theta_step(double theta, const BackgroundSource& source, double t, double dt) {
    if (!(theta > 0.0)) throw DomainError("relax_theta: theta must be positive");
    if (dt < 1e-12) throw NumericError("relax_theta: step size underflow");
    auto f = [&source](double s, double th) { return 1.0 / th - 1.0 / source.theta_inf(s); };
    const double k1 = f(t, theta);
    const double y2 = theta + 0.5 * dt * k1;
    const double k2 = y2 > 0.0 ? f(t + 0.5 * dt, y2) : 0.0;
    const double y3 = theta + 0.5 * dt * k2;
    const double k3 = y3 > 0.0 ? f(t + 0.5 * dt, y3) : 0.0;
    const double y4 = theta + dt * k3;
    const double k4 = y4 > 0.0 ? f(t + dt, y4) : 0.0;
    const double next = theta + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (y2 > 0.0 && y3 > 0.0 && y4 > 0.0 && next > 0.0) return next;
    const double mid = relax_theta_step(theta, source, t, 0.5 * dt);
    return relax_theta_step(mid, source, t + 0.5 * dt, 0.5 * dt);
}

std::vector<std::pair<double, double>> relax_theta(double theta0, const BackgroundSource& source, double t0,
                                                   double dt, double T) {
    if (!(dt > 0.0)) throw ConfigError("relax_theta: dt must be positive");
    std::vector<std::pair<double, double>> out{{t0, theta0}};
    double t = t0, theta = theta0;
    const double t_end = t0 + T;
    while (t < t_end - 1e-12) {
        const double h = std::min(dt, t_end - t);
        theta = relax_theta_step(theta, source, t, h);
        t = t + h;
        out.emplace_back(t, theta);
    }
    return out;
}

double max_speed_on_support(const GridFn1D& rho, const GridFn1D& u, double rho_min) {
    double m = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] >= rho_min) m = std::max(m, std::abs(u[i]));
    }
    return m;
}

MacroRun run_macro(const MacroConfig& config, const GridFn1D& rho0, const FluidState& background0) {
    if (!(config.T > 0.0)) throw ConfigError("run_macro: T must be positive");
    if (!(config.cfl > 0.0) || config.cfl > 1.0) throw ConfigError("run_macro: cfl must lie in (0, 1]");
    for (double v : rho0.values()) {
        if (!(v >= 0.0)) throw DomainError("run_macro: initial density must be non-negative");
    }

    BackgroundSolver bg(background0, config.fluid);
    MacroRun run;
    MacroState& s = run.final_state;
    s.rho = rho0;
    s.t = background0.t;
    run.mass_initial = rho0.integral();
    run.background_initial = bg.initial_totals();

    const bool weak = config.regime == Relaxation::weak;
    double theta_inf = bg.records().back().theta_inf;
    double u_inf = theta_inf * bg.records().back().u_over_theta;
    s.theta = weak ? (config.theta0 > 0.0 ? config.theta0 : theta_inf) : theta_inf;

    auto solve = [&]() {
        const double forcing = weak ? s.theta / theta_inf * u_inf : u_inf;
        const double theta_eff = weak ? s.theta : theta_inf;
        VelocitySolution sol = solve_velocity(s.rho, config.phi, config.W, forcing, theta_eff);
        run.max_residual = std::max(run.max_residual, sol.residual);
        s.u = std::move(sol.u);
    };
    auto record = [&]() {
        run.records.push_back({s.t, order_parameter(s.rho), s.theta, theta_inf, max_speed_on_support(s.rho, s.u)});
    };

    std::vector<double> snaps = config.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    auto take_snapshots = [&]() {
        while (next_snap < snaps.size() && snaps[next_snap] <= s.t + 1e-12) {
            if (std::abs(snaps[next_snap] - s.t) <= 1e-9) run.snapshots.push_back({s.t, s.rho, s.u});
            ++next_snap;
        }
    };

    solve();
    record();
    take_snapshots();

    const double t_end = s.t + config.T;
    while (s.t < t_end - 1e-12) {
        double dt = std::min({bg.stable_dt(), transport_stable_dt(s.u, config.cfl), t_end - s.t});
        if (next_snap < snaps.size()) dt = std::min(dt, snaps[next_snap] - s.t);

        bg.step(dt);
        theta_inf = bg.records().back().theta_inf;
        u_inf = theta_inf * bg.records().back().u_over_theta;

        TransportResult tr = transport_step(s.rho, s.u, dt, config.cfl);
        run.max_clip = std::max(run.max_clip, tr.clipped);
        s.rho = std::move(tr.rho);

        s.theta = weak ? relax_theta_step(s.theta, bg.source(), s.t, dt) : theta_inf;
        s.t = bg.t();
        solve();

        ++run.steps;
        run.max_mass_drift = std::max(run.max_mass_drift, std::abs(s.rho.integral() - run.mass_initial));
        record();
        take_snapshots();
    }
    run.background = bg.records();
    run.background_final = bg.totals();
    return run;
}

}  // namespace tcs
