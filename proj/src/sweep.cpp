#include "tcs/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <ostream>

#include <json.hpp>

#include "tcs/errors.hpp"

namespace tcs {

namespace {

EpsilonRun run_one(const SweepConfig& config, double eps, const std::vector<Particle>& cloud0,
                   std::shared_ptr<const BackgroundSource> src, double theta_M, double T,
                   std::vector<KineticSnapshot>& snapshots) {
    ScalingRegime regime;
    regime.relaxation = config.regime;
    regime.kernels = config.kernels;
    regime.eps = eps;
    KineticCloud cloud(cloud0, regime, config.W, std::move(src));
    AdvanceOptions opt;
    opt.dt = config.dt;
    opt.T = T;
    opt.snapshot_times = config.snapshot_times;
    const auto start = std::chrono::steady_clock::now();
    KineticRun run = advance(cloud, opt);
    EpsilonRun out;
    out.eps = eps;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.steps = run.steps;
    out.samples = std::move(run.samples);
    snapshots = std::move(run.snapshots);

    std::vector<double> t, d;
    for (const KineticSample& s : out.samples) {
        t.push_back(s.t);
        d.push_back(s.theta_max - s.theta_min);
    }
    const auto window = decay_fit_window(eps, theta_M);
    try {
        out.theta_fit = fit_decay(t, d, window.first, window.second);
        out.has_fit = true;
    } catch (const Error& e) {
        out.fit_error = e.what();
    }
    return out;
}

}  // namespace

bool monotone_in_eps(const std::vector<double>& d) { return strictly_decreasing(d); }

LimitComparison epsilon_sweep(const SweepConfig& config, const GridFn1D& rho0, const FluidState& background0) {
    if (config.epsilons.empty()) throw ConfigError("epsilon sweep needs at least one epsilon");
    if (config.snapshot_times.empty()) throw ConfigError("epsilon sweep needs at least one snapshot time");
    if (rho0.size() != config.M) throw DimensionError("epsilon sweep: rho0 must live on the sweep grid");
    if (background0.size() != config.M) throw DimensionError("epsilon sweep: background must live on the sweep grid");
    for (double e : config.epsilons) {
        if (!(e > 0.0)) throw ConfigError("epsilon must be positive");
    }

    LimitComparison cmp;
    cmp.regime = config.regime;
    cmp.epsilons = config.epsilons;
    cmp.snapshots = config.snapshot_times;
    std::sort(cmp.snapshots.begin(), cmp.snapshots.end());
    const double T = cmp.snapshots.back();

    try {
        auto src = precompute_background(background0, config.fluid, T + 0.05);
        const GridFn1D e0 = background0.internal(config.fluid.rho_floor);
        cmp.theta_m = std::min(config.theta_lo, e0.min());
        cmp.theta_M = std::max(config.theta_hi, e0.max());

        MacroConfig mc;
        mc.regime = config.regime;
        mc.T = T;
        mc.cfl = config.cfl;
        mc.phi = InfluenceFn::regular(1.0);
        mc.W = config.W;
        mc.fluid = config.fluid;
        mc.snapshot_times = cmp.snapshots;

        // cloud velocities start on the macro velocity field at t = 0
        CloudInit init;
        init.rho0 = rho0;
        init.sigma_v = config.sigma_v;
        init.theta_lo = config.theta_lo;
        init.theta_hi = config.theta_hi;
        init.N = config.N;
        init.seed = config.seed;
        init.u0 = GridFn1D(config.M);
        std::vector<Particle> cloud0 = sample_initial_cloud(init);
        for (const Particle& p : cloud0) cmp.initial_theta_mean += p.weight * p.theta;

        const double th_inf0 = src->theta_inf(0.0);
        const bool weak = config.regime == Relaxation::weak;
        const double theta0 = weak ? cmp.initial_theta_mean : th_inf0;
        mc.theta0 = theta0;
        const VelocitySolution v0 = solve_velocity(rho0, mc.phi, mc.W, (theta0 / th_inf0) * src->u_inf(0.0), theta0);
        for (Particle& p : cloud0) p.v += interpolate_periodic(v0.u, p.x);

        if (weak) {
            cmp.theta_reference = relax_theta(theta0, *src, 0.0, 1e-3, T);
        } else {
            for (double t = 0.0; t <= T + 1e-12; t += 1e-3) cmp.theta_reference.emplace_back(t, src->theta_inf(t));
        }

        const MacroRun macro = run_macro(mc, rho0, background0);
        if (macro.snapshots.size() != cmp.snapshots.size()) throw InvariantViolation("macro run missed a snapshot time");

        const GaussianDeposit dep(config.M, config.bandwidth);
        const BoundedLipschitzDual bl;
        std::vector<GridFn1D> rho_ref, j_ref;
        for (const MacroSnapshot& s : macro.snapshots) {
            GridFn1D ju(config.M);
            for (std::size_t i = 0; i < config.M; ++i) ju[i] = s.rho[i] * s.u[i];
            rho_ref.push_back(dep.smooth(s.rho));
            j_ref.push_back(dep.smooth(ju));
        }

        const std::size_t E = config.epsilons.size();
        std::vector<std::vector<KineticSnapshot>> snaps(E);
        std::vector<EpsilonRun> runs(E);
        if (config.parallel) {
            std::vector<std::future<EpsilonRun>> jobs;
            for (std::size_t k = 0; k < E; ++k) {
                jobs.push_back(std::async(std::launch::async, run_one, std::cref(config), config.epsilons[k],
                                          std::cref(cloud0), src, cmp.theta_M, T, std::ref(snaps[k])));
            }
            for (std::size_t k = 0; k < E; ++k) runs[k] = jobs[k].get();
        } else {
            for (std::size_t k = 0; k < E; ++k)
                runs[k] = run_one(config, config.epsilons[k], cloud0, src, cmp.theta_M, T, snaps[k]);
        }

        for (std::size_t k = 0; k < E; ++k) {
            if (snaps[k].size() != cmp.snapshots.size()) throw InvariantViolation("kinetic run missed a snapshot time");
            std::vector<double> dr, dj;
            for (std::size_t s = 0; s < snaps[k].size(); ++s) {
                const MomentSet m = moments_on_grid(snaps[k][s].particles, config.M, config.bandwidth);
                dr.push_back(wasserstein1_periodic(m.rho, rho_ref[s]));
                dj.push_back(bl.distance(m.j, j_ref[s]) / m.rho.integral());
            }
            cmp.rho_distance.push_back(std::move(dr));
            cmp.j_distance.push_back(std::move(dj));
            cmp.runs.push_back(std::move(runs[k]));
        }

        cmp.monotone = true;
        for (std::size_t s = 0; s < cmp.snapshots.size(); ++s) {
            std::vector<double> r, j;
            for (std::size_t k = 0; k < E; ++k) {
                r.push_back(cmp.rho_distance[k][s]);
                j.push_back(cmp.j_distance[k][s]);
            }
            cmp.rho_monotone.push_back(monotone_in_eps(r));
            cmp.j_monotone.push_back(monotone_in_eps(j));
            cmp.monotone = cmp.monotone && cmp.rho_monotone.back() && cmp.j_monotone.back();
        }
        cmp.complete = true;
    } catch (const Error& e) {
        cmp.error = e.what();
        cmp.monotone = false;
    }
    return cmp;
}

void write_sweep_report(std::ostream& out, const LimitComparison& cmp) {
    nlohmann::json j;
    j["regime"] = to_string(cmp.regime);
    j["epsilons"] = cmp.epsilons;
    j["snapshots"] = cmp.snapshots;
    j["distances"] = {{"rho_w1", cmp.rho_distance}, {"j_bounded_lipschitz", cmp.j_distance}};
    j["monotone"] = cmp.monotone;
    j["monotone_by_snapshot"] = {{"rho", cmp.rho_monotone}, {"j", cmp.j_monotone}};
    j["complete"] = cmp.complete;
    if (!cmp.error.empty()) j["error"] = cmp.error;
    j["theta_bounds"] = {{"theta_m", cmp.theta_m}, {"theta_M", cmp.theta_M}};
    nlohmann::json fits = nlohmann::json::array();
    for (const EpsilonRun& r : cmp.runs) {
        nlohmann::json f{{"eps", r.eps}, {"steps", r.steps}, {"seconds", r.seconds}};
        if (r.has_fit) {
            f["rate"] = r.theta_fit.rate;
            f["amplitude"] = r.theta_fit.amplitude;
            f["residual"] = r.theta_fit.residual;
            f["points"] = r.theta_fit.points;
            f["lemma_rate"] = 1.0 / (r.eps * cmp.theta_M * cmp.theta_M);
        } else {
            f["error"] = r.fit_error;
        }
        fits.push_back(f);
    }
    j["rate_fits"] = fits;
    out << j.dump(2) << '\n';
}

void print_sweep_summary(std::ostream& out, const LimitComparison& cmp) {
    out << "epsilon sweep (" << to_string(cmp.regime) << ")" << (cmp.complete ? "" : " INCOMPLETE") << '\n';
    if (!cmp.error.empty()) out << "  error: " << cmp.error << '\n';
    for (std::size_t k = 0; k < cmp.rho_distance.size(); ++k) {
        out << "  eps " << cmp.epsilons[k] << ':';
        for (std::size_t s = 0; s < cmp.snapshots.size(); ++s) {
            out << "  t=" << cmp.snapshots[s] << " W1=" << cmp.rho_distance[k][s] << " BL=" << cmp.j_distance[k][s];
        }
        out << '\n';
    }
    for (std::size_t s = 0; s < cmp.rho_monotone.size(); ++s) {
        out << "  t=" << cmp.snapshots[s] << " rho " << (cmp.rho_monotone[s] ? "monotone" : "NOT monotone") << ", j "
            << (cmp.j_monotone[s] ? "monotone" : "NOT monotone") << '\n';
    }
}

}  // namespace tcs
