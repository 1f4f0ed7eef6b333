#include "tcs/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "tcs/errors.hpp"
#include "tcs/torus.hpp"

namespace tcs {

namespace {

bool same_kernel(const InfluenceFn& a, const InfluenceFn& b) {
    return a.kind() == b.kind() && a.lambda() == b.lambda() && a.eps() == b.eps();
}

void check_state(const std::vector<Particle>& ps, double t) {
    for (std::size_t p = 0; p < ps.size(); ++p) {
        const Particle& q = ps[p];
        if (!std::isfinite(q.x) || !std::isfinite(q.v) || !std::isfinite(q.theta)) {
            std::ostringstream os;
            os << "kinetic: non-finite state for particle " << p << " at t = " << t;
            throw NumericError(os.str());
        }
        if (!(q.theta > 0.0)) {
            std::ostringstream os;
            os << "kinetic: particle " << p << " has theta = " << q.theta << " at t = " << t;
            throw DomainError(os.str());
        }
    }
}

// Mean fields seen by each particle, self excluded:
//   S = sum w phi, A = sum w phi v/theta, Z = sum w zeta, B = sum w zeta/theta, H = -sum w W'.
struct Fields {
    std::vector<double> S, A, Z, B, H;
};

Fields mean_fields(const std::vector<Particle>& ps, const InfluenceFn& phi, const InfluenceFn& zeta,
                   const AggregationPotential& W) {
    const std::size_t N = ps.size();
    Fields f{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0), std::vector<double>(N, 0.0),
             std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
    const bool shared = same_kernel(phi, zeta);
    const bool aggregate = !W.is_zero();
    std::vector<double> a(N), b(N);
    for (std::size_t p = 0; p < N; ++p) {
        a[p] = ps[p].v / ps[p].theta;
        b[p] = 1.0 / ps[p].theta;
    }
    for (std::size_t i = 0; i < N; ++i) {
        const double xi = ps[i].x, wi = ps[i].weight;
        double S = 0.0, A = 0.0, Z = 0.0, B = 0.0, H = 0.0;
        for (std::size_t j = i + 1; j < N; ++j) {
            const double d = torus_displacement(xi, ps[j].x);
            const double ad = std::abs(d);
            const double wj = ps[j].weight;
            const double pv = phi(ad);
            const double zv = shared ? pv : zeta(ad);
            S += wj * pv;
            A += wj * pv * a[j];
            Z += wj * zv;
            B += wj * zv * b[j];
            f.S[j] += wi * pv;
            f.A[j] += wi * pv * a[i];
            f.Z[j] += wi * zv;
            f.B[j] += wi * zv * b[i];
            if (aggregate) {
                const double g = W.gradient(d);
                H -= wj * g;
                f.H[j] += wi * g;
            }
        }
        f.S[i] += S;
        f.A[i] += A;
        f.Z[i] += Z;
        f.B[i] += B;
        f.H[i] += H;
    }
    return f;
}

// Exponential relaxation data for one stage: v -> v_star at rate lv, theta -> th_star at rate lt.
struct Relax {
    std::vector<double> v_star, lv, th_star, lt;
};

Relax relaxation(const std::vector<Particle>& ps, const Fields& f, double eps, bool strong, double ratio,
                 double inv_theta_inf) {
    const std::size_t N = ps.size();
    Relax r{std::vector<double>(N), std::vector<double>(N), std::vector<double>(N), std::vector<double>(N)};
    for (std::size_t p = 0; p < N; ++p) {
        const double th = ps[p].theta;
        // eps dv/dt = A + H + ratio - (S + 1) v/theta
        r.lv[p] = (f.S[p] + 1.0) / (eps * th);
        r.v_star[p] = th * (f.A[p] + f.H[p] + ratio) / (f.S[p] + 1.0);
        // dtheta/dt = alpha/theta - beta
        const double alpha = strong ? (f.Z[p] + 1.0) / eps : f.Z[p] / eps + 1.0;
        const double beta = strong ? (f.B[p] + inv_theta_inf) / eps : f.B[p] / eps + inv_theta_inf;
        r.th_star[p] = alpha / beta;
        r.lt[p] = beta / th;
    }
    return r;
}

double relax_to(double y, double target, double rate, double h) { return target + (y - target) * std::exp(-rate * h); }

}  // namespace

const char* to_string(KernelFamily k) noexcept { return k == KernelFamily::regular ? "regular" : "singular"; }

void ScalingRegime::validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("epsilon must be positive");
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw ConfigError("lambda1 and lambda2 must be positive");
    if (kernels == KernelFamily::singular && lambda1 > 1.0) {
        std::ostringstream os;
        os << "singular kernels require lambda1 in (0, 1], got lambda1 = " << lambda1;
        throw ConfigError(os.str());
    }
    if (lambda3 && !(*lambda3 > 0.0)) throw ConfigError("lambda3 must be positive");
}

InfluenceFn ScalingRegime::phi() const {
    return kernels == KernelFamily::regular ? InfluenceFn::regular(lambda1) : InfluenceFn::singular(lambda1, eps);
}

InfluenceFn ScalingRegime::zeta() const {
    return kernels == KernelFamily::regular ? InfluenceFn::regular(lambda2) : InfluenceFn::singular(lambda2, eps);
}

KineticCloud::KineticCloud(std::vector<Particle> particles, ScalingRegime regime, AggregationPotential W,
                           std::shared_ptr<const BackgroundSource> background, double t0)
    : particles_(std::move(particles)),
      regime_(regime),
      W_(std::move(W)),
      phi_(InfluenceFn::unit()),
      zeta_(InfluenceFn::unit()),
      background_(std::move(background)),
      t_(t0) {
    regime_.validate();
    if (!background_) throw ConfigError("kinetic cloud needs a background source");
    if (particles_.empty()) throw ConfigError("kinetic cloud needs at least one particle");
    phi_ = regime_.phi();
    zeta_ = regime_.zeta();
    double total = 0.0;
    for (Particle& p : particles_) {
        if (!(p.weight > 0.0)) throw ConfigError("particle weights must be positive");
        p.x = wrap_unit(p.x);
        total += p.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "particle weights must sum to 1 (got " << total << ")";
        throw ConfigError(os.str());
    }
    check_state(particles_, t_);
}

void KineticCloud::set_state(std::vector<Particle> particles, double t) {
    if (particles.size() != particles_.size()) throw DimensionError("set_state: particle count changed");
    for (std::size_t p = 0; p < particles.size(); ++p) {
        if (particles[p].weight != particles_[p].weight) throw InvariantViolation("set_state: particle weight changed");
    }
    particles_ = std::move(particles);
    t_ = t;
}

KineticRates kinetic_forces(const KineticCloud& cloud, double t) {
    const auto& ps = cloud.particles();
    check_state(ps, t);
    const double eps = cloud.regime().eps;
    const bool strong = cloud.regime().relaxation == Relaxation::strong;
    const double ratio = cloud.background().u_over_theta(t);
    const double inv_theta_inf = 1.0 / cloud.background().theta_inf(t);
    const Fields f = mean_fields(ps, cloud.phi(), cloud.zeta(), cloud.potential());
    KineticRates r{std::vector<double>(ps.size()), std::vector<double>(ps.size())};
    for (std::size_t p = 0; p < ps.size(); ++p) {
        const double a = ps[p].v / ps[p].theta;
        const double b = 1.0 / ps[p].theta;
        const double F = f.A[p] - f.S[p] * a;
        const double G = f.Z[p] * b - f.B[p];
        const double Fc = ratio - a;
        const double Gc = b - inv_theta_inf;
        r.dv[p] = (F + f.H[p] + Fc) / eps;
        r.dtheta[p] = G / eps + (strong ? Gc / eps : Gc);
    }
    return r;
}

SupportDiameters support_diameters(const std::vector<Particle>& ps) {
    SupportDiameters d;
    if (ps.empty()) return d;
    double vmin = ps[0].v, vmax = ps[0].v, tmin = ps[0].theta, tmax = ps[0].theta;
    std::vector<double> xs;
    xs.reserve(ps.size());
    for (const Particle& p : ps) {
        vmin = std::min(vmin, p.v);
        vmax = std::max(vmax, p.v);
        tmin = std::min(tmin, p.theta);
        tmax = std::max(tmax, p.theta);
        d.R_x = std::max(d.R_x, torus_dist(p.x, 0.0));
        d.R_v = std::max(d.R_v, std::abs(p.v));
        xs.push_back(wrap_unit(p.x));
    }
    d.D_v = vmax - vmin;
    d.D_theta = tmax - tmin;
    // max pairwise geodesic distance: for sorted points, the farthest partner of each
    // point is the one closest to its antipode
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double target = wrap_unit(xs[i] + 0.5);
        auto it = std::lower_bound(xs.begin(), xs.end(), target);
        const std::size_t k = static_cast<std::size_t>(it - xs.begin());
        for (std::size_t c : {k % n, (k + n - 1) % n}) d.D_x = std::max(d.D_x, torus_dist(xs[i], xs[c]));
    }
    return d;
}

MomentSet moments_on_grid(const std::vector<Particle>& ps, std::size_t M, double bandwidth) {
    const GaussianDeposit dep(M, bandwidth);
    MomentSet m{GridFn1D(M), GridFn1D(M), GridFn1D(M), GridFn1D(M), GridFn1D(M), GridFn1D(M), GridFn1D(M)};
    for (const Particle& p : ps) {
        const double w = p.weight;
        dep.add(m.rho.values(), p.x, w);
        dep.add(m.j.values(), p.x, w * p.v);
        dep.add(m.h.values(), p.x, w * p.theta);
        dep.add(m.A.values(), p.x, w * p.v / p.theta);
        dep.add(m.B.values(), p.x, w / p.theta);
        dep.add(m.S_v.values(), p.x, w * p.v * p.v);
        dep.add(m.S_theta.values(), p.x, w * p.v * p.theta);
    }
    return m;
}

KineticRun advance(KineticCloud& cloud, const AdvanceOptions& options) {
    if (!(options.dt > 0.0)) throw ConfigError("advance: dt must be positive");
    if (!(options.T >= 0.0)) throw ConfigError("advance: T must be non-negative");
    const double eps = cloud.regime().eps;
    const bool strong = cloud.regime().relaxation == Relaxation::strong;
    const double h_max = std::min(options.dt, 0.25 * eps);
    const BackgroundSource& bg = cloud.background();

    KineticRun run;
    run.step_size = h_max;
    std::vector<Particle> ps = cloud.particles();
    double t = cloud.t();
    const double t_end = t + options.T;

    auto sample = [&]() {
        KineticSample s{t, ps[0].theta, ps[0].theta, 0.0, bg.theta_inf(t), 0.0, 0.0, 0.0};
        double vmin = ps[0].v, vmax = ps[0].v;
        for (const Particle& p : ps) {
            s.theta_min = std::min(s.theta_min, p.theta);
            s.theta_max = std::max(s.theta_max, p.theta);
            s.theta_mean += p.weight * p.theta;
            vmin = std::min(vmin, p.v);
            vmax = std::max(vmax, p.v);
            s.R_v = std::max(s.R_v, std::abs(p.v));
            s.v2_moment += p.weight * p.v * p.v;
        }
        s.D_v = vmax - vmin;
        run.samples.push_back(s);
    };

    std::vector<double> snaps = options.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next = 0;
    auto snapshot = [&]() {
        while (next < snaps.size() && snaps[next] <= t + 1e-12) {
            if (std::abs(snaps[next] - t) <= 1e-9) run.snapshots.push_back({t, ps});
            ++next;
        }
    };

    sample();
    snapshot();
    const std::size_t N = ps.size();
    while (t < t_end - 1e-12) {
        double h = std::min(h_max, t_end - t);
        if (next < snaps.size()) h = std::min(h, snaps[next] - t);
        const double t1 = t + h;

        const Fields f0 = mean_fields(ps, cloud.phi(), cloud.zeta(), cloud.potential());
        const Relax r0 = relaxation(ps, f0, eps, strong, bg.u_over_theta(t), 1.0 / bg.theta_inf(t));
        std::vector<Particle> pred = ps;
        for (std::size_t p = 0; p < N; ++p) {
            pred[p].v = relax_to(ps[p].v, r0.v_star[p], r0.lv[p], h);
            pred[p].theta = relax_to(ps[p].theta, r0.th_star[p], r0.lt[p], h);
            pred[p].x = wrap_unit(ps[p].x + 0.5 * h * (ps[p].v + pred[p].v));
        }
        check_state(pred, t1);

        const Fields f1 = mean_fields(pred, cloud.phi(), cloud.zeta(), cloud.potential());
        const Relax r1 = relaxation(pred, f1, eps, strong, bg.u_over_theta(t1), 1.0 / bg.theta_inf(t1));
        for (std::size_t p = 0; p < N; ++p) {
            const double v0 = ps[p].v;
            ps[p].v = relax_to(v0, 0.5 * (r0.v_star[p] + r1.v_star[p]), 0.5 * (r0.lv[p] + r1.lv[p]), h);
            ps[p].theta =
                relax_to(ps[p].theta, 0.5 * (r0.th_star[p] + r1.th_star[p]), 0.5 * (r0.lt[p] + r1.lt[p]), h);
            ps[p].x = wrap_unit(ps[p].x + 0.5 * h * (v0 + ps[p].v));
        }
        t = t1;
        check_state(ps, t);
        ++run.steps;
        sample();
        snapshot();
    }
    cloud.set_state(std::move(ps), t);
    return run;
}

double interpolate_periodic(const GridFn1D& g, double x) {
    const double M = static_cast<double>(g.size());
    const double s = wrap_unit(x) * M;
    const double fl = std::floor(s);
    const std::size_t i = static_cast<std::size_t>(fl) % g.size();
    const std::size_t j = (i + 1) % g.size();
    const double a = s - fl;
    return (1.0 - a) * g[i] + a * g[j];
}

std::vector<Particle> sample_initial_cloud(const CloudInit& init) {
    if (init.N == 0) throw ConfigError("cloud size must be positive");
    if (init.rho0.size() != init.u0.size()) throw DimensionError("cloud init: rho0 and u0 differ in size");
    if (!(init.theta_lo > 0.0) || init.theta_hi < init.theta_lo) throw ConfigError("cloud init: invalid theta range");
    if (!(init.sigma_v >= 0.0)) throw ConfigError("cloud init: sigma_v must be non-negative");
    const std::size_t M = init.rho0.size();
    const double dx = init.rho0.dx();

    // piecewise-constant density on cells [x_i - dx/2, x_i + dx/2)
    std::vector<double> cdf(M + 1, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        if (init.rho0[i] < 0.0) throw DomainError("cloud init: negative density");
        cdf[i + 1] = cdf[i] + init.rho0[i] * dx;
    }
    const double total = cdf[M];
    if (!(total > 0.0)) throw DomainError("cloud init: density has no mass");

    // Kronecker sequence with the generalized golden ratio in three dimensions
    const double g = 1.2207440846057594;
    const double alpha[3] = {1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g)};
    std::mt19937_64 gen(init.seed);
    std::uniform_real_distribution<double> shift(0.0, 1.0);
    const double off[3] = {shift(gen), shift(gen), shift(gen)};
    const boost::math::normal_distribution<double> normal;

    std::vector<Particle> ps(init.N);
    const double w = 1.0 / static_cast<double>(init.N);
    for (std::size_t n = 0; n < init.N; ++n) {
        double u[3];
        for (int k = 0; k < 3; ++k) {
            u[k] = off[k] + alpha[k] * static_cast<double>(n + 1);
            u[k] -= std::floor(u[k]);
        }
        const double target = u[0] * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        std::size_t cell = static_cast<std::size_t>(std::max<long>(0, (it - cdf.begin()) - 1));
        cell = std::min(cell, M - 1);
        const double in_cell = init.rho0[cell] > 0.0 ? (target - cdf[cell]) / (init.rho0[cell] * dx) : 0.5;
        const double x = wrap_unit(init.rho0.node(cell) + (std::clamp(in_cell, 0.0, 1.0) - 0.5) * dx);
        const double pv = std::clamp(u[1], 1e-12, 1.0 - 1e-12);
        ps[n].x = x;
        ps[n].v = interpolate_periodic(init.u0, x) + init.sigma_v * boost::math::quantile(normal, pv);
        ps[n].theta = init.theta_lo + (init.theta_hi - init.theta_lo) * u[2];
        ps[n].weight = w;
    }
    // the weights must sum to one exactly enough for the cloud invariant
    return ps;
}

ConcentrationBounds concentration_bounds(double theta_m0, double theta_M0, double bar_theta_m, double bar_theta_M,
                                         double eps) {
    if (!(theta_m0 > 0.0) || theta_M0 < theta_m0) throw ConfigError("invalid initial theta support");
    if (!(bar_theta_m > 0.0) || bar_theta_M < bar_theta_m) throw ConfigError("invalid background theta envelope");
    if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
    ConcentrationBounds b;
    b.theta_m = std::min(theta_m0, bar_theta_m);
    b.theta_M = std::max(theta_M0, bar_theta_M);
    b.decay_rate = 1.0 / (eps * b.theta_M * b.theta_M);
    const double rhs = b.theta_m * b.theta_m / b.theta_M;
    b.compat_gap = rhs - (theta_M0 - theta_m0);
    b.compatible = b.compat_gap > 0.0;
    b.strongly_concentrated = (theta_M0 - theta_m0) / eps < rhs;
    return b;
}

WeakSupportBounds weak_support_bounds(const ConcentrationBounds& b, double theta_m0, double theta_M0, double phi_sup,
                                      double ratio_sup, double grad_W_sup, double v_M0) {
    WeakSupportBounds w;
    w.C1 = 1.0 / b.theta_M - phi_sup * (theta_M0 - theta_m0) / (b.theta_m * b.theta_m);
    w.C2 = ratio_sup + grad_W_sup;
    w.v_M = w.C1 > 0.0 ? v_M0 + w.C2 / w.C1 : std::numeric_limits<double>::infinity();
    return w;
}

double moment_budget(const ConcentrationBounds& b, double D_theta0, double phi_sup, double E0, double eps, double T,
                     double v_bar_M, double bar_theta_m, double grad_W_sup) {
    const double delta = 1.0 / b.theta_M - phi_sup * D_theta0 / (b.theta_m * b.theta_m);
    if (!(delta > 0.0)) return std::numeric_limits<double>::infinity();
    const double C = 1.0 / delta;
    const double F0 = std::sqrt(T) * v_bar_M / bar_theta_m;
    const double G0 = F0 + std::sqrt(T) * grad_W_sup;
    return C * (eps * E0 + C * G0 * G0);
}

double theta_inf_rate_bound(double zeta_sup, double bar_theta_m, double bar_theta_M) {
    const double spread = bar_theta_M - bar_theta_m;
    return zeta_sup * bar_theta_M * bar_theta_M / std::pow(bar_theta_m, 5) * spread * spread;
}

}  // namespace tcs
