#include "tcs/background.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "tcs/errors.hpp"

namespace tcs {

namespace {

// ext[d + M - 1] = row[d mod M] for d in [-(M-1), M-1]; lets the inner loop run without modulo.
std::vector<double> extend_kernel(const GridFn1D& row) {
    const long M = static_cast<long>(row.size());
    std::vector<double> ext(static_cast<std::size_t>(2 * M - 1));
    for (long d = -(M - 1); d <= M - 1; ++d) {
        ext[static_cast<std::size_t>(d + M - 1)] = row[static_cast<std::size_t>(((d % M) + M) % M)];
    }
    return ext;
}

// out_i = dx * sum_j k(x_i - x_j) g_j
void convolve_ext(const std::vector<double>& ext, const std::vector<double>& g, std::vector<double>& out) {
    const std::size_t M = g.size();
    const double dx = 1.0 / static_cast<double>(M);
    out.assign(M, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        const double* k = ext.data() + (M - 1) + i;  // k[-j] = kernel(i - j)
        double s = 0.0;
        for (std::size_t j = 0; j < M; ++j) s += *(k - j) * g[j];
        out[i] = s * dx;
    }
}

double minmod(double a, double b) noexcept {
    if (a > 0.0 && b > 0.0) return std::min(a, b);
    if (a < 0.0 && b < 0.0) return std::max(a, b);
    return 0.0;
}

void check_finite(const FluidState& s, const char* where) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s.rho[i]) || !std::isfinite(s.mom[i]) || !std::isfinite(s.energy[i])) {
            std::ostringstream os;
            os << where << ": non-finite fluid state at node " << i << ", t = " << s.t << " (rho=" << s.rho[i]
               << ", m=" << s.mom[i] << ", E=" << s.energy[i] << ")";
            throw NumericError(os.str());
        }
    }
}

struct Fluxes {
    std::vector<double> f1, f2, f3;
};

Fluxes fluxes(const FluidState& s, double floor) {
    const std::size_t M = s.size();
    Fluxes f{std::vector<double>(M), std::vector<double>(M), std::vector<double>(M)};
    for (std::size_t i = 0; i < M; ++i) {
        const double r = std::max(s.rho[i], floor);
        f.f1[i] = s.mom[i];
        f.f2[i] = s.mom[i] * s.mom[i] / r;
        f.f3[i] = s.mom[i] * s.energy[i] / r;
    }
    return f;
}

std::vector<double> limited_slope(const std::vector<double>& w) {
    const std::size_t M = w.size();
    std::vector<double> d(M);
    for (std::size_t j = 0; j < M; ++j) {
        const double wp = w[(j + 1) % M];
        const double wm = w[(j + M - 1) % M];
        d[j] = minmod(wp - w[j], w[j] - wm);
    }
    return d;
}

}  // namespace

double FluidState::node(std::size_t i) const noexcept {
    const double dx = rho.dx();
    return (static_cast<double>(i) + (parity == GridParity::staggered ? 0.5 : 0.0)) * dx;
}

GridFn1D FluidState::velocity(double rho_floor) const {
    GridFn1D u(size());
    for (std::size_t i = 0; i < size(); ++i) u[i] = mom[i] / std::max(rho[i], rho_floor);
    return u;
}

GridFn1D FluidState::internal(double rho_floor) const {
    GridFn1D e(size());
    for (std::size_t i = 0; i < size(); ++i) e[i] = energy[i] / std::max(rho[i], rho_floor);
    return e;
}

FluidState FluidState::from_primitive(const GridFn1D& rho, const GridFn1D& u, const GridFn1D& e, double t) {
    if (rho.size() != u.size() || rho.size() != e.size()) throw DimensionError("fluid state: field sizes differ");
    FluidState s;
    s.rho = rho;
    s.mom = GridFn1D(rho.size());
    s.energy = GridFn1D(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        s.mom[i] = rho[i] * u[i];
        s.energy[i] = rho[i] * e[i];
    }
    s.t = t;
    return s;
}

SourceTerms tcs_source(const FluidState& state, const FluidParams& params) {
    const std::size_t M = state.size();
    std::vector<double> a(M), b(M), ra(M), rb(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double r = state.rho[i];
        if (!(r >= params.rho_floor)) {
            std::ostringstream os;
            os << "background density " << r << " below floor " << params.rho_floor << " at node " << i
               << ", t = " << state.t;
            throw DomainError(os.str());
        }
        if (!(state.energy[i] > 0.0)) {
            std::ostringstream os;
            os << "background internal energy not positive at node " << i << ", t = " << state.t;
            throw DomainError(os.str());
        }
        a[i] = state.mom[i] / state.energy[i];  // u/e
        b[i] = r / state.energy[i];             // 1/e
        ra[i] = r * a[i];
        rb[i] = r * b[i];
    }
    const auto phi_ext = extend_kernel(sample_influence(M, params.phi));
    const auto zeta_ext = extend_kernel(sample_influence(M, params.zeta));

    std::vector<double> phi_ra, phi_r, zeta_rb, zeta_r;
    convolve_ext(phi_ext, ra, phi_ra);
    convolve_ext(phi_ext, state.rho.values(), phi_r);
    convolve_ext(zeta_ext, rb, zeta_rb);
    if (params.zeta.kind() == params.phi.kind() && params.zeta.lambda() == params.phi.lambda() &&
        params.zeta.eps() == params.phi.eps()) {
        zeta_r = phi_r;
    } else {
        convolve_ext(zeta_ext, state.rho.values(), zeta_r);
    }

    SourceTerms s{GridFn1D(M), GridFn1D(M)};
    for (std::size_t i = 0; i < M; ++i) {
        const double r = state.rho[i];
        s.momentum[i] = r * (phi_ra[i] - a[i] * phi_r[i]);
        s.energy[i] = r * (b[i] * zeta_r[i] - zeta_rb[i]);
    }
    return s;
}

double max_stable_dt(const FluidState& state, const FluidParams& params) {
    double speed = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        speed = std::max(speed, std::abs(state.mom[i] / std::max(state.rho[i], params.rho_floor)) + 1.0);
    }
    return params.cfl * state.rho.dx() / speed;
}

FluidState nt_step(const FluidState& state, double dt, const FluidParams& params) {
    if (!(dt > 0.0)) throw ConfigError("nt_step: dt must be positive");
    const double dt_max = max_stable_dt(state, params);
    if (dt > dt_max * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "nt_step: dt = " << dt << " violates CFL bound " << dt_max << " (cfl " << params.cfl << ")";
        throw ConfigError(os.str());
    }
    const std::size_t M = state.size();
    const double dx = state.rho.dx();

    const std::vector<const std::vector<double>*> w = {&state.rho.values(), &state.mom.values(),
                                                       &state.energy.values()};
    const Fluxes f = fluxes(state, params.rho_floor);
    const std::vector<const std::vector<double>*> fv = {&f.f1, &f.f2, &f.f3};
    const SourceTerms g = tcs_source(state, params);
    const std::vector<const std::vector<double>*> gv = {nullptr, &g.momentum.values(), &g.energy.values()};

    FluidState half = state;
    std::vector<std::vector<double>> wslope(3);
    for (int c = 0; c < 3; ++c) {
        wslope[c] = limited_slope(*w[c]);
        const auto fslope = limited_slope(*fv[c]);
        std::vector<double>& target = c == 0 ? half.rho.values() : (c == 1 ? half.mom.values() : half.energy.values());
        for (std::size_t j = 0; j < M; ++j) {
            const double src = gv[c] ? (*gv[c])[j] : 0.0;
            target[j] = (*w[c])[j] + 0.5 * dt * (src - fslope[j] / dx);
        }
    }
    half.t = state.t + 0.5 * dt;
    check_finite(half, "nt_step predictor");

    const Fluxes fh = fluxes(half, params.rho_floor);
    const std::vector<const std::vector<double>*> fhv = {&fh.f1, &fh.f2, &fh.f3};
    const SourceTerms gh = tcs_source(half, params);
    const std::vector<const std::vector<double>*> ghv = {nullptr, &gh.momentum.values(), &gh.energy.values()};

    FluidState next;
    next.parity = state.parity == GridParity::regular ? GridParity::staggered : GridParity::regular;
    next.rho = GridFn1D(M);
    next.mom = GridFn1D(M);
    next.energy = GridFn1D(M);
    next.t = state.t + dt;
    const bool to_staggered = state.parity == GridParity::regular;
    for (int c = 0; c < 3; ++c) {
        std::vector<double>& out = c == 0 ? next.rho.values() : (c == 1 ? next.mom.values() : next.energy.values());
        for (std::size_t j = 0; j < M; ++j) {
            // regular -> staggered: out[j] sits at x_{j+1/2}; staggered -> regular: out[j] sits at x_j
            const std::size_t L = to_staggered ? j : (j + M - 1) % M;
            const std::size_t R = to_staggered ? (j + 1) % M : j;
            double v = 0.5 * ((*w[c])[L] + (*w[c])[R]) + 0.125 * (wslope[c][L] - wslope[c][R]) +
                       (dt / dx) * ((*fhv[c])[L] - (*fhv[c])[R]);
            if (ghv[c]) v += 0.5 * dt * ((*ghv[c])[L] + (*ghv[c])[R]);
            out[j] = v;
        }
    }
    check_finite(next, "nt_step corrector");
    return next;
}

MeanQuantities mean_quantities(const FluidState& state, double rho_floor) {
    const std::size_t M = state.size();
    const double dx = state.rho.dx();
    double inv = 0.0, ratio = 0.0;
    double umin = 1e300, umax = -1e300, emin = 1e300, emax = -1e300;
    for (std::size_t i = 0; i < M; ++i) {
        const double r = std::max(state.rho[i], rho_floor);
        const double u = state.mom[i] / r;
        const double e = state.energy[i] / r;
        inv += state.rho[i] / e;
        ratio += state.rho[i] * u / e;
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        emin = std::min(emin, e);
        emax = std::max(emax, e);
    }
    MeanQuantities q;
    q.theta_inf = 1.0 / (inv * dx);
    q.u_over_theta = ratio * dx;
    q.fluct_u = umax - umin;
    q.fluct_e = emax - emin;
    return q;
}

FluidState to_regular_grid(const FluidState& state) {
    if (state.parity == GridParity::regular) return state;
    const std::size_t M = state.size();
    FluidState out = state;
    out.parity = GridParity::regular;
    for (std::size_t j = 0; j < M; ++j) {
        const std::size_t L = (j + M - 1) % M;
        out.rho[j] = 0.5 * (state.rho[L] + state.rho[j]);
        out.mom[j] = 0.5 * (state.mom[L] + state.mom[j]);
        out.energy[j] = 0.5 * (state.energy[L] + state.energy[j]);
    }
    return out;
}

// --- BackgroundSource -------------------------------------------------------

BackgroundSource::BackgroundSource(const BackgroundSource& other) {
    std::shared_lock lock(other.mutex_);
    t_ = other.t_;
    theta_ = other.theta_;
    ratio_ = other.ratio_;
    constant_ = other.constant_;
}

BackgroundSource& BackgroundSource::operator=(const BackgroundSource& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_);
    std::shared_lock other_lock(other.mutex_);
    t_ = other.t_;
    theta_ = other.theta_;
    ratio_ = other.ratio_;
    constant_ = other.constant_;
    return *this;
}

BackgroundSource BackgroundSource::constant(double theta_inf, double u_over_theta, double t_end) {
    if (!(theta_inf > 0.0)) throw ConfigError("constant background: theta_inf must be positive");
    BackgroundSource s;
    s.t_ = {0.0, t_end};
    s.theta_ = {theta_inf, theta_inf};
    s.ratio_ = {u_over_theta, u_over_theta};
    s.constant_ = true;
    return s;
}

void BackgroundSource::append(double t, double theta_inf, double u_over_theta) {
    std::unique_lock lock(mutex_);
    if (constant_) throw ConfigError("cannot append to a constant background");
    if (!t_.empty() && !(t > t_.back())) throw ConfigError("background series times must increase");
    t_.push_back(t);
    theta_.push_back(theta_inf);
    ratio_.push_back(u_over_theta);
}

double BackgroundSource::interpolate(const std::vector<double>& series, double t) const {
    if (t_.empty()) throw ConfigError("background series is empty");
    if (t_.size() == 1 || t <= t_.front()) {
        if (t < t_.front() - 1e-9) throw DomainError("background queried before its first sample");
        return series.front();
    }
    if (t >= t_.back()) {
        if (t > t_.back() + 1e-9 * std::max(1.0, t_.back())) {
            std::ostringstream os;
            os << "background queried at t = " << t << " beyond its last sample " << t_.back();
            throw DomainError(os.str());
        }
        return series.back();
    }
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - t_.begin());
    const double s = (t - t_[k - 1]) / (t_[k] - t_[k - 1]);
    return (1.0 - s) * series[k - 1] + s * series[k];
}

double BackgroundSource::theta_inf(double t) const {
    std::shared_lock lock(mutex_);
    return interpolate(theta_, t);
}

double BackgroundSource::u_over_theta(double t) const {
    std::shared_lock lock(mutex_);
    return interpolate(ratio_, t);
}

std::size_t BackgroundSource::size() const {
    std::shared_lock lock(mutex_);
    return t_.size();
}

double BackgroundSource::t_begin() const {
    std::shared_lock lock(mutex_);
    return t_.empty() ? 0.0 : t_.front();
}

double BackgroundSource::t_end() const {
    std::shared_lock lock(mutex_);
    return t_.empty() ? 0.0 : t_.back();
}

double BackgroundSource::theta_min() const {
    std::shared_lock lock(mutex_);
    return *std::min_element(theta_.begin(), theta_.end());
}

double BackgroundSource::theta_max() const {
    std::shared_lock lock(mutex_);
    return *std::max_element(theta_.begin(), theta_.end());
}

double BackgroundSource::ratio_abs_max() const {
    std::shared_lock lock(mutex_);
    double m = 0.0;
    for (double r : ratio_) m = std::max(m, std::abs(r));
    return m;
}

double BackgroundSource::theta_rate_max() const {
    std::shared_lock lock(mutex_);
    double m = 0.0;
    for (std::size_t k = 1; k < t_.size(); ++k) {
        m = std::max(m, std::abs(theta_[k] - theta_[k - 1]) / (t_[k] - t_[k - 1]));
    }
    return m;
}

double BackgroundSource::theta_worst_decrease() const {
    std::shared_lock lock(mutex_);
    double worst = 0.0;
    for (std::size_t k = 1; k < theta_.size(); ++k) worst = std::min(worst, theta_[k] - theta_[k - 1]);
    return worst;
}

std::vector<double> BackgroundSource::times() const {
    std::shared_lock lock(mutex_);
    return t_;
}

// --- BackgroundSolver -------------------------------------------------------

BackgroundSolver::BackgroundSolver(FluidState initial, FluidParams params)
    : state_(std::move(initial)), params_(std::move(params)) {
    check_finite(state_, "background initial data");
    initial_totals_ = totals();
    const GridFn1D e = state_.internal(params_.rho_floor);
    e_lo_ = e.min();
    e_hi_ = e.max();
    record();
}

BackgroundSolver::Totals BackgroundSolver::totals() const {
    return {state_.rho.integral(), state_.mom.integral(), state_.energy.integral()};
}

void BackgroundSolver::record() {
    const MeanQuantities q = mean_quantities(state_, params_.rho_floor);
    records_.push_back({state_.t, q.theta_inf, q.u_over_theta, q.fluct_u, q.fluct_e});
    source_.append(state_.t, q.theta_inf, q.u_over_theta);
}

void BackgroundSolver::step(double dt) {
    state_ = nt_step(state_, dt, params_);
    ++steps_;
    const GridFn1D e = state_.internal(params_.rho_floor);
    envelope_excess_ = std::max({envelope_excess_, e_lo_ - e.min(), e.max() - e_hi_});
    record();
}

void BackgroundSolver::advance_to(double t_end) {
    while (state_.t < t_end - 1e-12) {
        const double dt = std::min(stable_dt(), t_end - state_.t);
        step(dt);
    }
}

std::shared_ptr<const BackgroundSource> BackgroundSolver::shared_source() const {
    return std::make_shared<const BackgroundSource>(source_);
}

std::shared_ptr<const BackgroundSource> precompute_background(const FluidState& initial, const FluidParams& params,
                                                              double t_end) {
    BackgroundSolver solver(initial, params);
    solver.advance_to(t_end);
    return solver.shared_source();
}

}  // namespace tcs
