#include "tcs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "tcs/errors.hpp"

namespace tcs {

double order_parameter(const GridFn1D& rho) {
    double c = 0.0, s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double a = 2.0 * std::numbers::pi * rho.node(i);
        c += std::cos(a) * rho[i];
        s += std::sin(a) * rho[i];
    }
    return std::hypot(c, s) * rho.dx();
}

double wasserstein1_periodic(const GridFn1D& a, const GridFn1D& b, double mass_tol) {
    if (a.size() != b.size()) throw DimensionError("wasserstein1_periodic: grids differ in size");
    const double ma = a.integral(), mb = b.integral();
    if (std::abs(ma - 1.0) > mass_tol || std::abs(mb - 1.0) > mass_tol) {
        std::ostringstream os;
        os << "wasserstein1_periodic: inputs must have unit mass (got " << ma << " and " << mb << ")";
        throw ConfigError(os.str());
    }
    const std::size_t M = a.size();
    const double dx = a.dx();
    std::vector<double> D(M);
    double acc = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        acc += (a[i] - b[i]) * dx;
        D[i] = acc;
    }
    std::vector<double> sorted = D;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(M / 2), sorted.end());
    const double c = sorted[M / 2];
    double w = 0.0;
    for (double d : D) w += std::abs(d - c);
    return w * dx;
}

BoundedLipschitzDual::BoundedLipschitzDual(std::size_t features, std::uint64_t seed) {
    if (features == 0) throw ConfigError("bounded-Lipschitz dual needs at least one feature");
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> freq(0, 16);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    freq_.reserve(features);
    phase_.reserve(features);
    for (std::size_t k = 0; k < features; ++k) {
        freq_.push_back(freq(gen));
        phase_.push_back(phase(gen));
    }
}

double BoundedLipschitzDual::feature(std::size_t k, double x) const {
    const double w = 2.0 * std::numbers::pi * freq_[k];
    // sup |psi| <= 1 and Lip(psi) = w / (1 + w) < 1
    return std::cos(w * x + phase_[k]) / (1.0 + w);
}

double BoundedLipschitzDual::distance(const GridFn1D& a, const GridFn1D& b) const {
    if (a.size() != b.size()) throw DimensionError("bounded-Lipschitz dual: grids differ in size");
    double best = 0.0;
    for (std::size_t k = 0; k < freq_.size(); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += feature(k, a.node(i)) * (a[i] - b[i]);
        best = std::max(best, std::abs(s) * a.dx());
    }
    return best;
}

RateFit fit_decay(const std::vector<double>& t, const std::vector<double>& values, double t_lo, double t_hi) {
    if (t.size() != values.size()) throw DimensionError("fit_decay: time and value series differ in length");
    std::vector<double> ts, ls;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t_lo || t[k] > t_hi) continue;
        if (!(values[k] > 0.0)) {
            std::ostringstream os;
            os << "fit_decay: non-positive value " << values[k] << " at t = " << t[k];
            throw ConfigError(os.str());
        }
        ts.push_back(t[k]);
        ls.push_back(std::log(values[k]));
    }
    if (ts.size() < 2) throw ConfigError("fit_decay: fewer than two samples in the fit window");
    if (*std::max_element(ls.begin(), ls.end()) == *std::min_element(ls.begin(), ls.end())) {
        throw ConfigError("fit_decay: series is constant in the fit window");
    }
    const double n = static_cast<double>(ts.size());
    double st = 0.0, sl = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        st += ts[k];
        sl += ls[k];
    }
    const double tm = st / n, lm = sl / n;
    double stt = 0.0, stl = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        stt += (ts[k] - tm) * (ts[k] - tm);
        stl += (ts[k] - tm) * (ls[k] - lm);
    }
    if (stt == 0.0) throw ConfigError("fit_decay: all samples share one time");
    const double slope = stl / stt;
    RateFit fit;
    fit.rate = -slope;
    fit.amplitude = std::exp(lm - slope * tm);
    fit.points = ts.size();
    double rss = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double r = ls[k] - (lm + slope * (ts[k] - tm));
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n);
    return fit;
}

std::pair<double, double> decay_fit_window(double eps, double theta_M) {
    return {2.0 * std::sqrt(eps), std::min(1.0, 20.0 * eps * theta_M * theta_M)};
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (!(v[k] < v[k - 1])) return false;
    }
    return true;
}

}  // namespace tcs
