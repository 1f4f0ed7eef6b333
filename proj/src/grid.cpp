#include "tcs/grid.hpp"

#include <algorithm>
#include <cmath>

#include "tcs/errors.hpp"
#include "tcs/kernels.hpp"
#include "tcs/torus.hpp"

namespace tcs {

GridFn1D::GridFn1D(std::size_t M, double fill) : values_(M, fill) {
    if (M == 0) throw DimensionError("grid function needs at least one node");
}

GridFn1D::GridFn1D(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw DimensionError("grid function needs at least one node");
}

GridFn1D GridFn1D::from_function(std::size_t M, const std::function<double(double)>& f) {
    GridFn1D g(M);
    for (std::size_t i = 0; i < M; ++i) g[i] = f(g.node(i));
    return g;
}

double GridFn1D::integral() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * dx();
}

double GridFn1D::max() const { return *std::max_element(values_.begin(), values_.end()); }
double GridFn1D::min() const { return *std::min_element(values_.begin(), values_.end()); }

GridFn1D GridFn1D::rotated(long s) const {
    const long M = static_cast<long>(values_.size());
    GridFn1D out(values_.size());
    for (long i = 0; i < M; ++i) {
        long src = ((i - s) % M + M) % M;
        out[static_cast<std::size_t>(i)] = values_[static_cast<std::size_t>(src)];
    }
    return out;
}

GridFn1D sample_kernel(std::size_t M, const std::function<double(double)>& k) {
    GridFn1D row(M);
    for (std::size_t m = 0; m < M; ++m) row[m] = k(torus_displacement(row.node(m), 0.0));
    return row;
}

GridFn1D sample_influence(std::size_t M, const InfluenceFn& phi) {
    return sample_kernel(M, [&phi](double d) { return phi(std::abs(d)); });
}

GridFn1D periodic_convolve(const GridFn1D& kernel, const GridFn1D& g) {
    if (kernel.size() != g.size()) {
        throw DimensionError("periodic_convolve: kernel has " + std::to_string(kernel.size()) +
                             " nodes, field has " + std::to_string(g.size()));
    }
    const std::size_t M = g.size();
    GridFn1D out(M);
    for (std::size_t i = 0; i < M; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < M; ++j) s += kernel[(i + M - j) % M] * g[j];
        out[i] = s * g.dx();
    }
    return out;
}

GaussianDeposit::GaussianDeposit(std::size_t M, double bandwidth) : M_(M), h_(bandwidth) {
    if (M == 0) throw DimensionError("deposit grid needs at least one node");
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw ConfigError("deposit bandwidth must be positive");
    const long cap = static_cast<long>(M) / 2;
    half_width_ = std::min(cap, static_cast<long>(std::ceil(7.0 * h_ * static_cast<double>(M))));
}

void GaussianDeposit::add(std::vector<double>& out, double x, double q) const {
    const double Md = static_cast<double>(M_);
    const double dx = 1.0 / Md;
    const double xw = wrap_unit(x);
    const long M = static_cast<long>(M_);
    const long centre = static_cast<long>(std::floor(xw * Md + 0.5));
    // the window covers at most M nodes, each visited once
    const long lo = centre - half_width_;
    const long hi = std::min(centre + half_width_, lo + M - 1);
    const double inv2h2 = 1.0 / (2.0 * h_ * h_);

    double wsum = 0.0;
    thread_local std::vector<double> w;
    w.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (long k = lo; k <= hi; ++k) {
        const double d = torus_displacement(static_cast<double>(k) * dx, xw);
        const double wk = std::exp(-d * d * inv2h2);
        w[static_cast<std::size_t>(k - lo)] = wk;
        wsum += wk;
    }
    const double scale = q / (wsum * dx);
    for (long k = lo; k <= hi; ++k) {
        const long idx = ((k % M) + M) % M;
        out[static_cast<std::size_t>(idx)] += scale * w[static_cast<std::size_t>(k - lo)];
    }
}

GridFn1D GaussianDeposit::deposit(const std::vector<double>& x, const std::vector<double>& q) const {
    if (x.size() != q.size()) throw DimensionError("deposit: positions and charges differ in length");
    GridFn1D out(M_);
    for (std::size_t p = 0; p < x.size(); ++p) add(out.values(), x[p], q[p]);
    return out;
}

GridFn1D GaussianDeposit::smooth(const GridFn1D& g) const {
    if (g.size() != M_) throw DimensionError("smooth: grid size mismatch");
    GridFn1D out(M_);
    for (std::size_t j = 0; j < M_; ++j) add(out.values(), g.node(j), g[j] * g.dx());
    return out;
}

}  // namespace tcs
