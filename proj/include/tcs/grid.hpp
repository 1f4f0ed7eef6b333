/// @file grid.hpp
/// @brief Periodic scalar fields on M equispaced nodes x_i = i/M and the
///        quadrature/deposit operators built on them.

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace tcs {

class InfluenceFn;

class GridFn1D {
public:
    GridFn1D() = default;
    explicit GridFn1D(std::size_t M, double fill = 0.0);
    explicit GridFn1D(std::vector<double> values);

    static GridFn1D from_function(std::size_t M, const std::function<double(double)>& f);

    std::size_t size() const noexcept { return values_.size(); }
    double dx() const noexcept { return 1.0 / static_cast<double>(values_.size()); }
    double node(std::size_t i) const noexcept { return static_cast<double>(i) * dx(); }

    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    /// Rectangle rule: dx * sum_i g_i.
    double integral() const noexcept;
    double max() const;
    double min() const;

    /// Cyclic shift by s nodes: out[i] = in[i - s].
    GridFn1D rotated(long s) const;

private:
    std::vector<double> values_;
};

/// Samples k at the signed displacement of node m, reduced to (-1/2, 1/2].
GridFn1D sample_kernel(std::size_t M, const std::function<double(double)>& k);
GridFn1D sample_influence(std::size_t M, const InfluenceFn& phi);

/// (k * g)_i = dx sum_j k[(i - j) mod M] g_j, where k is a kernel row from sample_kernel.
/// Throws DimensionError if the sizes differ.
GridFn1D periodic_convolve(const GridFn1D& kernel, const GridFn1D& g);

/// Periodic Gaussian deposit with the normalization computed on the grid, so that
/// a unit charge deposits exactly unit mass (dx * sum = q).
class GaussianDeposit {
public:
    GaussianDeposit(std::size_t M, double bandwidth);

    std::size_t size() const noexcept { return M_; }
    double bandwidth() const noexcept { return h_; }

    /// Adds q times the normalized kernel centered at x to `out`.
    void add(std::vector<double>& out, double x, double q) const;

    /// Deposits charges q_p at positions x_p.
    GridFn1D deposit(const std::vector<double>& x, const std::vector<double>& q) const;

    /// Applies the same kernel to a grid field (each node carries charge g_j dx).
    GridFn1D smooth(const GridFn1D& g) const;

private:
    std::size_t M_;
    double h_;
    long half_width_;
};

}  // namespace tcs
