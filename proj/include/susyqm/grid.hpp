#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "susyqm/errors.hpp"

namespace susyqm {

/// Uniform grid on [x_lo, x_hi] with a distinguished anchor point that
/// serves as the lower limit of all running integrals and as the initial
/// point of ODE marches.
class Grid {
public:
    Grid(double x_lo, double x_hi, std::size_t n, std::size_t anchor_index)
        : x_lo_(x_lo), x_hi_(x_hi), n_(n), anchor_(anchor_index) {
        if (!(x_hi > x_lo))
            throw GridError("grid endpoints must satisfy x_hi > x_lo");
        if (n < 16)
            throw GridError("grid needs at least 16 points");
        if (anchor_index >= n)
            throw GridError("anchor index out of range");
    }

    /// Grid with the anchor at the point closest to x_anchor.
    static Grid with_anchor_near(double x_lo, double x_hi, std::size_t n, double x_anchor) {
        const double h = (x_hi - x_lo) / static_cast<double>(n - 1);
        double idx = std::round((x_anchor - x_lo) / h);
        if (idx < 0) idx = 0;
        if (idx > static_cast<double>(n - 1)) idx = static_cast<double>(n - 1);
        return Grid(x_lo, x_hi, n, static_cast<std::size_t>(idx));
    }

    static Grid centered(double x_lo, double x_hi, std::size_t n) {
        return Grid(x_lo, x_hi, n, n / 2);
    }

    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }
    std::size_t size() const { return n_; }
    std::size_t anchor_index() const { return anchor_; }

    double spacing() const { return (x_hi_ - x_lo_) / static_cast<double>(n_ - 1); }

    double x(std::size_t i) const { return x_lo_ + spacing() * static_cast<double>(i); }

    double anchor_x() const { return x(anchor_); }

    bool operator==(const Grid& o) const {
        return x_lo_ == o.x_lo_ && x_hi_ == o.x_hi_ && n_ == o.n_ && anchor_ == o.anchor_;
    }

private:
    double x_lo_;
    double x_hi_;
    std::size_t n_;
    std::size_t anchor_;
};

/// A real function sampled on a Grid. Entries flagged in the mask are not
/// trusted (poles, overflowed marches) and are skipped by every reduction.
/// Unmasked entries are always finite.
class SampledFunction {
public:
    explicit SampledFunction(const Grid& grid)
        : grid_(grid),
          values_(grid.size(), 0.0),
          mask_(grid.size(), 0) {}

    SampledFunction(const Grid& grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)), mask_(grid.size(), 0) {
        if (values_.size() != grid_.size())
            throw GridError("value count does not match grid size");
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i])) mask_[i] = 1;
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double value(std::size_t i) const { return values_[i]; }
    double& value(std::size_t i) { return values_[i]; }
    bool masked(std::size_t i) const { return mask_[i] != 0; }

    void set(std::size_t i, double v) {
        values_[i] = v;
        if (!std::isfinite(v)) mask_[i] = 1;
    }
    void set_masked(std::size_t i) { mask_[i] = 1; }

    const std::vector<double>& values() const { return values_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }

    std::size_t unmasked_count() const {
        std::size_t c = 0;
        for (auto m : mask_)
            if (!m) ++c;
        return c;
    }

    double max_abs() const {
        double r = 0.0;
        bool any = false;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (mask_[i]) continue;
            any = true;
            r = std::max(r, std::abs(values_[i]));
        }
        if (!any) throw GridError("no trusted points left on grid");
        return r;
    }

    /// max - min over trusted points; the flatness measure used by every
    /// "is this constant in x" check.
    double flatness() const {
        double lo = 0.0, hi = 0.0;
        bool any = false;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (mask_[i]) continue;
            if (!any) {
                lo = hi = values_[i];
                any = true;
            } else {
                lo = std::min(lo, values_[i]);
                hi = std::max(hi, values_[i]);
            }
        }
        if (!any) throw GridError("no trusted points left on grid");
        return hi - lo;
    }

    double mean() const {
        double s = 0.0;
        std::size_t c = 0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (mask_[i]) continue;
            s += values_[i];
            ++c;
        }
        if (c == 0) throw GridError("no trusted points left on grid");
        return s / static_cast<double>(c);
    }

    /// Discrete L2 norm sqrt(h * sum v^2) over trusted points.
    double l2_norm() const {
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (mask_[i]) continue;
            s += values_[i] * values_[i];
        }
        return std::sqrt(grid_.spacing() * s);
    }

private:
    Grid grid_;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

/// Sample a closed-form function, masking points that land within
/// `clearance` of a listed singular abscissa or evaluate non-finite.
inline SampledFunction sample(const Grid& grid,
                              const std::function<double(double)>& f,
                              const std::vector<double>& singular_points = {},
                              double clearance = -1.0) {
    if (clearance < 0.0) clearance = grid.spacing();
    SampledFunction out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        bool near_pole = false;
        for (double s : singular_points) {
            if (std::abs(x - s) < clearance) {
                near_pole = true;
                break;
            }
        }
        if (near_pole) {
            out.set_masked(i);
            continue;
        }
        out.set(i, f(x));
    }
    return out;
}

/// Pointwise combination of two samples on the same grid; masks union.
template <typename Op>
inline SampledFunction zip(const SampledFunction& a, const SampledFunction& b, Op op) {
    if (!(a.grid() == b.grid()))
        throw GridError("operands live on different grids");
    SampledFunction out(a.grid());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.masked(i) || b.masked(i)) {
            out.set_masked(i);
            continue;
        }
        out.set(i, op(a.value(i), b.value(i)));
    }
    return out;
}

template <typename Op>
inline SampledFunction map(const SampledFunction& a, Op op) {
    SampledFunction out(a.grid());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.masked(i)) {
            out.set_masked(i);
            continue;
        }
        out.set(i, op(a.value(i)));
    }
    return out;
}

} // namespace susyqm
