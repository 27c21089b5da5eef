#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "susyqm/grid.hpp"

namespace susyqm {

/// First derivative by second-order finite differences: central stencil in
/// the interior, one-sided three-point stencils at the endpoints. A masked
/// input point poisons its stencil neighbours.
inline SampledFunction derivative(const SampledFunction& f) {
    const Grid& g = f.grid();
    const std::size_t n = g.size();
    const double h = g.spacing();
    SampledFunction out(g);

    auto ok = [&](std::size_t i) { return !f.masked(i); };

    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            if (ok(0) && ok(1) && ok(2))
                out.set(0, (-3.0 * f.value(0) + 4.0 * f.value(1) - f.value(2)) / (2.0 * h));
            else
                out.set_masked(0);
        } else if (i == n - 1) {
            if (ok(n - 1) && ok(n - 2) && ok(n - 3))
                out.set(n - 1, (3.0 * f.value(n - 1) - 4.0 * f.value(n - 2) + f.value(n - 3)) / (2.0 * h));
            else
                out.set_masked(n - 1);
        } else {
            if (ok(i - 1) && ok(i) && ok(i + 1))
                out.set(i, (f.value(i + 1) - f.value(i - 1)) / (2.0 * h));
            else
                out.set_masked(i);
        }
    }
    return out;
}

/// Fourth-order first derivative (five-point interior stencil, second-order
/// one-sided stencils on the two points nearest each end). Used where the
/// plain central difference would dominate a small residual.
inline SampledFunction derivative_order4(const SampledFunction& f) {
    const Grid& g = f.grid();
    const std::size_t n = g.size();
    const double h = g.spacing();
    SampledFunction out(g);

    auto ok = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j <= hi; ++j)
            if (f.masked(j)) return false;
        return true;
    };

    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2 && i + 2 < n && ok(i - 2, i + 2)) {
            out.set(i, (f.value(i - 2) - 8.0 * f.value(i - 1) + 8.0 * f.value(i + 1) - f.value(i + 2)) / (12.0 * h));
        } else if (i == 0 && ok(0, 2)) {
            out.set(0, (-3.0 * f.value(0) + 4.0 * f.value(1) - f.value(2)) / (2.0 * h));
        } else if (i == n - 1 && ok(n - 3, n - 1)) {
            out.set(n - 1, (3.0 * f.value(n - 1) - 4.0 * f.value(n - 2) + f.value(n - 3)) / (2.0 * h));
        } else if (i > 0 && i + 1 < n && ok(i - 1, i + 1)) {
            out.set(i, (f.value(i + 1) - f.value(i - 1)) / (2.0 * h));
        } else {
            out.set_masked(i);
        }
    }
    return out;
}

/// Running trapezoid integral from the grid anchor; the value at the anchor
/// is exactly zero. A masked integrand point masks everything beyond it,
/// moving away from the anchor.
inline SampledFunction cumulative_integral(const SampledFunction& f) {
    const Grid& g = f.grid();
    const std::size_t n = g.size();
    const std::size_t a = g.anchor_index();
    const double h = g.spacing();
    SampledFunction out(g);

    if (f.masked(a)) {
        for (std::size_t i = 0; i < n; ++i) out.set_masked(i);
        return out;
    }
    out.set(a, 0.0);

    bool dead = false;
    for (std::size_t i = a + 1; i < n; ++i) {
        if (dead || f.masked(i) || f.masked(i - 1)) {
            dead = true;
            out.set_masked(i);
            continue;
        }
        out.set(i, out.value(i - 1) + 0.5 * h * (f.value(i - 1) + f.value(i)));
    }
    dead = false;
    for (std::size_t k = a; k-- > 0;) {
        if (dead || f.masked(k) || f.masked(k + 1)) {
            dead = true;
            out.set_masked(k);
            continue;
        }
        out.set(k, out.value(k + 1) - 0.5 * h * (f.value(k) + f.value(k + 1)));
    }
    return out;
}

namespace detail {

// Value of a grid-sampled function at x_i + h/2 by cubic interpolation;
// keeps the RK4 march below at fourth order.
inline double half_point(const std::vector<double>& v, std::size_t i, std::size_t n) {
    if (i == 0)
        return 0.3125 * v[0] + 0.9375 * v[1] - 0.3125 * v[2] + 0.0625 * v[3];
    if (i + 2 >= n)
        return 0.0625 * v[n - 4] - 0.3125 * v[n - 3] + 0.9375 * v[n - 2] + 0.3125 * v[n - 1];
    return (-v[i - 1] + 9.0 * v[i] + 9.0 * v[i + 1] - v[i + 2]) / 16.0;
}

} // namespace detail

/// Solve y' = p(x) y + q(x) with y(anchor) = y0 by classical fourth-order
/// Runge-Kutta, marching from the anchor towards both ends. Stencil values
/// of p and q at half steps come from cubic interpolation. If the march
/// leaves the representable range the remaining points are masked instead
/// of aborting.
inline SampledFunction integrate_linear_ode(const SampledFunction& p,
                                            const SampledFunction& q,
                                            double y0) {
    if (!(p.grid() == q.grid()))
        throw GridError("p and q live on different grids");
    if (!std::isfinite(y0))
        throw GridError("initial value must be finite");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p.masked(i) || q.masked(i))
            throw GridError("ode coefficients must be finite on the whole grid");

    const Grid& g = p.grid();
    const std::size_t n = g.size();
    const std::size_t a = g.anchor_index();
    const double h = g.spacing();
    constexpr double kGuard = 1e154;

    const auto& pv = p.values();
    const auto& qv = q.values();

    SampledFunction out(g);
    out.set(a, y0);

    // One RK4 step between node i0 and node i1 (|i1 - i0| = 1); lo is
    // min(i0, i1), the index keying the half-point stencil.
    auto step = [&](double y, std::size_t i0, std::size_t i1, std::size_t lo, double dir) {
        const double ph = detail::half_point(pv, lo, n);
        const double qh = detail::half_point(qv, lo, n);
        const double hh = dir * h;
        const double k1 = pv[i0] * y + qv[i0];
        const double k2 = ph * (y + 0.5 * hh * k1) + qh;
        const double k3 = ph * (y + 0.5 * hh * k2) + qh;
        const double k4 = pv[i1] * (y + hh * k3) + qv[i1];
        return y + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    bool dead = false;
    double y = y0;
    for (std::size_t i = a + 1; i < n; ++i) {
        if (!dead) {
            y = step(y, i - 1, i, i - 1, +1.0);
            if (!std::isfinite(y) || std::abs(y) > kGuard) dead = true;
        }
        if (dead)
            out.set_masked(i);
        else
            out.set(i, y);
    }
    dead = false;
    y = y0;
    for (std::size_t k = a; k-- > 0;) {
        if (!dead) {
            y = step(y, k + 1, k, k, -1.0);
            if (!std::isfinite(y) || std::abs(y) > kGuard) dead = true;
        }
        if (dead)
            out.set_masked(k);
        else
            out.set(k, y);
    }
    return out;
}

} // namespace susyqm
