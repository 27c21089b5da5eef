#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "susyqm/calculus.hpp"
#include "susyqm/grid.hpp"
#include "susyqm/params.hpp"

namespace susyqm {

/// Open interval, possibly a half line or the full line.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return x > lo && x < hi; }
    bool contains(const Grid& g) const { return contains(g.x_lo()) && contains(g.x_hi()); }
};

/// A named family of potentials V(x, a). `constraint` returns a description
/// of the violated predicate for inadmissible parameter points, nothing for
/// admissible ones.
struct ParametricPotential {
    std::string id;
    std::function<double(double, const ParamPoint&)> evaluate;
    Interval domain;
    std::function<std::optional<std::string>(const ParamPoint&)> constraint;
    std::function<std::vector<double>(const ParamPoint&)> singular_points;

    std::optional<std::string> violated(const ParamPoint& a) const {
        if (constraint) return constraint(a);
        return std::nullopt;
    }

    void require_admissible(const ParamPoint& a) const {
        if (auto v = violated(a))
            throw ConstraintError(id + ": parameter constraint violated: " + *v +
                                  " (got " + a.describe() + ")");
    }

    std::vector<double> poles(const ParamPoint& a) const {
        if (singular_points) return singular_points(a);
        return {};
    }

    SampledFunction sampled(const ParamPoint& a, const Grid& grid) const {
        require_admissible(a);
        auto f = [&](double x) { return evaluate(x, a); };
        return sample(grid, f, poles(a));
    }
};

/// W(x, a) together with whatever closed forms are known for it. The
/// analytic derivative and antiderivative are optional; numeric fallbacks
/// are used when they are absent.
struct Superpotential {
    std::function<double(double, const ParamPoint&)> evaluate;
    std::function<double(double, const ParamPoint&)> derivative;   // W'
    std::function<double(double, const ParamPoint&)> antiderivative; // int W dx (any constant)
    std::string description;

    bool has_derivative() const { return static_cast<bool>(derivative); }
    bool has_antiderivative() const { return static_cast<bool>(antiderivative); }

    SampledFunction sampled(const ParamPoint& a, const Grid& grid,
                            const std::vector<double>& poles = {}) const {
        auto f = [&](double x) { return evaluate(x, a); };
        return sample(grid, f, poles);
    }

    /// W' on the grid: analytic when available, finite differences otherwise.
    SampledFunction sampled_derivative(const ParamPoint& a, const Grid& grid,
                                       const std::vector<double>& poles = {}) const {
        if (derivative) {
            auto f = [&](double x) { return derivative(x, a); };
            return sample(grid, f, poles);
        }
        return susyqm::derivative(sampled(a, grid, poles));
    }
};

/// H = A†A + d  (ground candidate annihilated by A = d/dx + W), or
/// H = AA† + d  (ground candidate annihilated by A† = -d/dx + W).
enum class OperatorOrder { AdaggerA, AAdagger };

inline const char* to_string(OperatorOrder o) {
    return o == OperatorOrder::AdaggerA ? "AdaggerA" : "AAdagger";
}

/// A superpotential plus factorization energy claiming to factorize the
/// potential named by `potential_id`, in the operator order given.
///
/// `family_initial` translates the family constant F of the general Riccati
/// solution into the initial value v(x0) of the linearized equation. When
/// absent the convention is simply v(x0) = F. Families whose linearizing
/// quadratures have elementary closed forms (the special family below) ship
/// the closed-form translation so that F keeps its conventional labels.
struct FactorizationPair {
    Superpotential w;
    std::function<double(const ParamPoint&)> energy; // d(a)
    OperatorOrder order = OperatorOrder::AdaggerA;
    std::string potential_id;
    std::function<double(double /*F*/, double /*x0*/, const ParamPoint&)> family_initial;

    double initial_value(double F, double x0, const ParamPoint& a) const {
        if (family_initial) return family_initial(F, x0, a);
        return F;
    }

    /// Partner potential of this factorization on a grid:
    /// W^2 + W' + d for order A†A, W^2 - W' + d for order AA†.
    SampledFunction partner(const ParamPoint& a, const Grid& grid,
                            const std::vector<double>& poles = {}) const {
        const double sgn = (order == OperatorOrder::AdaggerA) ? 1.0 : -1.0;
        SampledFunction ws = w.sampled(a, grid, poles);
        SampledFunction wd = w.sampled_derivative(a, grid, poles);
        const double d = energy(a);
        return zip(ws, wd, [&](double W, double Wp) { return W * W + sgn * Wp + d; });
    }
};

/// Shape-invariance data for a pair: the parameter map f and the additive
/// shift r_pot in the potential identity  partner(x, a) = V(x, f(a)) + r_pot(f(a)).
/// `ladder_capable` marks maps whose iterates stay in the physical branch;
/// reflected maps that merely restate the identity algebraically are kept
/// but not offered to the energy ladder.
struct ShapeInvarianceData {
    ParameterMap f;
    std::function<double(const ParamPoint&)> r_pot;
    bool ladder_capable = true;
    std::string note;
};

struct InvarianceReport {
    double max_dev = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Checks V(x, g(a)) = V(x, a) pointwise on the grid. The default tolerance
/// is 1e-10 relative to max|V|.
inline InvarianceReport check_parameter_invariance(const ParametricPotential& V,
                                                   const ParameterMap& g,
                                                   const ParamPoint& a,
                                                   const Grid& grid,
                                                   double rel_tol = 1e-10) {
    V.require_admissible(a);
    const ParamPoint b = g.forward(a);
    V.require_admissible(b);

    SampledFunction va = V.sampled(a, grid);
    SampledFunction vb = V.sampled(b, grid);
    SampledFunction diff = zip(va, vb, [](double x, double y) { return y - x; });

    InvarianceReport rep;
    rep.max_dev = diff.max_abs();
    rep.tolerance = rel_tol * std::max(1.0, va.max_abs());
    rep.pass = rep.max_dev < rep.tolerance;
    return rep;
}

/// Transports a factorization along a parameter-invariance map g:
/// (W(x, a), d(a)) -> (W(x, g(a)), d(g(a))). Refuses when g does not
/// actually leave V fixed, since the transported pair would then factorize
/// a different potential.
inline FactorizationPair transport_factorization(const ParametricPotential& V,
                                                 const FactorizationPair& pair,
                                                 const ParameterMap& g,
                                                 const ParamPoint& a,
                                                 const Grid& grid) {
    InvarianceReport inv = check_parameter_invariance(V, g, a, grid);
    if (!inv.pass)
        throw ConstraintError("map '" + g.id() + "' does not leave " + V.id +
                              " invariant (max deviation " + std::to_string(inv.max_dev) + ")");

    FactorizationPair out = pair;
    const Superpotential base = pair.w;
    auto push = [g](const std::function<double(double, const ParamPoint&)>& fn) {
        std::function<double(double, const ParamPoint&)> wrapped;
        if (fn)
            wrapped = [g, fn](double x, const ParamPoint& b) { return fn(x, g.forward(b)); };
        return wrapped;
    };
    out.w.evaluate = push(base.evaluate);
    out.w.derivative = push(base.derivative);
    out.w.antiderivative = push(base.antiderivative);
    out.w.description = base.description + " at " + g.id();
    auto d = pair.energy;
    out.energy = [g, d](const ParamPoint& b) { return d(g.forward(b)); };
    if (pair.family_initial) {
        auto fi = pair.family_initial;
        out.family_initial = [g, fi](double F, double x0, const ParamPoint& b) {
            return fi(F, x0, g.forward(b));
        };
    }
    return out;
}

/// Alternative factorization of H(a) derived from shape invariance:
/// H(a) = A(f^{-1}(a)) A†(f^{-1}(a)) + d(f^{-1}(a)) - r_pot(a),
/// i.e. the same superpotential family at the back-shifted parameter,
/// in reversed operator order, at a shifted energy.
inline FactorizationPair alternate_factorization_from_si(const ParametricPotential& V,
                                                         const FactorizationPair& pair,
                                                         const ShapeInvarianceData& si,
                                                         const ParamPoint& a) {
    if (pair.order != OperatorOrder::AdaggerA)
        throw ConstraintError("alternate factorization expects an AdaggerA-ordered input pair");
    const ParamPoint back = si.f.inverse(a);
    V.require_admissible(a);
    V.require_admissible(back);

    FactorizationPair out = pair;
    const Superpotential base = pair.w;
    const ParameterMap f = si.f;
    auto push = [f](const std::function<double(double, const ParamPoint&)>& fn) {
        std::function<double(double, const ParamPoint&)> wrapped;
        if (fn)
            wrapped = [f, fn](double x, const ParamPoint& b) { return fn(x, f.inverse(b)); };
        return wrapped;
    };
    out.w.evaluate = push(base.evaluate);
    out.w.derivative = push(base.derivative);
    out.w.antiderivative = push(base.antiderivative);
    out.w.description = base.description + " at inverse " + f.id();
    auto d = pair.energy;
    auto r = si.r_pot;
    out.energy = [f, d, r](const ParamPoint& b) { return d(f.inverse(b)) - r(b); };
    out.order = OperatorOrder::AAdagger;
    if (pair.family_initial) {
        auto fi = pair.family_initial;
        out.family_initial = [f, fi](double F, double x0, const ParamPoint& b) {
            return fi(F, x0, f.inverse(b));
        };
    }
    return out;
}

} // namespace susyqm
