#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "susyqm/calculus.hpp"
#include "susyqm/grid.hpp"
#include "susyqm/model.hpp"

namespace susyqm {

struct ResidualReport {
    double max_abs = 0.0;
    double max_rel = 0.0;   // max_abs / max(1, max|V|)
    double tolerance = 0.0; // on max_rel
    bool analytic_derivative = false;
    bool pass = false;
    SampledFunction residual;
};

/// Residual of the defining Riccati equation of a factorization pair:
///   r(x) = W^2 - W' + d - V   for order A†A,
///   r(x) = W^2 + W' + d - V   for order AA†.
/// Points within one spacing of a listed pole of V are masked, not errors.
/// The pass tolerance is relative to max(1, max|V|) on the grid, since the
/// residual is a cancellation of terms of that size: 1e-9 with analytic
/// derivatives, 1e-6 with finite-difference derivatives.
inline ResidualReport riccati_residual(const ParametricPotential& V,
                                       const FactorizationPair& pair,
                                       const ParamPoint& a,
                                       const Grid& grid,
                                       double rel_tol = -1.0) {
    V.require_admissible(a);
    if (!V.domain.contains(grid))
        throw GridError(V.id + ": grid leaves the potential domain");

    const std::vector<double> poles = V.poles(a);
    SampledFunction vs = V.sampled(a, grid);
    SampledFunction ws = pair.w.sampled(a, grid, poles);
    SampledFunction wd = pair.w.sampled_derivative(a, grid, poles);
    const double d = pair.energy(a);
    const double sgn = (pair.order == OperatorOrder::AdaggerA) ? -1.0 : 1.0;

    SampledFunction res(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (vs.masked(i) || ws.masked(i) || wd.masked(i)) {
            res.set_masked(i);
            continue;
        }
        res.set(i, ws.value(i) * ws.value(i) + sgn * wd.value(i) + d - vs.value(i));
    }
    if (res.unmasked_count() == 0)
        throw GridError("riccati residual: every grid point is masked");

    ResidualReport rep{.residual = res};
    rep.analytic_derivative = pair.w.has_derivative();
    rep.max_abs = res.max_abs();
    rep.max_rel = rep.max_abs / std::max(1.0, vs.max_abs());
    rep.tolerance = rel_tol > 0.0 ? rel_tol : (rep.analytic_derivative ? 1e-9 : 1e-6);
    rep.pass = rep.max_rel < rep.tolerance;
    return rep;
}

/// Family constant F of the general Riccati solution; the particular
/// solution is the distinguished infinite value.
struct FamilyConstant {
    double value = 0.0;
    bool infinite = false;

    static FamilyConstant inf() { return {0.0, true}; }
    static FamilyConstant of(double v) { return {v, false}; }

    bool operator==(const FamilyConstant& o) const {
        return infinite == o.infinite && (infinite || value == o.value);
    }

    std::string describe() const {
        if (infinite) return "inf";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", value);
        return buf;
    }
};

/// One member of the general-solution family built on a particular pair:
/// v solves the linearized equation, gap = W_g - W_p, and v_tilde_g is the
/// member's partner potential. Points within two spacings of a zero of v
/// (a pole of W_g) are masked.
struct PartnerFamilyMember {
    FamilyConstant F;
    SampledFunction v;
    SampledFunction w_g;
    SampledFunction v_tilde_g;
    SampledFunction gap;
    std::vector<double> nodes;

    PartnerFamilyMember(const Grid& g)
        : v(g), w_g(g), v_tilde_g(g), gap(g) {}
};

namespace detail {

inline std::vector<double> locate_sign_changes(const SampledFunction& v) {
    std::vector<double> nodes;
    const Grid& g = v.grid();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (v.masked(i) || v.masked(i + 1)) continue;
        const double a = v.value(i), b = v.value(i + 1);
        if (a == 0.0) {
            nodes.push_back(g.x(i));
        } else if (a * b < 0.0) {
            nodes.push_back(g.x(i) - a * g.spacing() / (b - a));
        }
    }
    if (!v.masked(v.size() - 1) && v.value(v.size() - 1) == 0.0)
        nodes.push_back(g.x(v.size() - 1));
    return nodes;
}

} // namespace detail

/// General solution of the pair's Riccati equation for family constant F.
///
/// For order A†A the substitution v = 1/(W_p - W) linearizes the equation to
/// v' = -2 W_p v + 1 and W_g = W_p - 1/v; for order AA† the signs mirror
/// (v' = 2 W_p v + 1, W_g = W_p + 1/v). The member's partner follows from
/// the algebraic identity  Ṽ_g = Ṽ_p + 2 gap (2 W_p + gap), which avoids
/// differencing 1/v near its poles. F = inf reproduces the particular
/// solution exactly.
inline PartnerFamilyMember general_solution(const ParametricPotential& V,
                                            const FactorizationPair& pair,
                                            const ParamPoint& a,
                                            FamilyConstant F,
                                            const Grid& grid) {
    V.require_admissible(a);
    const std::vector<double> poles = V.poles(a);
    const double sgn = (pair.order == OperatorOrder::AdaggerA) ? -1.0 : 1.0;

    SampledFunction wp = pair.w.sampled(a, grid, poles);
    SampledFunction vtp = pair.partner(a, grid, poles);

    PartnerFamilyMember m(grid);
    m.F = F;

    if (F.infinite) {
        // particular solution: gap = 0, v formally infinite
        for (std::size_t i = 0; i < grid.size(); ++i) m.v.set_masked(i);
        m.gap = SampledFunction(grid);
        m.w_g = wp;
        m.v_tilde_g = vtp;
        return m;
    }

    SampledFunction p = map(wp, [&](double W) { return 2.0 * sgn * W; });
    SampledFunction q(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) q.set(i, 1.0);
    const double v0 = pair.initial_value(F.value, grid.anchor_x(), a);
    m.v = integrate_linear_ode(p, q, v0);

    m.nodes = detail::locate_sign_changes(m.v);

    // 1/v amplifies floating-point error quadratically near its zeros, so a
    // two-spacing collar around each node is dropped from the trusted set.
    const double h = grid.spacing();
    std::vector<bool> near_node(grid.size(), false);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (double xn : m.nodes)
            if (std::abs(grid.x(i) - xn) < 2.0 * h) near_node[i] = true;

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool bad = m.v.masked(i) || near_node[i] || m.v.value(i) == 0.0 ||
                         wp.masked(i) || vtp.masked(i);
        if (bad) {
            m.gap.set_masked(i);
            m.w_g.set_masked(i);
            m.v_tilde_g.set_masked(i);
            continue;
        }
        const double gap = sgn / m.v.value(i);
        const double W = wp.value(i);
        m.gap.set(i, gap);
        m.w_g.set(i, W + gap);
        m.v_tilde_g.set(i, vtp.value(i) + 2.0 * gap * (2.0 * W + gap));
    }
    return m;
}

namespace detail {

/// Pointwise bound on the third derivative of the gap, from the Riccati
/// difference identity gap' = s(2W gap + gap^2) and its derivatives. This
/// is what a central difference of W_g cannot see; points where the implied
/// stencil truncation error h^2 |gap'''|/6 exceeds the error budget are
/// excluded from finite-difference checks on the member.
inline std::vector<bool> member_trust_mask(const FactorizationPair& pair,
                                           const ParamPoint& a,
                                           const PartnerFamilyMember& m,
                                           const Grid& grid,
                                           double tol_abs) {
    const double s2 = (pair.order == OperatorOrder::AdaggerA) ? 1.0 : -1.0;
    SampledFunction W = pair.w.sampled(a, grid);
    SampledFunction Wd = pair.w.sampled_derivative(a, grid);
    SampledFunction Wdd = derivative(Wd);

    const double h = grid.spacing();
    std::vector<bool> trusted(grid.size(), false);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (m.gap.masked(i) || W.masked(i) || Wd.masked(i) || Wdd.masked(i)) continue;
        const double g = m.gap.value(i);
        const double u = 2.0 * W.value(i);
        const double up = 2.0 * Wd.value(i);
        const double upp = 2.0 * Wdd.value(i);
        const double g1 = s2 * (u * g + g * g);
        const double g2 = s2 * up * g + (s2 * u + 2.0 * g) * g1;
        const double g3 = std::abs(s2 * upp * g) + 2.0 * std::abs(s2 * up * g1) +
                          std::abs((s2 * u + 2.0 * g) * g2) + 2.0 * g1 * g1;
        if (h * h / 6.0 * g3 <= 0.3 * tol_abs) trusted[i] = true;
    }
    return trusted;
}

} // namespace detail

struct MemberResidualReport {
    double max_abs = 0.0;
    double max_rel = 0.0;
    double tolerance = 0.0;
    double trusted_fraction = 0.0;
    bool pass = false;
};

/// Verifies that a family member's W_g satisfies the same Riccati equation
/// as the particular solution, with derivatives taken by finite differences.
/// The check is differential -- it compares the member's residual against
/// the particular pair's residual with the same stencil, so the potential,
/// the energy and the stencil's truncation floor on W_p cancel and what
/// remains is gap(2 W_p + gap) - (gap')_fd, which vanishes identically for
/// a true solution. Points whose gap curvature the stencil cannot resolve
/// at the requested tolerance are excluded (see member_trust_mask).
inline MemberResidualReport member_fd_residual(const ParametricPotential& V,
                                               const FactorizationPair& pair,
                                               const ParamPoint& a,
                                               const PartnerFamilyMember& m,
                                               const Grid& grid,
                                               double rel_tol = 1e-6) {
    SampledFunction vs = V.sampled(a, grid);
    SampledFunction wp = pair.w.sampled(a, grid, V.poles(a));
    SampledFunction wgd_fd = derivative(m.w_g);
    SampledFunction wpd_fd = derivative(wp);
    const double sgn = (pair.order == OperatorOrder::AdaggerA) ? -1.0 : 1.0;

    const double scale = std::max(1.0, vs.max_abs());
    const double tol_abs = rel_tol * scale;
    const std::vector<bool> trusted = detail::member_trust_mask(pair, a, m, grid, tol_abs);

    MemberResidualReport rep;
    std::size_t used = 0, candidates = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (m.w_g.masked(i) || wgd_fd.masked(i) || wp.masked(i) || wpd_fd.masked(i)) continue;
        ++candidates;
        if (!trusted[i]) continue;
        const double Wg = m.w_g.value(i);
        const double Wp = wp.value(i);
        const double r = (Wg * Wg - Wp * Wp) + sgn * (wgd_fd.value(i) - wpd_fd.value(i));
        rep.max_abs = std::max(rep.max_abs, std::abs(r));
        ++used;
    }
    if (used < 10)
        throw InsufficientDataError("member residual: too few resolvable points");
    rep.trusted_fraction = candidates ? static_cast<double>(used) / candidates : 0.0;
    rep.max_rel = rep.max_abs / scale;
    rep.tolerance = rel_tol;
    rep.pass = rep.max_rel < rel_tol;
    return rep;
}

/// The quadrature-side identity of a family member: its partner differs
/// from the particular partner by 2 s gap' (s = +1 for A†A order), i.e.
/// by -2 (1/v)'. Measured with a finite-difference gap' on the member's
/// resolvable region; returns the worst deviation relative to max(1,max|V|).
inline double member_partner_identity_dev(const ParametricPotential& V,
                                          const FactorizationPair& pair,
                                          const ParamPoint& a,
                                          const PartnerFamilyMember& m,
                                          const Grid& grid,
                                          double rel_tol = 1e-6) {
    SampledFunction vtp = pair.partner(a, grid, V.poles(a));
    SampledFunction gapd_fd = derivative(m.gap);
    const double s2 = (pair.order == OperatorOrder::AdaggerA) ? 1.0 : -1.0;
    const double scale = std::max(1.0, V.sampled(a, grid).max_abs());
    const std::vector<bool> trusted =
        detail::member_trust_mask(pair, a, m, grid, rel_tol * scale);

    double worst = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!trusted[i]) continue;
        if (m.v_tilde_g.masked(i) || vtp.masked(i) || gapd_fd.masked(i)) continue;
        const double dev = m.v_tilde_g.value(i) - vtp.value(i) -
                           2.0 * s2 * gapd_fd.value(i);
        worst = std::max(worst, std::abs(dev));
        ++used;
    }
    if (used < 10)
        throw InsufficientDataError("partner identity: too few resolvable points");
    return worst / scale;
}

struct DistinctnessReport {
    double sup_dev_of_difference = 0.0;
    double shift = 0.0; // mean of the difference
    double tolerance = 0.0;
    bool is_constant_shift = false;
};

/// Measures whether two family members' partners differ by a constant.
inline DistinctnessReport family_distinctness(const ParametricPotential& V,
                                              const FactorizationPair& pair,
                                              const ParamPoint& a,
                                              FamilyConstant F1,
                                              FamilyConstant F2,
                                              const Grid& grid,
                                              double rel_tol = 1e-8) {
    if (F1 == F2)
        throw ConstraintError("family_distinctness requires two distinct family constants");

    PartnerFamilyMember m1 = general_solution(V, pair, a, F1, grid);
    PartnerFamilyMember m2 = general_solution(V, pair, a, F2, grid);

    SampledFunction diff = zip(m1.v_tilde_g, m2.v_tilde_g,
                               [](double x, double y) { return x - y; });
    if (diff.unmasked_count() < 10)
        throw InsufficientDataError("family members overlap on fewer than 10 trusted points");

    double scale = 1.0;
    scale = std::max(scale, m1.v_tilde_g.max_abs());
    scale = std::max(scale, m2.v_tilde_g.max_abs());

    DistinctnessReport rep;
    rep.sup_dev_of_difference = diff.flatness();
    rep.shift = diff.mean();
    rep.tolerance = rel_tol * scale;
    rep.is_constant_shift = rep.sup_dev_of_difference < rep.tolerance;
    return rep;
}

} // namespace susyqm
