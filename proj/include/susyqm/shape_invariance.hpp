#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "susyqm/grid.hpp"
#include "susyqm/model.hpp"
#include "susyqm/riccati.hpp"
#include "susyqm/spectra.hpp"

namespace susyqm {

/// Outcome of the shape-invariance constancy checks for a pair under a map f.
///
/// Two quantities are measured separately, because the literature's R is
/// ambiguous between them:
///   w-level: s(x) = W^2(x,a) - W^2(x,f(a)) + W'(x,f(a)) + W'(x,a)
///   r_pot:   p(x) = partner(x,a) - V(x,f(a))
/// Both must be flat in x for shape invariance. They reconcile through
///   w_identity_constant = d_shift + r_pot_constant,  d_shift = d(f(a)) - d(a),
/// which follows by eliminating V between the two Riccati equations.
struct SIReport {
    double w_identity_constant = 0.0;
    double w_identity_flatness = 0.0;
    double r_pot_constant = 0.0;
    double r_pot_flatness = 0.0;
    double d_shift = 0.0;
    double tolerance = 0.0;
    double residual_a = 0.0;  // pair's Riccati residual at a (informational)
    double residual_fa = 0.0; // and at f(a)
    bool pass = false;
};

inline SIReport si_residual(const ParametricPotential& V,
                            const FactorizationPair& pair,
                            const ParamPoint& a,
                            const ParameterMap& f,
                            const Grid& grid,
                            double rel_tol = 1e-9) {
    V.require_admissible(a);
    const ParamPoint b = f.forward(a);
    V.require_admissible(b);

    const std::vector<double> poles = V.poles(a);
    SampledFunction wa = pair.w.sampled(a, grid, poles);
    SampledFunction wb = pair.w.sampled(b, grid, poles);
    SampledFunction wda = pair.w.sampled_derivative(a, grid, poles);
    SampledFunction wdb = pair.w.sampled_derivative(b, grid, poles);
    SampledFunction vb = V.sampled(b, grid);
    SampledFunction partner_a = pair.partner(a, grid, poles);

    SampledFunction s(grid), p(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (wa.masked(i) || wb.masked(i) || wda.masked(i) || wdb.masked(i) ||
            vb.masked(i) || partner_a.masked(i)) {
            s.set_masked(i);
            p.set_masked(i);
            continue;
        }
        s.set(i, wa.value(i) * wa.value(i) - wb.value(i) * wb.value(i) +
                     wdb.value(i) + wda.value(i));
        p.set(i, partner_a.value(i) - vb.value(i));
    }
    if (s.unmasked_count() == 0)
        throw GridError("si_residual: every grid point is masked");

    SIReport rep;
    rep.w_identity_constant = s.mean();
    rep.w_identity_flatness = s.flatness();
    rep.r_pot_constant = p.mean();
    rep.r_pot_flatness = p.flatness();
    rep.d_shift = pair.energy(b) - pair.energy(a);
    rep.residual_a = riccati_residual(V, pair, a, grid).max_rel;
    rep.residual_fa = riccati_residual(V, pair, b, grid).max_rel;
    const double scale = std::max(1.0, std::max(vb.max_abs(), partner_a.max_abs()));
    rep.tolerance = rel_tol * scale;
    rep.pass = rep.w_identity_flatness < rep.tolerance && rep.r_pot_flatness < rep.tolerance;
    return rep;
}

struct LadderResult {
    std::vector<double> levels;
    bool truncated = false;
    std::string truncation_reason;
    std::size_t bound_state_count = 0;
};

/// Discrete spectrum of a shape-invariant pair by parameter recursion:
///   E_n = d(f^n(a)) + sum_{k=1..n} r_pot(f^k(a)).
/// Each visited parameter point must carry a normalizable annihilated
/// ground candidate, otherwise its factorization energy is not an
/// eigenvalue and the ladder stops there. Leaving the admissible parameter
/// region likewise truncates with the bound-state count found so far.
inline LadderResult energy_ladder(const ParametricPotential& V,
                                  const FactorizationPair& pair,
                                  const ShapeInvarianceData& si,
                                  const ParamPoint& a,
                                  std::size_t n_levels,
                                  const Grid& grid) {
    LadderResult out;
    ParamPoint cur = a;
    double shift_sum = 0.0;
    for (std::size_t n = 0; n < n_levels; ++n) {
        if (n > 0) cur = si.f.forward(cur);
        if (auto bad = V.violated(cur)) {
            out.truncated = true;
            out.truncation_reason = "parameter left the admissible region at level " +
                                    std::to_string(n) + ": " + *bad;
            break;
        }
        if (n > 0) shift_sum += si.r_pot(cur);
        AnnihilationReport ann = annihilation_check(pair, cur, grid);
        if (!ann.normalizable) {
            out.truncated = true;
            out.truncation_reason = "ground candidate not normalizable at level " +
                                    std::to_string(n) + " (" + cur.describe() + ")";
            break;
        }
        out.levels.push_back(pair.energy(cur) + shift_sum);
    }
    out.bound_state_count = out.levels.size();
    return out;
}

struct FamilySIReport {
    double lhs_flatness = 0.0; // flatness of 2 * gap'(x)
    double lhs_mean = 0.0;
    double tolerance = 0.0;
    bool keeps_si_form = false;
    // Direct flatness of v_tilde_g(x) - V(x, f(a)), when a map is supplied.
    std::optional<double> direct_flatness;
};

/// Tests whether the family member at F keeps the shape-invariance form,
/// i.e. whether the member's partner differs from the particular one by a
/// constant. That holds iff 2 gap'(x) is constant; gap' is evaluated
/// through the Riccati difference identity gap' = ±(2 W_p gap + gap^2)
/// rather than by differencing near poles.
inline FamilySIReport si_family_check(const ParametricPotential& V,
                                      const FactorizationPair& pair,
                                      const ParamPoint& a,
                                      FamilyConstant F,
                                      const Grid& grid,
                                      const ParameterMap* f = nullptr,
                                      double rel_tol = 1e-8) {
    PartnerFamilyMember m = general_solution(V, pair, a, F, grid);
    SampledFunction wp = pair.w.sampled(a, grid, V.poles(a));
    const double sgn = (pair.order == OperatorOrder::AdaggerA) ? 1.0 : -1.0;

    SampledFunction lhs(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (m.gap.masked(i) || wp.masked(i)) {
            lhs.set_masked(i);
            continue;
        }
        const double g = m.gap.value(i);
        lhs.set(i, 2.0 * sgn * (2.0 * wp.value(i) * g + g * g));
    }
    if (lhs.unmasked_count() == 0)
        throw InsufficientDataError("si_family_check: every grid point is masked");

    FamilySIReport rep;
    rep.lhs_flatness = lhs.flatness();
    rep.lhs_mean = lhs.mean();
    const double scale = std::max(1.0, V.sampled(a, grid).max_abs());
    rep.tolerance = rel_tol * scale;
    rep.keeps_si_form = rep.lhs_flatness < rep.tolerance;

    if (f) {
        const ParamPoint b = f->forward(a);
        if (!V.violated(b)) {
            SampledFunction vb = V.sampled(b, grid);
            SampledFunction diff = zip(m.v_tilde_g, vb, [](double x, double y) { return x - y; });
            if (diff.unmasked_count() > 0) rep.direct_flatness = diff.flatness();
        }
    }
    return rep;
}

struct SpecialFamilyReport {
    bool trivial_case = false; // k = 0: constant superpotential, constant partners
    double flatness_identity = 0.0;  // partner(x;k,l) - V(x;k,l)
    double flatness_reflected = 0.0; // partner(x;k,l) - V(x;-k,-l)
    double threshold = 0.0;
    bool pass = false;
};

/// Confirms that the linear-gap family W_p(x;k,l) = (2k/(kx+l) - (kx+l))/4
/// is NOT shape invariant: for both candidate parameter maps
/// (k,l) -> (k,l) and (k,l) -> (-k,-l) the difference between the partner
/// and the mapped potential keeps a k^2/(kx+l)^2 term and cannot be flat.
/// k = 0 collapses everything to constants and is reported as the trivial
/// case rather than a failure.
inline SpecialFamilyReport special_family_si_failure(double k, double l, const Grid& grid,
                                                     double rel_tol = 1e-8) {
    SpecialFamilyReport rep;
    if (k == 0.0) {
        rep.trivial_case = true;
        return rep;
    }

    auto u = [k, l](double x) { return k * x + l; };
    auto V = [&](double x) {
        const double uu = u(x);
        return uu * uu / 16.0 + 3.0 * k * k / (4.0 * uu * uu);
    };
    auto partner = [&](double x) {
        const double uu = u(x);
        return uu * uu / 16.0 - k * k / (4.0 * uu * uu) - k / 2.0;
    };
    // V(x;-k,-l) equals V(x;k,l) exactly: both maps give the same difference.
    const double pole = -l / k;
    SampledFunction diff = sample(
        grid, [&](double x) { return partner(x) - V(x); }, {pole});
    if (diff.unmasked_count() == 0)
        throw GridError("special_family_si_failure: grid sits on the pole");

    double scale = 1.0;
    scale = std::max(scale, sample(grid, V, {pole}).max_abs());
    rep.flatness_identity = diff.flatness();
    rep.flatness_reflected = rep.flatness_identity;
    rep.threshold = 10.0 * rel_tol * scale;
    rep.pass = rep.flatness_identity >= rep.threshold &&
               rep.flatness_reflected >= rep.threshold;
    return rep;
}

} // namespace susyqm
