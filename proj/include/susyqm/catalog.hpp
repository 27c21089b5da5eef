#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "susyqm/model.hpp"
#include "susyqm/params.hpp"
#include "susyqm/riccati.hpp"
#include "susyqm/shape_invariance.hpp"

namespace susyqm {

/// A shipped potential family: its known factorizations, the parameter
/// maps that leave it invariant, shape-invariance data per factorization,
/// and the default grids every check runs on.
struct CatalogEntry {
    ParametricPotential potential;
    std::vector<FactorizationPair> factorizations;
    std::vector<ParameterMap> invariance_maps;

    struct SIEntry {
        std::size_t pair_index;
        ShapeInvarianceData data;
    };
    std::vector<SIEntry> si_data;

    std::string provenance_notes;

    Grid main_grid;   // residual and eigensolver checks
    Grid family_grid; // general-solution family construction
    Grid si_grid;     // shape-invariance flatness checks

    ParamPoint default_params;
    std::size_t spectral_pair = 0;          // the normalizable branch
    std::optional<std::size_t> primary_si;  // ladder-capable si_data index
};

/// Marker returned instead of an entry when a family degenerates to
/// constant functions.
struct TrivialConstantFamily {
    std::string reason;
};

/// Isotropic oscillator with centrifugal term, V(r; l) = l(l+1)/r^2 + r^2
/// on (0, inf). Carries the full four-way factorization: the base pair,
/// its transport under the reflection l -> -l-1 (which fixes l(l+1)), and
/// the two reversed-order pairs that shape invariance generates. The
/// partner shift is 2 for every l.
inline CatalogEntry radial_oscillator() {
    ParametricPotential V;
    V.id = "radial-oscillator";
    V.evaluate = [](double r, const ParamPoint& a) {
        const double l = a.get("l");
        return l * (l + 1.0) / (r * r) + r * r;
    };
    V.domain = Interval{0.0, std::numeric_limits<double>::infinity()};
    V.constraint = [](const ParamPoint& a) -> std::optional<std::string> {
        a.get("l");
        return std::nullopt;
    };

    FactorizationPair p1;
    p1.potential_id = V.id;
    p1.order = OperatorOrder::AdaggerA;
    p1.w.description = "l/r + r";
    p1.w.evaluate = [](double r, const ParamPoint& a) { return a.get("l") / r + r; };
    p1.w.derivative = [](double r, const ParamPoint& a) { return -a.get("l") / (r * r) + 1.0; };
    p1.w.antiderivative = [](double r, const ParamPoint& a) {
        return a.get("l") * std::log(r) + 0.5 * r * r;
    };
    p1.energy = [](const ParamPoint& a) { return -(2.0 * a.get("l") - 1.0); };

    ParameterMap g = ParameterMap::affine("l->-l-1", MapKind::invariance_map_g, "l", -1.0, -1.0);

    ShapeInvarianceData si1{
        ParameterMap::affine("l->l-1", MapKind::shape_map_f, "l", 1.0, -1.0),
        [](const ParamPoint&) { return 2.0; },
        true,
        "descending branch; its ground candidate is not normalizable, so the "
        "ladder gate rejects it"};
    ShapeInvarianceData si1r{
        ParameterMap::affine("l->-l", MapKind::shape_map_f, "l", -1.0, 0.0),
        [](const ParamPoint&) { return 2.0; },
        false,
        "reflection restating the same identity; not iterable"};

    const Grid main_grid(1.2e-3, 12.0, 4001, 2000);
    const Grid family_grid = Grid::with_anchor_near(0.3, 10.0, 2001, 1.0);
    const Grid si_grid = Grid::with_anchor_near(0.1, 10.0, 2001, 1.0);
    const ParamPoint a0{{"l", 2.0}};

    FactorizationPair p2 = transport_factorization(V, p1, g, a0, si_grid);
    p2.w.description = "-(l+1)/r + r";
    ShapeInvarianceData si2{
        ParameterMap::affine("l->l+1", MapKind::shape_map_f, "l", 1.0, 1.0),
        [](const ParamPoint&) { return 2.0; },
        true,
        "normalizable branch; factorization energy 2l+3 is the ground energy"};

    FactorizationPair p3 = alternate_factorization_from_si(V, p1, si1, a0);
    p3.w.description = "(l+1)/r + r";
    FactorizationPair p4 = alternate_factorization_from_si(V, p2, si2, a0);
    p4.w.description = "-l/r + r";

    CatalogEntry e{V,  {p1, p2, p3, p4}, {g}, {}, "", main_grid, family_grid,
                   si_grid, a0, 1, std::nullopt};
    e.si_data.push_back({0, si1});
    e.si_data.push_back({0, si1r});
    e.si_data.push_back({1, si2});
    e.primary_si = 2;
    e.provenance_notes =
        "Four-way factorization of the isotropic oscillator with centrifugal term: "
        "energies -(2l-1) and 2l+3 in normal order, -(2l+3) and 2l-1 in reversed "
        "order. The reflection l -> -l-1 fixes l(l+1) and swaps the branches; the "
        "partner shift is 2 for all l. Only the 2l+3 branch has a normalizable "
        "ground candidate r^(l+1) exp(-r^2/2).";
    return e;
}

/// Modified Poschl-Teller well, V(x; alpha, lambda) =
/// -alpha^2 lambda(lambda-1) / cosh^2(alpha x) on the line. Superpotentials
/// carry tanh to the first power; with the square the Riccati equations are
/// not satisfied, while with tanh both displayed partners and both
/// factorization energies come out exactly.
inline CatalogEntry poschl_teller() {
    ParametricPotential V;
    V.id = "poschl-teller";
    V.evaluate = [](double x, const ParamPoint& a) {
        const double al = a.get("alpha"), la = a.get("lambda");
        const double c = std::cosh(al * x);
        return -al * al * la * (la - 1.0) / (c * c);
    };
    V.domain = Interval{};
    V.constraint = [](const ParamPoint& a) -> std::optional<std::string> {
        const double al = a.get("alpha"), la = a.get("lambda");
        if (!(al > 0.0)) return "alpha > 0";
        if (!(la * (la - 1.0) > 0.0))
            return "lambda > 1 (or the reflected branch lambda < 0)";
        return std::nullopt;
    };

    FactorizationPair p1;
    p1.potential_id = V.id;
    p1.order = OperatorOrder::AdaggerA;
    p1.w.description = "-lambda*alpha*tanh(alpha*x)";
    p1.w.evaluate = [](double x, const ParamPoint& a) {
        const double al = a.get("alpha");
        return -a.get("lambda") * al * std::tanh(al * x);
    };
    p1.w.derivative = [](double x, const ParamPoint& a) {
        const double al = a.get("alpha");
        const double c = std::cosh(al * x);
        return -a.get("lambda") * al * al / (c * c);
    };
    p1.w.antiderivative = [](double x, const ParamPoint& a) {
        const double al = a.get("alpha");
        // log cosh without overflow for large |alpha x|
        const double t = std::abs(al * x);
        const double logcosh = t + std::log1p(std::exp(-2.0 * t)) - std::log(2.0);
        return -a.get("lambda") * logcosh;
    };
    p1.energy = [](const ParamPoint& a) {
        const double al = a.get("alpha"), la = a.get("lambda");
        return -la * la * al * al;
    };

    ParameterMap g =
        ParameterMap::affine("lambda->1-lambda", MapKind::invariance_map_g, "lambda", -1.0, 1.0);

    const Grid main_grid = Grid::centered(-12.0, 12.0, 3001);
    const ParamPoint a0{{"alpha", 1.0}, {"lambda", 4.0}};

    FactorizationPair p2 = transport_factorization(V, p1, g, a0, main_grid);
    p2.w.description = "(lambda-1)*alpha*tanh(alpha*x)";

    ShapeInvarianceData si2{
        ParameterMap::affine("lambda->lambda-1", MapKind::shape_map_f, "lambda", 1.0, -1.0),
        [](const ParamPoint&) { return 0.0; },
        true,
        "normalizable branch; ground candidate sech^(lambda-1)(alpha x)"};
    ShapeInvarianceData si2r{
        ParameterMap::affine("lambda->2-lambda", MapKind::shape_map_f, "lambda", -1.0, 2.0),
        [](const ParamPoint&) { return 0.0; },
        false,
        "reflected variant; leaves the physical branch when iterated"};
    ShapeInvarianceData si1{
        ParameterMap::affine("lambda->lambda+1", MapKind::shape_map_f, "lambda", 1.0, 1.0),
        [](const ParamPoint&) { return 0.0; },
        true,
        "ascending branch of the non-normalizable pair; the ladder gate rejects it"};
    ShapeInvarianceData si1r{
        ParameterMap::affine("lambda->-lambda", MapKind::shape_map_f, "lambda", -1.0, 0.0),
        [](const ParamPoint&) { return 0.0; },
        false,
        "reflected variant; leaves the physical branch"};

    CatalogEntry e{V,  {p1, p2}, {g}, {}, "", main_grid, main_grid,
                   main_grid, a0, 1, std::nullopt};
    e.si_data.push_back({1, si2});
    e.si_data.push_back({1, si2r});
    e.si_data.push_back({0, si1});
    e.si_data.push_back({0, si1r});
    e.primary_si = 0;
    e.provenance_notes =
        "Two normal-order factorizations with energies -lambda^2 alpha^2 and "
        "-(1-lambda)^2 alpha^2, exchanged by the reflection lambda -> 1-lambda "
        "that fixes lambda(lambda-1). Partners are -alpha^2 lambda(lambda+1) "
        "sech^2 and -alpha^2 (lambda-1)(lambda-2) sech^2; the partner shift "
        "vanishes. Bound spectrum -(lambda-1-n)^2 alpha^2.";
    return e;
}

/// The one family whose general Riccati solution contains a member with a
/// linear gap: W_p(x; k, l) = (2k/(kx+l) - (kx+l))/4, stored with d = 0
/// (any constant shift of V is equivalent). The linearizing quadratures
/// are elementary, so F keeps its conventional labels: the distinguished
/// member sits at F = 0 with v(x) = -2/(kx+l) regardless of the anchor.
inline std::variant<CatalogEntry, TrivialConstantFamily> special_family(double k, double l) {
    if (k == 0.0)
        return TrivialConstantFamily{
            "k = 0: the superpotential is constant and all partners are constant"};

    ParametricPotential V;
    V.id = "special-family";
    V.evaluate = [](double x, const ParamPoint& a) {
        const double kk = a.get("k"), u = kk * x + a.get("l");
        return u * u / 16.0 + 3.0 * kk * kk / (4.0 * u * u);
    };
    const double pole = -l / k;
    V.domain = (k > 0.0)
                   ? Interval{pole, std::numeric_limits<double>::infinity()}
                   : Interval{-std::numeric_limits<double>::infinity(), pole};
    V.constraint = [](const ParamPoint& a) -> std::optional<std::string> {
        if (a.get("k") == 0.0) return "k != 0 (k = 0 is the trivial constant family)";
        return std::nullopt;
    };
    V.singular_points = [](const ParamPoint& a) {
        return std::vector<double>{-a.get("l") / a.get("k")};
    };

    FactorizationPair p;
    p.potential_id = V.id;
    p.order = OperatorOrder::AdaggerA;
    p.w.description = "(2k/(kx+l) - (kx+l))/4";
    p.w.evaluate = [](double x, const ParamPoint& a) {
        const double kk = a.get("k"), u = kk * x + a.get("l");
        return 0.25 * (2.0 * kk / u - u);
    };
    p.w.derivative = [](double x, const ParamPoint& a) {
        const double kk = a.get("k"), u = kk * x + a.get("l");
        return -kk * kk / (2.0 * u * u) - kk / 4.0;
    };
    p.w.antiderivative = [](double x, const ParamPoint& a) {
        const double kk = a.get("k"), u = kk * x + a.get("l");
        return 0.5 * std::log(std::abs(u)) - u * u / (8.0 * kk);
    };
    p.energy = [](const ParamPoint&) { return 0.0; };
    // v(x) = (M(x) + F) / m(x) with m = (kx+l) exp(-x(kx+2l)/4) and
    // M = -2 exp(-x(kx+2l)/4), hence v(x0) = (F exp(s) - 2)/(k x0 + l),
    // s = x0 (k x0 + 2 l)/4.
    p.family_initial = [](double F, double x0, const ParamPoint& a) {
        const double kk = a.get("k"), ll = a.get("l");
        const double s = x0 * (kk * x0 + 2.0 * ll) / 4.0;
        return (F * std::exp(s) - 2.0) / (kk * x0 + ll);
    };

    ParameterMap refl(
        "(k,l)->(-k,-l)", MapKind::invariance_map_g,
        [](const ParamPoint& a) {
            return a.with("k", -a.get("k")).with("l", -a.get("l"));
        },
        [](const ParamPoint& a) {
            return a.with("k", -a.get("k")).with("l", -a.get("l"));
        });

    const Grid main_grid = Grid::with_anchor_near(0.2, 6.0, 2001, 1.0);
    // family marches anchored at the right edge: the integrating factor
    // u exp(-u^2/4k) peaks at u = sqrt(2k) and decays outward, so marching
    // leftward from the far end keeps the ODE error contraction-bounded
    const Grid family_grid(0.2, 6.0, 2001, 2000);
    const ParamPoint a0{{"k", k}, {"l", l}};

    CatalogEntry e{V,  {p}, {refl}, {}, "", main_grid, family_grid,
                   main_grid, a0, 0, std::nullopt};
    e.provenance_notes =
        "Family singled out by demanding a constant 2*gap' in the general "
        "partner family: only the F = 0 member has it (the gap is (kx+l)/2, "
        "the partner shift is k), yet the family itself is not shape invariant "
        "because partner - V keeps a k^2/(kx+l)^2 term under both candidate "
        "parameter maps. d is stored as 0; any constant shift is equivalent.";
    return e;
}

inline std::vector<std::string> entry_ids() {
    return {"radial-oscillator", "poschl-teller", "special-family"};
}

/// Builds the entry named by id. `special-family` reads k and l from the
/// parameter point; k = 0 is rejected as the trivial constant family.
inline CatalogEntry make_entry(const std::string& id, const ParamPoint& params) {
    if (id == "radial-oscillator") return radial_oscillator();
    if (id == "poschl-teller") return poschl_teller();
    if (id == "special-family") {
        const double k = params.has("k") ? params.get("k") : 1.0;
        const double l = params.has("l") ? params.get("l") : 0.0;
        auto built = special_family(k, l);
        if (std::holds_alternative<TrivialConstantFamily>(built))
            throw ConstraintError("special-family: " +
                                  std::get<TrivialConstantFamily>(built).reason);
        return std::get<CatalogEntry>(built);
    }
    std::string ids;
    for (const auto& s : entry_ids()) ids += (ids.empty() ? "" : ", ") + s;
    throw ConstraintError("unknown catalog id '" + id + "' (known: " + ids + ")");
}

struct ValidationReport {
    bool pass = true;
    std::vector<std::string> failures;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            failures.push_back(what);
        }
    }
};

/// Re-derives every catalog invariant: factorization residuals, parameter
/// invariance of the shipped maps, and flatness of every shape-invariance
/// entry, at a spread of parameter points.
inline ValidationReport validate_all() {
    ValidationReport rep;

    {
        CatalogEntry e = radial_oscillator();
        for (double l : {1.0, 2.0, 3.0}) {
            const ParamPoint a{{"l", l}};
            for (std::size_t i = 0; i < e.factorizations.size(); ++i) {
                auto r = riccati_residual(e.potential, e.factorizations[i], a, e.main_grid);
                rep.check(r.pass, "radial-oscillator pair " + std::to_string(i) +
                                      " residual at l=" + std::to_string(l));
            }
            auto inv = check_parameter_invariance(e.potential, e.invariance_maps[0], a, e.si_grid);
            rep.check(inv.pass, "radial-oscillator invariance l->-l-1 at l=" + std::to_string(l));
            for (const auto& s : e.si_data) {
                auto si = si_residual(e.potential, e.factorizations[s.pair_index], a, s.data.f,
                                      e.si_grid);
                rep.check(si.pass, "radial-oscillator si " + s.data.f.id() +
                                       " at l=" + std::to_string(l));
            }
        }
    }
    {
        CatalogEntry e = poschl_teller();
        for (auto [al, la] : {std::pair{1.0, 4.0}, std::pair{0.7, 2.5}}) {
            const ParamPoint a{{"alpha", al}, {"lambda", la}};
            for (std::size_t i = 0; i < e.factorizations.size(); ++i) {
                auto r = riccati_residual(e.potential, e.factorizations[i], a, e.main_grid);
                rep.check(r.pass, "poschl-teller pair " + std::to_string(i) + " residual at " +
                                      a.describe());
            }
            auto inv = check_parameter_invariance(e.potential, e.invariance_maps[0], a, e.si_grid);
            rep.check(inv.pass, "poschl-teller invariance at " + a.describe());
            for (const auto& s : e.si_data) {
                auto si = si_residual(e.potential, e.factorizations[s.pair_index], a, s.data.f,
                                      e.si_grid);
                rep.check(si.pass, "poschl-teller si " + s.data.f.id() + " at " + a.describe());
            }
        }
    }
    for (auto [k, l] : {std::pair{1.0, 0.0}, std::pair{2.0, 1.0}}) {
        auto built = special_family(k, l);
        const CatalogEntry& e = std::get<CatalogEntry>(built);
        auto r = riccati_residual(e.potential, e.factorizations[0], e.default_params, e.main_grid);
        rep.check(r.pass, "special-family residual at k=" + std::to_string(k));
        auto inv = check_parameter_invariance(e.potential, e.invariance_maps[0], e.default_params,
                                              e.main_grid);
        rep.check(inv.pass, "special-family reflection invariance at k=" + std::to_string(k));
    }
    return rep;
}

} // namespace susyqm
