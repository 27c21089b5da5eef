#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "susyqm/catalog.hpp"
#include "susyqm/model.hpp"
#include "susyqm/riccati.hpp"
#include "susyqm/shape_invariance.hpp"
#include "susyqm/spectra.hpp"

namespace susyqm::cli {

using nlohmann::json;

enum class Format { json, csv };

/// Everything a subcommand needs, parsed and validated.
struct RunConfig {
    std::string potential_id;
    ParamPoint params;
    std::optional<Grid> grid_override;
    std::vector<FamilyConstant> f_list;
    std::size_t levels = 3;
    double tol = 5e-3; // ladder-vs-eigensolver agreement tolerance
    std::string output_path;
    Format format = Format::json;
};

struct CommandResult {
    int exit_code = 0;
    std::string output;
};

// exit codes: 0 all checks pass, 1 a numeric check failed, 2 usage or
// constraint error

inline ParamPoint parse_params(const std::string& text) {
    ParamPoint p;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConstraintError("cannot parse parameter assignment '" + item +
                                  "' (expected name=value)");
        const std::string name = item.substr(0, eq);
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(item.substr(eq + 1), &used);
        } catch (const std::exception&) {
            throw ConstraintError("cannot parse value in '" + item + "'");
        }
        if (used != item.size() - eq - 1)
            throw ConstraintError("trailing characters in parameter value '" + item + "'");
        p.set(name, value);
        pos = comma + 1;
    }
    return p;
}

inline Grid parse_grid(const std::string& text) {
    double lo = 0.0, hi = 0.0;
    long n = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%ld", &lo, &hi, &n) != 3 || n < 16)
        throw ConstraintError("cannot parse grid '" + text + "' (expected lo:hi:n, n >= 16)");
    return Grid::centered(lo, hi, static_cast<std::size_t>(n));
}

inline std::vector<FamilyConstant> parse_f_list(const std::string& text) {
    std::vector<FamilyConstant> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        if (item == "inf") {
            out.push_back(FamilyConstant::inf());
        } else {
            try {
                out.push_back(FamilyConstant::of(std::stod(item)));
            } catch (const std::exception&) {
                throw ConstraintError("cannot parse family constant '" + item +
                                      "' (real number or 'inf')");
            }
        }
        pos = comma + 1;
    }
    return out;
}

namespace detail {

inline json grid_json(const Grid& g) {
    return json{{"lo", g.x_lo()}, {"hi", g.x_hi()}, {"n", g.size()},
                {"anchor_x", g.anchor_x()}};
}

inline json params_json(const ParamPoint& a) {
    json j = json::object();
    for (const auto& kv : a.items()) j[kv.first] = kv.second;
    return j;
}

inline json values_json(const SampledFunction& f) {
    json arr = json::array();
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.masked(i))
            arr.push_back(nullptr);
        else
            arr.push_back(f.value(i));
    }
    return arr;
}

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline json error_json(const std::string& msg) {
    return json{{"error", msg}};
}

inline CommandResult emit(int code, const json& j) {
    return {code, j.dump(2) + "\n"};
}

} // namespace detail

/// Riccati residuals of every shipped factorization of the chosen entry.
inline CommandResult cmd_verify(const RunConfig& cfg) {
    CatalogEntry e = make_entry(cfg.potential_id, cfg.params);
    const ParamPoint a = cfg.params.items().empty() ? e.default_params : cfg.params;
    e.potential.require_admissible(a);
    const Grid grid = cfg.grid_override.value_or(e.main_grid);

    json out;
    out["command"] = "verify";
    out["potential"] = e.potential.id;
    out["params"] = detail::params_json(a);
    out["grid"] = detail::grid_json(grid);
    json arr = json::array();
    bool all = true;
    for (std::size_t i = 0; i < e.factorizations.size(); ++i) {
        const FactorizationPair& p = e.factorizations[i];
        ResidualReport r = riccati_residual(e.potential, p, a, grid);
        all = all && r.pass;
        arr.push_back(json{{"index", i},
                           {"description", p.w.description},
                           {"order", to_string(p.order)},
                           {"energy", p.energy(a)},
                           {"max_abs", r.max_abs},
                           {"max_rel", r.max_rel},
                           {"tolerance", r.tolerance},
                           {"pass", r.pass}});
    }
    out["factorizations"] = arr;
    out["pass"] = all;
    return detail::emit(all ? 0 : 1, out);
}

/// The general-solution family: x, V, W_p and per-F member columns.
inline CommandResult cmd_family(const RunConfig& cfg) {
    CatalogEntry e = make_entry(cfg.potential_id, cfg.params);
    const ParamPoint a = cfg.params.items().empty() ? e.default_params : cfg.params;
    e.potential.require_admissible(a);
    const Grid grid = cfg.grid_override.value_or(e.family_grid);
    const FactorizationPair& pair = e.factorizations[0]; // base particular solution

    std::vector<FamilyConstant> fs = cfg.f_list;
    if (fs.empty()) fs.push_back(FamilyConstant::inf());

    SampledFunction V = e.potential.sampled(a, grid);
    SampledFunction Wp = pair.w.sampled(a, grid, e.potential.poles(a));

    std::vector<PartnerFamilyMember> members;
    for (const auto& F : fs)
        members.push_back(general_solution(e.potential, pair, a, F, grid));

    if (cfg.format == Format::csv) {
        std::string s = "x,V,W_p";
        for (const auto& F : fs) {
            s += ",w_g[F=" + F.describe() + "]";
            s += ",v_tilde_g[F=" + F.describe() + "]";
        }
        s += "\n";
        auto cell = [](const SampledFunction& f, std::size_t i) {
            return f.masked(i) ? std::string("nan") : detail::csv_num(f.value(i));
        };
        for (std::size_t i = 0; i < grid.size(); ++i) {
            s += detail::csv_num(grid.x(i));
            s += "," + cell(V, i) + "," + cell(Wp, i);
            for (const auto& m : members)
                s += "," + cell(m.w_g, i) + "," + cell(m.v_tilde_g, i);
            s += "\n";
        }
        return {0, s};
    }

    json out;
    out["command"] = "family";
    out["potential"] = e.potential.id;
    out["params"] = detail::params_json(a);
    out["grid"] = detail::grid_json(grid);
    json xs = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) xs.push_back(grid.x(i));
    out["x"] = xs;
    out["V"] = detail::values_json(V);
    out["W_p"] = detail::values_json(Wp);
    json ms = json::array();
    for (std::size_t j = 0; j < members.size(); ++j) {
        const auto& m = members[j];
        json nodes = json::array();
        for (double xn : m.nodes) nodes.push_back(xn);
        ms.push_back(json{{"F", fs[j].infinite ? json("inf") : json(fs[j].value)},
                          {"nodes", nodes},
                          {"w_g", detail::values_json(m.w_g)},
                          {"v_tilde_g", detail::values_json(m.v_tilde_g)}});
    }
    out["members"] = ms;
    return detail::emit(0, out);
}

/// Ladder energies (when shape-invariance data exists), eigensolver
/// energies, per-level deltas and annihilation diagnostics.
inline CommandResult cmd_spectrum(const RunConfig& cfg) {
    CatalogEntry e = make_entry(cfg.potential_id, cfg.params);
    const ParamPoint a = cfg.params.items().empty() ? e.default_params : cfg.params;
    e.potential.require_admissible(a);
    const Grid grid = cfg.grid_override.value_or(e.main_grid);

    json out;
    out["command"] = "spectrum";
    out["potential"] = e.potential.id;
    out["params"] = detail::params_json(a);
    out["grid"] = detail::grid_json(grid);

    json anns = json::array();
    for (std::size_t i = 0; i < e.factorizations.size(); ++i) {
        const FactorizationPair& p = e.factorizations[i];
        AnnihilationReport ann = annihilation_check(p, a, grid);
        anns.push_back(json{{"index", i},
                            {"description", p.w.description},
                            {"order", to_string(p.order)},
                            {"energy", p.energy(a)},
                            {"norm_ratio", ann.norm_ratio},
                            {"boundary_decay", ann.boundary_decay},
                            {"normalizable", ann.normalizable}});
    }
    out["annihilation"] = anns;

    SpectrumResult sp = eigen_lowest(discretize(e.potential, a, grid), cfg.levels);
    json evs = json::array();
    for (double ev : sp.eigenvalues) evs.push_back(ev);
    out["eigenvalues"] = evs;

    bool pass = true;
    if (e.primary_si) {
        const auto& sie = e.si_data[*e.primary_si];
        LadderResult lad = energy_ladder(e.potential, e.factorizations[sie.pair_index],
                                         sie.data, a, cfg.levels, grid);
        json lv = json::array();
        for (double ev : lad.levels) lv.push_back(ev);
        out["ladder"] = lv;
        out["ladder_truncated"] = lad.truncated;
        if (lad.truncated) out["ladder_truncation_reason"] = lad.truncation_reason;
        out["bound_state_count"] = lad.bound_state_count;
        json deltas = json::array();
        for (std::size_t i = 0; i < lad.levels.size() && i < sp.eigenvalues.size(); ++i) {
            const double d = lad.levels[i] - sp.eigenvalues[i];
            deltas.push_back(d);
            if (std::abs(d) > cfg.tol) pass = false;
        }
        out["deltas"] = deltas;
        out["agreement_tolerance"] = cfg.tol;
    }
    out["pass"] = pass;
    return detail::emit(pass ? 0 : 1, out);
}

/// Shape-invariance reports for every (pair, map) the entry ships, plus the
/// family sweep over the provided F list. For the special family the
/// non-invariance confirmation is included; k = 0 short-circuits to the
/// trivial constant case.
inline CommandResult cmd_si_check(const RunConfig& cfg) {
    if (cfg.potential_id == "special-family" && cfg.params.has("k") &&
        cfg.params.get("k") == 0.0) {
        json out;
        out["command"] = "si-check";
        out["potential"] = "special-family";
        out["trivial_constant_case"] = true;
        out["params"] = detail::params_json(cfg.params);
        return detail::emit(0, out);
    }

    CatalogEntry e = make_entry(cfg.potential_id, cfg.params);
    const ParamPoint a = cfg.params.items().empty() ? e.default_params : cfg.params;
    e.potential.require_admissible(a);
    const Grid si_grid = cfg.grid_override.value_or(e.si_grid);
    const Grid fam_grid = cfg.grid_override.value_or(e.family_grid);

    json out;
    out["command"] = "si-check";
    out["potential"] = e.potential.id;
    out["params"] = detail::params_json(a);
    out["grid"] = detail::grid_json(si_grid);

    bool all = true;
    json reps = json::array();
    for (const auto& s : e.si_data) {
        SIReport r = si_residual(e.potential, e.factorizations[s.pair_index], a, s.data.f, si_grid);
        all = all && r.pass;
        reps.push_back(json{{"pair_index", s.pair_index},
                            {"map", s.data.f.id()},
                            {"ladder_capable", s.data.ladder_capable},
                            {"note", s.data.note},
                            {"w_identity_constant", r.w_identity_constant},
                            {"w_identity_flatness", r.w_identity_flatness},
                            {"r_pot_constant", r.r_pot_constant},
                            {"r_pot_flatness", r.r_pot_flatness},
                            {"d_shift", r.d_shift},
                            {"tolerance", r.tolerance},
                            {"pass", r.pass}});
    }
    out["si_reports"] = reps;

    json sweep = json::array();
    const FactorizationPair& pair = e.factorizations[0];
    const ParameterMap* fmap = e.si_data.empty() ? nullptr : &e.si_data[0].data.f;
    for (const auto& F : cfg.f_list) {
        if (F.infinite) continue;
        FamilySIReport fr = si_family_check(e.potential, pair, a, F, fam_grid, fmap);
        json item{{"F", F.value},
                  {"lhs_flatness", fr.lhs_flatness},
                  {"lhs_mean", fr.lhs_mean},
                  {"keeps_si_form", fr.keeps_si_form}};
        if (fr.direct_flatness) item["direct_flatness"] = *fr.direct_flatness;
        sweep.push_back(item);
    }
    out["family_sweep"] = sweep;

    if (e.potential.id == "special-family") {
        SpecialFamilyReport sr = special_family_si_failure(a.get("k"), a.get("l"), fam_grid);
        out["non_invariance_confirmed"] = sr.pass;
        out["non_invariance_flatness"] = sr.flatness_identity;
    }

    out["pass"] = all;
    return detail::emit(all ? 0 : 1, out);
}

/// Every factorization derivable for the entry: the shipped pairs, their
/// transports under the invariance maps, and the reversed-order pairs that
/// shape invariance generates; duplicates are folded.
inline CommandResult cmd_factorizations(const RunConfig& cfg) {
    CatalogEntry e = make_entry(cfg.potential_id, cfg.params);
    const ParamPoint a = cfg.params.items().empty() ? e.default_params : cfg.params;
    e.potential.require_admissible(a);
    const Grid grid = cfg.grid_override.value_or(e.main_grid);

    struct Item {
        FactorizationPair pair;
        std::string derivation;
    };
    std::vector<Item> items;
    for (const auto& p : e.factorizations) items.push_back({p, "shipped"});

    for (const auto& g : e.invariance_maps) {
        const std::size_t base = items.size();
        for (std::size_t i = 0; i < base; ++i) {
            try {
                FactorizationPair t = transport_factorization(e.potential, items[i].pair, g, a, grid);
                items.push_back({t, "transport of " + std::to_string(i) + " under " + g.id()});
            } catch (const ConstraintError&) {
                // map not applicable at this parameter point
            }
        }
    }
    for (const auto& s : e.si_data) {
        if (e.factorizations[s.pair_index].order != OperatorOrder::AdaggerA) continue;
        try {
            FactorizationPair alt =
                alternate_factorization_from_si(e.potential, e.factorizations[s.pair_index],
                                                s.data, a);
            items.push_back({alt, "reversed order from " + std::to_string(s.pair_index) +
                                      " via " + s.data.f.id()});
        } catch (const ConstraintError&) {
        }
    }

    // fold duplicates: same order, same energy, same W at a few probes
    const double x_probe[3] = {grid.x(grid.size() / 5), grid.x(grid.size() / 2),
                               grid.x(4 * grid.size() / 5)};
    std::vector<Item> unique;
    for (auto& it : items) {
        bool dup = false;
        for (const auto& u : unique) {
            if (u.pair.order != it.pair.order) continue;
            if (std::abs(u.pair.energy(a) - it.pair.energy(a)) > 1e-10) continue;
            bool same = true;
            for (double xp : x_probe)
                if (std::abs(u.pair.w.evaluate(xp, a) - it.pair.w.evaluate(xp, a)) > 1e-10)
                    same = false;
            if (same) {
                dup = true;
                break;
            }
        }
        if (!dup) unique.push_back(std::move(it));
    }

    json out;
    out["command"] = "factorizations";
    out["potential"] = e.potential.id;
    out["params"] = detail::params_json(a);
    out["grid"] = detail::grid_json(grid);
    json arr = json::array();
    bool all = true;
    for (std::size_t i = 0; i < unique.size(); ++i) {
        ResidualReport r = riccati_residual(e.potential, unique[i].pair, a, grid);
        all = all && r.pass;
        arr.push_back(json{{"index", i},
                           {"description", unique[i].pair.w.description},
                           {"derivation", unique[i].derivation},
                           {"order", to_string(unique[i].pair.order)},
                           {"energy", unique[i].pair.energy(a)},
                           {"max_rel", r.max_rel},
                           {"valid", r.pass}});
    }
    out["factorizations"] = arr;
    out["count"] = unique.size();
    out["pass"] = all;
    return detail::emit(all ? 0 : 1, out);
}

/// Dispatch by name with uniform constraint-error handling.
inline CommandResult run_command(const std::string& name, const RunConfig& cfg) {
    try {
        if (name == "verify") return cmd_verify(cfg);
        if (name == "family") return cmd_family(cfg);
        if (name == "spectrum") return cmd_spectrum(cfg);
        if (name == "si-check") return cmd_si_check(cfg);
        if (name == "factorizations") return cmd_factorizations(cfg);
        return detail::emit(2, detail::error_json("unknown command '" + name + "'"));
    } catch (const ConstraintError& err) {
        return detail::emit(2, detail::error_json(err.what()));
    } catch (const GridError& err) {
        return detail::emit(2, detail::error_json(err.what()));
    } catch (const InsufficientDataError& err) {
        return detail::emit(2, detail::error_json(err.what()));
    }
}

} // namespace susyqm::cli
