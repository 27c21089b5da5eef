#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "susyqm/errors.hpp"

namespace susyqm {

/// An ordered set of named real parameters (the `a` every potential,
/// superpotential and factorization energy depends on).
class ParamPoint {
public:
    ParamPoint() = default;

    ParamPoint(std::initializer_list<std::pair<std::string, double>> init) {
        for (const auto& kv : init) set(kv.first, kv.second);
    }

    void set(std::string_view name, double value) {
        if (!std::isfinite(value))
            throw ConstraintError("parameter '" + std::string(name) + "' must be finite");
        for (auto& kv : items_) {
            if (kv.first == name) {
                kv.second = value;
                return;
            }
        }
        items_.emplace_back(std::string(name), value);
    }

    bool has(std::string_view name) const {
        for (const auto& kv : items_)
            if (kv.first == name) return true;
        return false;
    }

    double get(std::string_view name) const {
        for (const auto& kv : items_)
            if (kv.first == name) return kv.second;
        throw ConstraintError("missing parameter '" + std::string(name) + "'");
    }

    ParamPoint with(std::string_view name, double value) const {
        ParamPoint p = *this;
        p.set(name, value);
        return p;
    }

    const std::vector<std::pair<std::string, double>>& items() const { return items_; }

    std::string describe() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < items_.size(); ++i) {
            if (i) os << ",";
            os << items_[i].first << "=" << items_[i].second;
        }
        return os.str();
    }

private:
    std::vector<std::pair<std::string, double>> items_;
};

enum class MapKind { shape_map_f, invariance_map_g };

/// Invertible transformation of parameter points. The maps shipped here are
/// affine in each parameter, which covers every transformation the catalog
/// needs; arbitrary invertible callables are accepted through the general
/// constructor.
class ParameterMap {
public:
    using Fn = std::function<ParamPoint(const ParamPoint&)>;

    ParameterMap(std::string id, MapKind kind, Fn forward, Fn inverse)
        : id_(std::move(id)), kind_(kind), fwd_(std::move(forward)), inv_(std::move(inverse)) {}

    /// name -> scale * value + offset on one parameter, identity elsewhere.
    static ParameterMap affine(std::string id, MapKind kind, std::string param,
                               double scale, double offset) {
        if (scale == 0.0)
            throw ConstraintError("affine parameter map must be invertible (scale != 0)");
        auto fwd = [param, scale, offset](const ParamPoint& a) {
            return a.with(param, scale * a.get(param) + offset);
        };
        auto inv = [param, scale, offset](const ParamPoint& a) {
            return a.with(param, (a.get(param) - offset) / scale);
        };
        return ParameterMap(std::move(id), kind, fwd, inv);
    }

    static ParameterMap identity(std::string id = "identity") {
        auto pass = [](const ParamPoint& a) { return a; };
        return ParameterMap(std::move(id), MapKind::invariance_map_g, pass, pass);
    }

    const std::string& id() const { return id_; }
    MapKind kind() const { return kind_; }

    ParamPoint forward(const ParamPoint& a) const { return fwd_(a); }
    ParamPoint inverse(const ParamPoint& a) const { return inv_(a); }

private:
    std::string id_;
    MapKind kind_;
    Fn fwd_;
    Fn inv_;
};

} // namespace susyqm
