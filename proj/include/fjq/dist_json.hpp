#pragma once

#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "fjq/dist.hpp"
#include "fjq/error.hpp"

namespace fjq {

/// JSON form of a DistributionSpec. Keys per family:
///
///     {"family": "deterministic",    "value": v}
///     {"family": "exponential",      "rate": r}
///     {"family": "gamma",            "shape": k, "rate": r}
///     {"family": "uniform",          "lo": a, "hi": b}
///     {"family": "hyperexponential", "weights": [...], "rates": [...]}
///     {"family": "empirical",        "points": [...]}
///
/// Unknown keys are rejected.
inline nlohmann::json to_json(const DistributionSpec& spec) {
    using nlohmann::json;
    return std::visit(detail::overloaded{
                          [](const Deterministic& d) { return json{{"family", "deterministic"}, {"value", d.value}}; },
                          [](const Exponential& d) { return json{{"family", "exponential"}, {"rate", d.rate}}; },
                          [](const Gamma& d) {
                              return json{{"family", "gamma"}, {"shape", d.shape}, {"rate", d.rate}};
                          },
                          [](const Uniform& d) { return json{{"family", "uniform"}, {"lo", d.lo}, {"hi", d.hi}}; },
                          [](const HyperExponential& d) {
                              return json{{"family", "hyperexponential"}, {"weights", d.weights}, {"rates", d.rates}};
                          },
                          [](const Empirical& d) {
                              return json{{"family", "empirical"},
                                          {"points", std::vector<double>(d.points().begin(), d.points().end())}};
                          },
                      },
                      spec);
}

namespace detail {

inline void expect_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.contains(key)) throw Error(Errc::ConfigError, "unknown key '" + key + "' in distribution", key);
    for (const char* key : allowed)
        if (!j.contains(key)) throw Error(Errc::ConfigError, std::string("missing key '") + key + "'", key);
}

inline double number_at(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw Error(Errc::ConfigError, std::string("'") + key + "' must be a number", key);
    return v.get<double>();
}

inline std::vector<double> numbers_at(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_array()) throw Error(Errc::ConfigError, std::string("'") + key + "' must be an array", key);
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) throw Error(Errc::ConfigError, std::string("'") + key + "' must hold numbers", key);
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace detail

/// Parses and validates. Throws ConfigError for shape problems and
/// InvalidParameter for out-of-range values.
inline DistributionSpec distribution_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(Errc::ConfigError, "distribution must be a JSON object");
    if (!j.contains("family") || !j["family"].is_string())
        throw Error(Errc::ConfigError, "distribution needs a string 'family'", "family");
    const std::string family = j["family"].get<std::string>();
    DistributionSpec spec = Deterministic{1.0};
    if (family == "deterministic") {
        detail::expect_keys(j, {"family", "value"});
        spec = Deterministic{detail::number_at(j, "value")};
    } else if (family == "exponential") {
        detail::expect_keys(j, {"family", "rate"});
        spec = Exponential{detail::number_at(j, "rate")};
    } else if (family == "gamma") {
        detail::expect_keys(j, {"family", "shape", "rate"});
        spec = Gamma{detail::number_at(j, "shape"), detail::number_at(j, "rate")};
    } else if (family == "uniform") {
        detail::expect_keys(j, {"family", "lo", "hi"});
        spec = Uniform{detail::number_at(j, "lo"), detail::number_at(j, "hi")};
    } else if (family == "hyperexponential") {
        detail::expect_keys(j, {"family", "weights", "rates"});
        spec = HyperExponential{detail::numbers_at(j, "weights"), detail::numbers_at(j, "rates")};
    } else if (family == "empirical") {
        detail::expect_keys(j, {"family", "points"});
        spec = Empirical(detail::numbers_at(j, "points"));
    } else {
        throw Error(Errc::ConfigError, "unknown family '" + family + "'", "family");
    }
    validate(spec);
    return spec;
}

}  // namespace fjq
