#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fjq/asymptotics.hpp"
#include "fjq/error.hpp"
#include "fjq/sim.hpp"

namespace fjq {

/// Samples mapped by x ↦ (x − center_coeff·log N)/sqrt(log N).
struct StandardizedSample {
    std::vector<double> values;
    std::size_t n_servers;
    LimitLaw law;
};

namespace detail {

inline double log_servers(std::size_t n_servers) {
    if (n_servers < 2) throw Error(Errc::InvalidParameter, "n_servers must be >= 2", "n_servers");
    return std::log(static_cast<double>(n_servers));
}

}  // namespace detail

inline StandardizedSample standardize(std::span<const double> values, const LimitLaw& law, std::size_t n_servers) {
    const double log_n = detail::log_servers(n_servers);
    const double shift = law.center_coeff * log_n;
    const double root = std::sqrt(log_n);
    StandardizedSample out{{}, n_servers, law};
    out.values.reserve(values.size());
    for (double x : values) out.values.push_back((x - shift) / root);
    return out;
}

inline StandardizedSample standardize(const SampleSet& samples, const LimitLaw& law, std::size_t n_servers) {
    return standardize(samples.values, law, n_servers);
}

/// Inverse of standardize.
inline std::vector<double> destandardize(const StandardizedSample& s) {
    const double log_n = detail::log_servers(s.n_servers);
    const double shift = s.law.center_coeff * log_n;
    const double root = std::sqrt(log_n);
    std::vector<double> out;
    out.reserve(s.values.size());
    for (double z : s.values) out.push_back(z * root + shift);
    return out;
}

}  // namespace fjq
