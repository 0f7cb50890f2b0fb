#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "fjq/error.hpp"
#include "fjq/sim.hpp"

namespace fjq {

/// Shortest round-trip decimal form; independent of the C locale.
inline std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string hex_digest(std::uint64_t digest) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
    return buf;
}

/// CSV with header `replication,value,censored`.
inline void write_samples_csv(std::ostream& out, const SampleSet& s) {
    out << "replication,value,censored\n";
    for (std::size_t r = 0; r < s.values.size(); ++r)
        out << r << ',' << format_number(s.values[r]) << ',' << (s.censored[r] ? 1 : 0) << '\n';
}

struct SampleRows {
    std::vector<double> values;
    std::vector<bool> censored;
};

inline SampleRows read_samples_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "replication,value,censored")
        throw Error(Errc::ConfigError, "sample CSV must start with 'replication,value,censored'");
    SampleRows rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw Error(Errc::ConfigError, "malformed sample CSV line " + std::to_string(lineno));
        double value = 0.0;
        const char* first = line.data() + c1 + 1;
        const char* last = line.data() + c2;
        const auto res = std::from_chars(first, last, value);
        if (res.ec != std::errc{} || res.ptr != last)
            throw Error(Errc::ConfigError, "bad value on sample CSV line " + std::to_string(lineno));
        rows.values.push_back(value);
        rows.censored.push_back(line.substr(c2 + 1) == "1");
    }
    return rows;
}

/// Sidecar manifest: seed, digest, horizon, statistic.
inline nlohmann::json manifest_json(const SampleSet& s) {
    nlohmann::json j;
    j["statistic"] = std::string(to_string(s.statistic));
    j["master_seed"] = s.master_seed;
    j["replications"] = s.replications;
    j["config_digest"] = hex_digest(s.config_digest);
    j["horizon"] = {{"steps", s.horizon.steps}, {"safety_factor", s.horizon.safety_factor}};
    if (s.statistic == Statistic::HittingTime) j["hitting_level"] = s.hitting_level;
    j["censored_fraction"] = s.censored_fraction();
    return j;
}

struct QqRow {
    double p;
    double empirical;
    double predicted;
};

/// CSV with header `p,empirical_quantile,predicted_quantile`.
inline void write_qq_csv(std::ostream& out, const std::vector<QqRow>& rows) {
    out << "p,empirical_quantile,predicted_quantile\n";
    for (const auto& r : rows)
        out << format_number(r.p) << ',' << format_number(r.empirical) << ',' << format_number(r.predicted) << '\n';
}

}  // namespace fjq
