#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "fjq/fjq.hpp"

namespace fjq::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kConfigError = 1, kDomainFailure = 2 };

/// Flags shared by every subcommand; each overrides its config counterpart.
struct Options {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> parallelism;
};

namespace detail {

inline void allow_keys(const json& j, std::initializer_list<std::initializer_list<const char*>> groups) {
    if (!j.is_object()) throw Error(Errc::ConfigError, "config must be a JSON object");
    std::set<std::string> ok;
    for (auto g : groups) ok.insert(g.begin(), g.end());
    for (const auto& [key, _] : j.items())
        if (!ok.contains(key)) throw Error(Errc::ConfigError, "unknown config key '" + key + "'", key);
}

constexpr std::initializer_list<const char*> kModelKeys = {"arrival", "service", "classes", "n_servers"};
constexpr std::initializer_list<const char*> kSimKeys = {"replications", "seed",  "statistic",
                                                         "horizon",      "level", "safety_factor",
                                                         "parallelism",  "max_censored_fraction"};
constexpr std::initializer_list<const char*> kCompareKeys = {"law",       "epsilon", "epsilon_fraction",
                                                             "threshold", "samples", "qq_points"};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(Errc::ConfigError, std::string("config key '") + key + "' has the wrong type", key);
    }
}

template <class T>
T require(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(Errc::ConfigError, std::string("missing config key '") + key + "'", key);
    return get_or<T>(j, key, T{});
}

struct Model {
    DistributionSpec arrival = Deterministic{1.0};
    ArrivalSummary summary{};
    std::vector<DistributionSpec> services;
    std::vector<double> alphas;
};

inline Model parse_model(const json& j) {
    Model m;
    if (!j.contains("arrival")) throw Error(Errc::ConfigError, "missing config key 'arrival'", "arrival");
    m.arrival = distribution_from_json(j["arrival"]);
    m.summary = summarize_arrival(m.arrival);
    const bool has_service = j.contains("service"), has_classes = j.contains("classes");
    if (has_service == has_classes)
        throw Error(Errc::ConfigError, "give exactly one of 'service' or 'classes'", "service");
    if (has_service) {
        m.services.push_back(distribution_from_json(j["service"]));
        m.alphas.push_back(1.0);
        return m;
    }
    const json& classes = j["classes"];
    if (!classes.is_array() || classes.empty())
        throw Error(Errc::ConfigError, "'classes' must be a nonempty array", "classes");
    for (const auto& c : classes) {
        allow_keys(c, {{"service", "alpha"}});
        m.services.push_back(distribution_from_json(require<json>(c, "service")));
        m.alphas.push_back(require<double>(c, "alpha"));
    }
    return m;
}

inline std::size_t n_servers_of(const json& j) {
    const auto n = require<long long>(j, "n_servers");
    if (n < 1) throw Error(Errc::InvalidParameter, "n_servers must be >= 1", "n_servers");
    return static_cast<std::size_t>(n);
}

inline ForkJoinConfig fork_join_config(const Model& m, std::size_t n_servers) {
    const auto sizes = class_sizes(m.alphas, n_servers);
    std::vector<ServerClass> classes;
    for (std::size_t k = 0; k < m.services.size(); ++k) {
        if (sizes[k] == 0)
            throw Error(Errc::InvalidParameter, "class " + std::to_string(k) + " gets no servers at this N", "classes");
        classes.push_back({m.services[k], sizes[k]});
    }
    return ForkJoinConfig::heterogeneous(m.arrival, std::move(classes));
}

inline std::vector<ClassSpec> solve_classes(const Model& m) {
    std::vector<ClassSpec> out;
    for (std::size_t k = 0; k < m.services.size(); ++k)
        out.push_back({m.services[k], m.alphas[k], solve_gamma(m.services[k], m.summary.lambda)});
    return out;
}

inline json solution_json(const LundbergSolution& s) {
    return {{"gamma", s.gamma},         {"lambda_prime", s.lambda_prime}, {"lambda_double_prime", s.lambda_double_prime},
            {"c_hat", s.c_hat},         {"interior", s.interior},         {"theta_sup", s.theta_sup}};
}

inline json law_json(const LimitLaw& law) {
    json j = {{"kind", std::string(to_string(law.kind))},
              {"center_coeff", law.center_coeff},
              {"scale", law.scale},
              {"sigma_A", law.sigma_A},
              {"c_hat", law.c_hat}};
    if (law.kind != LawKind::Normal) j["epsilon"] = law.epsilon;
    return j;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::ConfigError, "cannot write " + path.string());
    f << text;
}

struct Simulation {
    ForkJoinConfig config;
    SampleSet samples;
};

// Horizon: explicit "horizon" steps, else the largest default over the
// classes that have a Lundberg root, else the 1000-step floor.
inline Horizon choose_horizon(const json& j, const Model& m, std::size_t n_servers) {
    const double safety = get_or<double>(j, "safety_factor", 10.0);
    if (j.contains("horizon")) {
        const auto steps = require<long long>(j, "horizon");
        if (steps < 1) throw Error(Errc::InvalidParameter, "horizon must be >= 1", "horizon");
        return {static_cast<std::size_t>(steps), safety};
    }
    Horizon h{1000, safety};
    for (const auto& service : m.services) {
        try {
            const auto s = solve_gamma(service, m.summary.lambda);
            if (s.interior && n_servers >= 2) h.steps = std::max(h.steps, default_horizon(s, n_servers, safety).steps);
        } catch (const Error& e) {
            if (e.code() == Errc::Unstable) throw;
        }
    }
    return h;
}

inline Simulation simulate(const json& j, const Options& opt, Statistic fallback) {
    const Model model = parse_model(j);
    const std::size_t n = n_servers_of(j);
    Simulation sim{fork_join_config(model, n), {}};
    validate(sim.config);

    BatchRequest req;
    if (j.contains("statistic")) {
        const auto name = require<std::string>(j, "statistic");
        const auto stat = parse_statistic(name);
        if (!stat) throw Error(Errc::ConfigError, "unknown statistic '" + name + "'", "statistic");
        req.statistic = *stat;
    } else {
        req.statistic = fallback;
    }
    req.horizon = choose_horizon(j, model, n);
    req.master_seed = opt.seed.value_or(get_or<std::uint64_t>(j, "seed", 1));
    const auto reps = get_or<long long>(j, "replications", 1000);
    if (reps < 1) throw Error(Errc::InvalidParameter, "replications must be >= 1", "replications");
    req.replications = static_cast<std::size_t>(reps);
    req.parallelism = opt.parallelism.value_or(get_or<std::size_t>(j, "parallelism", 1));
    if (req.statistic == Statistic::HittingTime) {
        if (j.contains("level")) {
            req.hitting_level = require<double>(j, "level");
        } else {
            // (1/γ*) log N with γ* the smallest class root.
            double gamma = std::numeric_limits<double>::infinity();
            for (const auto& c : solve_classes(model)) gamma = std::min(gamma, c.solution.gamma);
            req.hitting_level = std::log(static_cast<double>(n)) / gamma;
        }
    }
    sim.samples = run_batch(sim.config, req);
    return sim;
}

inline json simulation_summary(const SampleSet& s, std::size_t n_servers) {
    json j = manifest_json(s);
    j["n_servers"] = n_servers;
    const auto kept = s.uncensored();
    double mean = 0.0;
    for (double v : kept) mean += v;
    j["mean_uncensored"] = kept.empty() ? 0.0 : mean / static_cast<double>(kept.size());
    return j;
}

struct Verdict {
    json report;
    bool pass;
};

inline Verdict compare(const json& j, const Options& opt) {
    const std::string law_name = get_or<std::string>(j, "law", "wait");
    const Model model = parse_model(j);
    const std::size_t n = n_servers_of(j);
    if (n < 2) throw Error(Errc::InvalidParameter, "compare needs n_servers >= 2", "n_servers");

    const auto classes = solve_classes(model);
    const HeteroSelection pick = hetero_select(classes, model.summary.sigma_A);
    const LundbergSolution& sol = classes[pick.k_star].solution;

    LimitLaw law;
    Statistic fallback = Statistic::MaxWaitSup;
    double default_threshold = 0.10;
    if (law_name == "wait") {
        law = pick.law;
    } else if (law_name == "queue") {
        law = queue_limit_law(sol, model.summary.lambda, model.summary.sigma_A);
        fallback = Statistic::MaxQueueLittle;
        default_threshold = 0.12;
    } else if (law_name == "lower-bound" || law_name == "upper-bound") {
        const double eps =
            j.contains("epsilon") ? require<double>(j, "epsilon") : get_or<double>(j, "epsilon_fraction", 0.1) * sol.c_hat;
        law = bound_law(law_name == "lower-bound" ? LawKind::LowerBoundMix : LawKind::UpperBoundMix, sol,
                        model.summary.sigma_A, eps);
    } else {
        throw Error(Errc::ConfigError, "law must be one of wait, queue, lower-bound, upper-bound", "law");
    }
    const double threshold = get_or<double>(j, "threshold", default_threshold);

    std::vector<double> values;
    json provenance;
    if (j.contains("samples")) {
        const auto path = require<std::string>(j, "samples");
        std::ifstream f(path);
        if (!f) throw Error(Errc::ConfigError, "cannot read samples file " + path, "samples");
        const SampleRows rows = read_samples_csv(f);
        for (std::size_t r = 0; r < rows.values.size(); ++r)
            if (!rows.censored[r]) values.push_back(rows.values[r]);
        provenance = {{"samples", path}};
    } else {
        const Simulation sim = simulate(j, opt, fallback);
        values = sim.samples.uncensored();
        provenance = simulation_summary(sim.samples, n);
    }
    if (values.empty()) throw Error(Errc::EmptySample, "no uncensored samples to compare");

    const StandardizedSample z = standardize(values, law, n);
    double distance;
    bool pass;
    const bool point_mass = law.kind == LawKind::Normal && law.scale == 0.0;
    if (point_mass) {
        // Against a point mass the KS distance is the mass off the center.
        std::size_t off = 0;
        for (double v : z.values)
            if (std::abs(v) > 1e-9) ++off;
        distance = static_cast<double>(off) / static_cast<double>(z.values.size());
        pass = off == 0;
    } else {
        distance = ks_distance(z.values, [&](double x) { return limit_law_cdf(law, x); });
        pass = distance <= threshold;
    }

    const auto points = get_or<long long>(j, "qq_points", 99);
    if (points < 1) throw Error(Errc::InvalidParameter, "qq_points must be >= 1", "qq_points");
    std::vector<QqRow> qq;
    for (long long i = 1; i <= points; ++i) {
        const double p = static_cast<double>(i) / static_cast<double>(points + 1);
        qq.push_back({p, empirical_quantile(values, p), predicted_quantile(law, n, p).value});
    }
    std::ostringstream qq_text;
    write_qq_csv(qq_text, qq);
    write_file(opt.out_dir / "qq.csv", qq_text.str());

    json report = {{"law", law_json(law)},
                   {"law_selector", law_name},
                   {"k_star", pick.k_star},
                   {"n_servers", n},
                   {"n", values.size()},
                   {"ks_distance", distance},
                   {"threshold", threshold},
                   {"point_mass", point_mass},
                   {"pass", pass},
                   {"source", provenance}};
    write_file(opt.out_dir / "compare.json", report.dump(2) + "\n");
    return {report, pass};
}

}  // namespace detail

/// `gamma`: prints the Lundberg solution as one JSON line.
inline int cmd_gamma(const json& j, const Options&, std::ostream& out) {
    detail::allow_keys(j, {{"lambda"}, detail::kModelKeys, detail::kSimKeys, detail::kCompareKeys});
    const DistributionSpec service = distribution_from_json(detail::require<json>(j, "service"));
    double lambda;
    if (j.contains("lambda"))
        lambda = detail::require<double>(j, "lambda");
    else if (j.contains("arrival"))
        lambda = summarize_arrival(distribution_from_json(j["arrival"])).lambda;
    else
        throw Error(Errc::ConfigError, "give 'lambda' or 'arrival'", "lambda");
    const LundbergSolution s = solve_gamma(service, lambda);
    json report = detail::solution_json(s);
    if (!s.interior) {
        report["status"] = "error";
        report["reason"] = std::string(to_string(Errc::BoundaryRoot));
        out << report.dump() << '\n';
        return kDomainFailure;
    }
    report["status"] = "ok";
    out << report.dump() << '\n';
    return kOk;
}

/// `simulate`: writes <statistic>.csv and <statistic>.manifest.json.
inline int cmd_simulate(const json& j, const Options& opt, std::ostream& out) {
    detail::allow_keys(j, {detail::kModelKeys, detail::kSimKeys});
    const detail::Simulation sim = detail::simulate(j, opt, Statistic::MaxWaitSup);
    const std::string stem(to_string(sim.samples.statistic));
    std::ostringstream csv;
    write_samples_csv(csv, sim.samples);
    detail::write_file(opt.out_dir / (stem + ".csv"), csv.str());
    json manifest = detail::simulation_summary(sim.samples, sim.config.n_servers);
    detail::write_file(opt.out_dir / (stem + ".manifest.json"), manifest.dump(2) + "\n");

    const double limit = detail::get_or<double>(j, "max_censored_fraction", 0.01);
    const bool too_short =
        sim.samples.statistic == Statistic::MaxQueueDirect && sim.samples.censored_fraction() > limit;
    manifest["status"] = too_short ? "error" : "ok";
    if (too_short) manifest["reason"] = std::string(to_string(Errc::HorizonTooShort));
    out << manifest.dump() << '\n';
    return too_short ? kDomainFailure : kOk;
}

/// `compare`: KS of standardized samples against a limit law, plus a QQ table.
inline int cmd_compare(const json& j, const Options& opt, std::ostream& out) {
    detail::allow_keys(j, {detail::kModelKeys, detail::kSimKeys, detail::kCompareKeys});
    const detail::Verdict v = detail::compare(j, opt);
    out << v.report.dump() << '\n';
    return v.pass ? kOk : kDomainFailure;
}

/// `hetero`: per-class roots, the selected class and its law; optional compare.
inline int cmd_hetero(const json& j, const Options& opt, std::ostream& out) {
    detail::allow_keys(j, {detail::kModelKeys, detail::kSimKeys, detail::kCompareKeys, {"compare"}});
    const detail::Model model = detail::parse_model(j);
    const auto classes = detail::solve_classes(model);
    const HeteroSelection pick = hetero_select(classes, model.summary.sigma_A);
    json report;
    report["classes"] = json::array();
    for (std::size_t k = 0; k < classes.size(); ++k) {
        json c = detail::solution_json(classes[k].solution);
        c["index"] = k;
        c["alpha"] = classes[k].alpha;
        report["classes"].push_back(c);
    }
    report["k_star"] = pick.k_star;
    report["law"] = detail::law_json(pick.law);
    int code = kOk;
    if (detail::get_or<bool>(j, "compare", false)) {
        json cmp = j;
        cmp.erase("compare");
        if (!cmp.contains("law")) cmp["law"] = "wait";
        const detail::Verdict v = detail::compare(cmp, opt);
        report["compare"] = v.report;
        if (!v.pass) code = kDomainFailure;
    }
    report["status"] = code == kOk ? "ok" : "error";
    detail::write_file(opt.out_dir / "hetero.json", report.dump(2) + "\n");
    out << report.dump() << '\n';
    return code;
}

/// `verify`: the invariant suite at config-scaled sizes.
inline int cmd_verify(const json& j, const Options& opt, std::ostream& out) {
    detail::allow_keys(j, {{"service", "arrival", "n_servers", "replications", "seed", "sweep", "parallelism",
                            "horizon", "ks_c_alpha"}});
    VerifyOptions v;
    if (j.contains("service")) v.service = distribution_from_json(j["service"]);
    if (j.contains("arrival")) v.arrival = distribution_from_json(j["arrival"]);
    v.n_servers = detail::get_or<std::size_t>(j, "n_servers", v.n_servers);
    v.replications = detail::get_or<std::size_t>(j, "replications", v.replications);
    v.seed = opt.seed.value_or(detail::get_or<std::uint64_t>(j, "seed", v.seed));
    v.sweep = detail::get_or<std::size_t>(j, "sweep", v.sweep);
    v.parallelism = opt.parallelism.value_or(detail::get_or<std::size_t>(j, "parallelism", v.parallelism));
    v.ks_c_alpha = detail::get_or<double>(j, "ks_c_alpha", v.ks_c_alpha);
    if (j.contains("horizon")) v.horizon_steps = detail::get_or<std::size_t>(j, "horizon", 1000);
    if (v.n_servers < 1 || v.replications < 1)
        throw Error(Errc::InvalidParameter, "n_servers and replications must be >= 1", "n_servers");

    const VerifyReport r = verify_suite(v);
    json report;
    report["checks"] = json::array();
    for (const auto& c : r.checks) {
        json item = {{"name", c.name}, {"status", std::string(to_string(c.status))}};
        if (c.status != CheckResult::Status::Skip) {
            item["value"] = c.value;
            item["threshold"] = c.threshold;
        }
        if (!c.detail.empty()) item[c.status == CheckResult::Status::Skip ? "reason" : "detail"] = c.detail;
        report["checks"].push_back(item);
    }
    report["passed"] = r.passed();
    report["seed"] = v.seed;
    detail::write_file(opt.out_dir / "verify.json", report.dump(2) + "\n");
    out << report.dump() << '\n';
    return r.passed() ? kOk : kDomainFailure;
}

/// Dispatches a subcommand and maps failures onto exit codes: 1 for
/// malformed configuration, 2 for domain or statistical failure.
inline int run(const std::string& command, const json& config, const Options& opt, std::ostream& out,
               std::ostream& err) {
    try {
        if (command == "gamma") return cmd_gamma(config, opt, out);
        if (command == "simulate") return cmd_simulate(config, opt, out);
        if (command == "compare") return cmd_compare(config, opt, out);
        if (command == "hetero") return cmd_hetero(config, opt, out);
        if (command == "verify") return cmd_verify(config, opt, out);
        err << "unknown command '" << command << "'\n";
        return kConfigError;
    } catch (const Error& e) {
        const bool config_fault = e.code() == Errc::ConfigError || e.code() == Errc::InvalidParameter;
        out << json{{"status", "error"}, {"reason", std::string(to_string(e.code()))}, {"message", e.what()}}.dump()
            << '\n';
        return config_fault ? kConfigError : kDomainFailure;
    } catch (const json::exception& e) {
        out << json{{"status", "error"}, {"reason", "ConfigError"}, {"message", e.what()}}.dump() << '\n';
        return kConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << e.what() << '\n';
        return kConfigError;
    }
}

/// Reads a JSON config file; parse failures become ConfigError.
inline json load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(Errc::ConfigError, "cannot open config " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ConfigError, std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace fjq::cli
