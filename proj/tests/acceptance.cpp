// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance                 run everything
//   acceptance --only 3,8      run a subset
//   acceptance --parallelism 4 worker threads for the Monte Carlo batches

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "cli.hpp"
#include "fjq/fjq.hpp"
#include "oracles.hpp"

using namespace fjq;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::size_t g_parallelism = 1;

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SampleSet run(const ForkJoinConfig& cfg, Statistic stat, std::size_t reps, std::uint64_t seed, std::size_t steps,
              double level = 0.0) {
    BatchRequest req;
    req.statistic = stat;
    req.horizon.steps = steps;
    req.master_seed = seed;
    req.replications = reps;
    req.parallelism = g_parallelism;
    req.hitting_level = level;
    return run_batch(cfg, req);
}

const DistributionSpec kExp1 = Exponential{1.0};
const DistributionSpec kExp2 = Exponential{2.0};
const DistributionSpec kDet1 = Deterministic{1.0};

std::size_t horizon_for(const LundbergSolution& s, std::size_t n) { return default_horizon(s, n).steps; }

// Criteria 1 and 2 share the sweep.
struct SweepCase {
    DistributionSpec service;
    double lambda;
};

std::vector<SweepCase> sweep_cases() {
    RngStream rng(20240101);
    std::vector<SweepCase> out;
    for (int i = 0; i < 100; ++i) {
        auto [service, lambda] = random_stable_service(rng);
        out.push_back({service, lambda});
    }
    return out;
}

Outcome root_correctness() {
    const auto cases = sweep_cases();
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    int outside = 0;
    for (const auto& c : cases) {
        const LundbergSolution s = solve_gamma(c.service, c.lambda);
        worst = std::max(worst, std::abs(shifted_cgf(c.service, c.lambda, s.gamma)));
        if (!(s.interior && s.gamma > 0.0 && s.gamma < s.theta_sup)) ++outside;
    }
    const double exp2 = solve_gamma(kExp2, 1.0).gamma;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double err = std::abs(exp2 - oracle::kExp2Gamma);
    return {worst <= 1e-12 && outside == 0 && err <= 1e-10 && seconds < 1.0,
            fmt("max |Lambda(gamma)| = %.2e (<= 1e-12), %d roots off the open domain, Exp(2) gamma = %.12f "
                "(|err| = %.1e <= 1e-10), %.3f s (< 1 s)",
                worst, outside, exp2, err, seconds)};
}

Outcome duality() {
    const auto cases = sweep_cases();
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const auto& c : cases) {
        const LundbergSolution s = solve_gamma(c.service, c.lambda);
        const double v = legendre(c.service, c.lambda, s.lambda_prime).value;
        worst = std::max(worst, std::abs(v - s.gamma * s.lambda_prime));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {worst <= 1e-8 && seconds < 5.0,
            fmt("max |Lambda*(Lambda'(gamma)) - gamma Lambda'(gamma)| = %.2e (<= 1e-8), %.3f s (< 5 s)", worst,
                seconds)};
}

Outcome sampler_equivalence() {
    const ForkJoinConfig cfg = ForkJoinConfig::homogeneous(100, kExp1, kExp2);
    const std::size_t n = 100'000, steps = 2000;
    int passes = 0;
    double worst = 0.0;
    std::ostringstream per_seed;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const SampleSet sup = run(cfg, Statistic::MaxWaitSup, n, derive_key(3000 + seed, 1), steps);
        const SampleSet lindley = run(cfg, Statistic::MaxWaitLindley, n, derive_key(3000 + seed, 2), steps);
        const double d = two_sample_ks(sup.values, lindley.values);
        worst = std::max(worst, d);
        passes += d <= 0.0073;
        per_seed << (seed > 1 ? " " : "") << fmt("%.4f", d);
    }
    return {passes >= 9, fmt("%d/10 seeds with KS <= 0.0073 (need >= 9), worst %.4f; per seed: ", passes, worst) +
                             per_seed.str()};
}

Outcome tail_slope() {
    const ForkJoinConfig cfg = ForkJoinConfig::homogeneous(1, kDet1, kExp2);
    const SampleSet s = run(cfg, Statistic::MaxWaitSup, 1'000'000, 4000, 1000);
    std::vector<double> xs = s.values;
    std::sort(xs.begin(), xs.end());
    std::vector<double> levels, logs;
    for (double x = 0.5; x <= 4.5 + 1e-9; x += 0.25) {
        const auto above = xs.end() - std::upper_bound(xs.begin(), xs.end(), x);
        levels.push_back(x);
        logs.push_back(std::log(static_cast<double>(above) / static_cast<double>(xs.size())));
    }
    const LineFit f = fit_slope(levels, logs);
    const double rel = std::abs(f.slope + oracle::kExp2Gamma) / oracle::kExp2Gamma;
    return {rel <= 0.05, fmt("OLS slope %.4f vs -gamma = %.4f (relative error %.2f%% <= 5%%), r^2 = %.5f, "
                             "intercept exp = %.4f",
                             f.slope, -oracle::kExp2Gamma, 100 * rel, f.r_squared, std::exp(f.intercept))};
}

Outcome first_order_centering() {
    const LundbergSolution sol = solve_gamma(kExp2, 1.0);
    std::vector<double> log_n, means;
    std::ostringstream table;
    for (int e : {6, 8, 10, 12, 14}) {
        const std::size_t n = std::size_t{1} << e;
        const ForkJoinConfig cfg = ForkJoinConfig::homogeneous(n, kDet1, kExp2);
        const SampleSet s = run(cfg, Statistic::MaxWaitSup, 400, 5000 + e, horizon_for(sol, n));
        double mean = 0.0;
        for (double v : s.values) mean += v;
        mean /= static_cast<double>(s.values.size());
        log_n.push_back(std::log(static_cast<double>(n)));
        means.push_back(mean);
        table << fmt(" N=2^%d:%.3f", e, mean);
    }
    const LineFit f = fit_slope(log_n, means);
    const double rel = std::abs(f.slope - 1.0 / sol.gamma) * sol.gamma;
    return {rel <= 0.10, fmt("slope %.4f vs 1/gamma = %.4f (relative error %.1f%% <= 10%%); means", f.slope,
                             1.0 / sol.gamma, 100 * rel) +
                             table.str()};
}

// Standardized max-wait samples for the Exp(1)/Exp(2) configuration.
std::vector<double> standardized_wait(std::size_t n, std::uint64_t seed, const LimitLaw& law) {
    const LundbergSolution sol = solve_gamma(kExp2, 1.0);
    const ForkJoinConfig cfg = ForkJoinConfig::homogeneous(n, kExp1, kExp2);
    const SampleSet s = run(cfg, Statistic::MaxWaitSup, 2000, seed, horizon_for(sol, n));
    return standardize(s.values, law, n).values;
}

Outcome clt_shape() {
    const LundbergSolution sol = solve_gamma(kExp2, 1.0);
    const LimitLaw law = wait_limit_law(sol, 1.0);
    auto cdf = [&](double x) { return limit_law_cdf(law, x); };
    std::vector<double> ks;
    std::string table;
    for (std::size_t n : {100u, 1000u, 10000u}) {
        ks.push_back(ks_distance(standardized_wait(n, 6000 + n, law), cdf));
        table += fmt(" N=%zu:%.4f", n, ks.back());
    }
    const bool shape = ks.back() <= 0.10;
    bool monotone = true;
    for (std::size_t i = 1; i < ks.size(); ++i) monotone = monotone && ks[i] <= ks[i - 1] + 0.01;
    return {shape && monotone,
            fmt("KS at N=1e4 %.4f (<= 0.10); non-increasing within +0.01: %s; KS by N", ks.back(),
                monotone ? "yes" : "no") +
                table};
}

Outcome sandwich() {
    const LundbergSolution sol = solve_gamma(kExp2, 1.0);
    const LimitLaw law = wait_limit_law(sol, 1.0);
    const double eps = 0.1 * sol.c_hat;
    const LimitLaw lower = bound_law(LawKind::LowerBoundMix, sol, 1.0, eps);
    const LimitLaw upper = bound_law(LawKind::UpperBoundMix, sol, 1.0, eps);
    std::vector<double> z = standardized_wait(10000, 6000 + 10000, law);
    std::sort(z.begin(), z.end());
    int inside = 0;
    double worst = 0.0;
    for (int j = 0; j <= 20; ++j) {
        const double x = law.scale * (-3.0 + 0.3 * j);
        const double emp = static_cast<double>(std::upper_bound(z.begin(), z.end(), x) - z.begin()) /
                           static_cast<double>(z.size());
        const double lo = bound_law_cdf(upper, x) - 0.05, hi = bound_law_cdf(lower, x) + 0.05;
        const bool ok = emp >= lo && emp <= hi;
        inside += ok;
        worst = std::max({worst, lo - emp, emp - hi});
    }
    return {inside == 21, fmt("%d/21 grid points inside [F_upper - 0.05, F_lower + 0.05]; largest excursion %.4f",
                              inside, worst)};
}

Outcome littles_law() {
    const ForkJoinConfig small = ForkJoinConfig::homogeneous(100, kExp1, kExp2);
    const std::size_t n = 100'000;
    const SampleSet direct = run(small, Statistic::MaxQueueDirect, n, 8001, 2000);
    const SampleSet little = run(small, Statistic::MaxQueueLittle, n, 8002, 2000);
    const double d_two = two_sample_ks(direct.values, little.values);

    const LundbergSolution sol = solve_gamma(kExp2, 1.0);
    const LimitLaw law = queue_limit_law(sol, 1.0, 1.0);
    const ForkJoinConfig big = ForkJoinConfig::homogeneous(10000, kExp1, kExp2);
    const SampleSet q = run(big, Statistic::MaxQueueLittle, 2000, 8003, horizon_for(sol, 10000));
    const double d_law = ks_distance(standardize(q.values, law, 10000).values,
                                     [&](double x) { return limit_law_cdf(law, x); });
    const bool censored = direct.censored_fraction() > 0.0;
    return {d_two <= 0.0073 && d_law <= 0.12 && !censored,
            fmt("direct vs Little KS %.4f (<= 0.0073), direct censored fraction %.4f; queue law KS at N=1e4 %.4f "
                "(<= 0.12)",
                d_two, direct.censored_fraction(), d_law)};
}

Outcome hitting_time() {
    const LundbergSolution sol = solve_gamma(kExp2, 1.0);
    const std::size_t n = 10000;
    const double log_n = std::log(static_cast<double>(n));
    const ForkJoinConfig cfg = ForkJoinConfig::homogeneous(n, kDet1, kExp2);
    const SampleSet s = run(cfg, Statistic::HittingTime, 2000, 9001, horizon_for(sol, n), log_n / sol.gamma);
    const auto kept = s.uncensored();
    double mean = 0.0;
    for (double v : kept) mean += v;
    mean = kept.empty() ? std::nan("") : mean / static_cast<double>(kept.size());
    const double ratio = mean / log_n;
    const double rel = std::abs(ratio - sol.c_hat) / sol.c_hat;
    const double cens = s.censored_fraction();
    return {rel <= 0.15 && cens < 0.01,
            fmt("mean uncensored tau/log N = %.4f vs c_hat = %.4f (relative error %.1f%% <= 15%%) over %zu draws; "
                "censored fraction %.4f (< 0.01) at horizon %zu",
                ratio, sol.c_hat, 100 * rel, kept.size(), cens, s.horizon.steps)};
}

Outcome heterogeneous() {
    const std::vector<ClassSpec> classes{{kExp2, 0.5, solve_gamma(kExp2, 1.0)},
                                         {Exponential{4.0}, 0.5, solve_gamma(Exponential{4.0}, 1.0)}};
    const HeteroSelection pick = hetero_select(classes, 1.0);
    const bool oracle_order = oracle::kExp2Gamma < oracle::kExp4Gamma;
    const bool roots_match = std::abs(classes[0].solution.gamma - oracle::kExp2Gamma) <= 1e-10 &&
                             std::abs(classes[1].solution.gamma - oracle::kExp4Gamma) <= 1e-10;
    const std::size_t n = 10000;
    const std::vector<double> alphas{0.5, 0.5};
    const auto sizes = class_sizes(alphas, n);
    const ForkJoinConfig cfg =
        ForkJoinConfig::heterogeneous(kExp1, {ServerClass{kExp2, sizes[0]}, ServerClass{Exponential{4.0}, sizes[1]}});
    std::size_t steps = 0;
    for (const auto& c : classes) steps = std::max(steps, horizon_for(c.solution, n));
    const SampleSet s = run(cfg, Statistic::MaxWaitSup, 2000, 10001, steps);
    const double d = ks_distance(standardize(s.values, pick.law, n).values,
                                 [&](double x) { return limit_law_cdf(pick.law, x); });
    return {pick.k_star == 0 && oracle_order && roots_match && d <= 0.12,
            fmt("k* = %zu (Exp(2) class is 0; oracle gammas %.4f < %.4f, solver agrees: %s); KS %.4f (<= 0.12)",
                pick.k_star, oracle::kExp2Gamma, oracle::kExp4Gamma, roots_match ? "yes" : "no", d)};
}

Outcome error_paths() {
    using nlohmann::json;
    struct Case {
        const char* label;
        const char* command;
        json config;
        const char* reason;
    };
    const json exp2 = {{"family", "exponential"}, {"rate", 2.0}};
    const std::vector<Case> cases = {
        {"Deterministic(0.4)/lambda=1", "gamma",
         {{"service", {{"family", "deterministic"}, {"value", 0.4}}}, {"lambda", 1.0}}, "NoRoot"},
        {"Exp(0.5)/lambda=1", "gamma", {{"service", {{"family", "exponential"}, {"rate", 0.5}}}, {"lambda", 1.0}},
         "Unstable"},
        {"duplicate classes", "hetero",
         {{"arrival", {{"family", "exponential"}, {"rate", 1.0}}},
          {"classes", {{{"service", exp2}, {"alpha", 0.5}}, {{"service", exp2}, {"alpha", 0.5}}}}},
         "AmbiguousMinimum"},
    };
    bool all = true;
    std::string detail;
    for (const auto& c : cases) {
        std::ostringstream out, err;
        const int code = cli::run(c.command, c.config, {}, out, err);
        const json report = json::parse(out.str());
        const std::string reason = report.value("reason", "");
        const bool ok = code == 2 && reason == c.reason;
        all = all && ok;
        detail += fmt("%s%s -> exit %d %s", detail.empty() ? "" : "; ", c.label, code, reason.c_str());
    }
    return {all, detail};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria for the fork-join asymptotics library"};
    std::vector<int> only;
    g_parallelism = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--only", only, "Criteria to run (comma separated)")->delimiter(',')->check(CLI::Range(1, 11));
    app.add_option("--parallelism", g_parallelism, "Worker threads for Monte Carlo batches")
        ->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria = {
        {1, "root correctness", root_correctness},
        {2, "duality identity", duality},
        {3, "sampler equivalence", sampler_equivalence},
        {4, "Cramer-Lundberg tail slope", tail_slope},
        {5, "first-order centering", first_order_centering},
        {6, "CLT shape", clt_shape},
        {7, "sandwich consistency", sandwich},
        {8, "Little's law and queue CLT", littles_law},
        {9, "hitting time", hitting_time},
        {10, "heterogeneous classes", heterogeneous},
        {11, "degenerate and error paths", error_paths},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    seconds);
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
