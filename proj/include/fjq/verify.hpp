#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fjq/dist.hpp"
#include "fjq/lundberg.hpp"
#include "fjq/rng.hpp"
#include "fjq/sim.hpp"
#include "fjq/stats.hpp"

namespace fjq {

/// A random stable (service, λ) pair from a parametric family with a
/// guaranteed interior Lundberg root. Used by invariant sweeps.
inline std::pair<DistributionSpec, double> random_stable_service(RngStream& rng) {
    auto between = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    const auto family = rng() % 4;
    DistributionSpec service = Exponential{between(0.5, 5.0)};
    switch (family) {
    case 0: break;
    case 1: service = Gamma{between(0.3, 5.0), between(0.5, 5.0)}; break;
    case 2: {
        const double lo = between(0.0, 1.0);
        const Uniform u{lo, lo + between(0.1, 2.0)};
        // 1/λ strictly between the mean and hi, so Λ eventually turns positive.
        const double mean = 0.5 * (u.lo + u.hi);
        return {u, 1.0 / (mean + between(0.1, 0.9) * (u.hi - mean))};
    }
    default: {
        const double p = between(0.1, 0.9);
        service = HyperExponential{{p, 1.0 - p}, {between(0.5, 5.0), between(0.5, 5.0)}};
        break;
    }
    }
    const double load = between(0.2, 0.9);
    return {service, load / moments(service).mean};
}

/// Central finite differences of Λ at θ with step h = 1e-5·max(1, |θ|).
inline CgfDerivatives finite_difference_derivatives(const DistributionSpec& service, double lambda, double theta) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta));
    const double up = shifted_cgf(service, lambda, theta + h);
    const double mid = shifted_cgf(service, lambda, theta);
    const double down = shifted_cgf(service, lambda, theta - h);
    return {(up - down) / (2 * h), (up - 2 * mid + down) / (h * h)};
}

struct CheckResult {
    enum class Status { Pass, Fail, Skip };
    std::string name;
    Status status;
    double value;
    double threshold;
    std::string detail;
};

constexpr std::string_view to_string(CheckResult::Status s) noexcept {
    switch (s) {
    case CheckResult::Status::Pass: return "pass";
    case CheckResult::Status::Fail: return "fail";
    case CheckResult::Status::Skip: return "skip";
    }
    return "unknown";
}

struct VerifyOptions {
    DistributionSpec service = Exponential{2.0};
    DistributionSpec arrival = Exponential{1.0};
    std::size_t n_servers = 10;
    std::size_t replications = 5000;
    std::uint64_t seed = 1;
    std::size_t sweep = 100;
    std::size_t parallelism = 1;
    double ks_c_alpha = 1.63;  // α = 0.01
    std::optional<std::size_t> horizon_steps;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool passed() const {
        for (const auto& c : checks)
            if (c.status == CheckResult::Status::Fail) return false;
        return true;
    }
};

/// Runs the invariant suite: root residual (sweep and configured service),
/// duality Λ*(Λ'(γ)) = γΛ'(γ), derivative consistency, sup-vs-Lindley and
/// direct-vs-Little two-sample KS, and truncation stability.
inline VerifyReport verify_suite(const VerifyOptions& opt) {
    using Status = CheckResult::Status;
    VerifyReport report;
    auto add = [&](std::string name, bool ok, double value, double threshold, std::string detail = {}) {
        report.checks.push_back({std::move(name), ok ? Status::Pass : Status::Fail, value, threshold, std::move(detail)});
    };
    auto skip = [&](std::string name, std::string reason) {
        report.checks.push_back({std::move(name), Status::Skip, 0.0, 0.0, std::move(reason)});
    };

    {
        RngStream rng = substream(opt.seed, 0xC0FFEE);
        double worst_residual = 0.0, worst_duality = 0.0;
        for (std::size_t i = 0; i < opt.sweep; ++i) {
            const auto [service, lambda] = random_stable_service(rng);
            const LundbergSolution s = solve_gamma(service, lambda);
            worst_residual = std::max(worst_residual, std::abs(shifted_cgf(service, lambda, s.gamma)));
            const double dual = legendre(service, lambda, s.lambda_prime).value;
            worst_duality = std::max(worst_duality, std::abs(dual - s.gamma * s.lambda_prime));
        }
        add("root_residual_sweep", worst_residual <= 1e-12, worst_residual, 1e-12);
        add("duality_sweep", worst_duality <= 1e-8, worst_duality, 1e-8);
    }

    const ArrivalSummary arrival = summarize_arrival(opt.arrival);
    std::optional<LundbergSolution> solution;
    std::string no_solution;
    try {
        solution = solve_gamma(opt.service, arrival.lambda);
    } catch (const Error& e) {
        no_solution = std::string(to_string(e.code())) + ": " + e.what();
    }

    if (solution) {
        const auto& s = *solution;
        const double residual = std::abs(shifted_cgf(opt.service, arrival.lambda, s.gamma));
        add("root_residual", residual <= 1e-12, residual, 1e-12);
        const double dual = std::abs(legendre(opt.service, arrival.lambda, s.lambda_prime).value - s.gamma * s.lambda_prime);
        add("duality", dual <= 1e-8, dual, 1e-8);
        const CgfDerivatives fd = finite_difference_derivatives(opt.service, arrival.lambda, s.gamma);
        const double err1 = std::abs(fd.d1 - s.lambda_prime) / std::max(1.0, std::abs(s.lambda_prime));
        const double err2 = std::abs(fd.d2 - s.lambda_double_prime) / std::max(1.0, std::abs(s.lambda_double_prime));
        add("derivative_consistency", std::max(err1, err2) <= 1e-5, std::max(err1, err2), 1e-5);
    } else {
        skip("root_residual", no_solution);
        skip("duality", no_solution);
        skip("derivative_consistency", no_solution);
    }

    ForkJoinConfig cfg;
    try {
        cfg = ForkJoinConfig::homogeneous(opt.n_servers, opt.arrival, opt.service);
        validate(cfg);
    } catch (const Error& e) {
        for (const char* name : {"sampler_equivalence", "littles_law", "truncation_stability"})
            skip(name, e.what());
        return report;
    }
    Horizon horizon;
    if (opt.horizon_steps)
        horizon.steps = *opt.horizon_steps;
    else if (solution && opt.n_servers >= 2)
        horizon = default_horizon(*solution, opt.n_servers);

    auto batch = [&](Statistic stat, std::uint64_t seed, Horizon h) {
        BatchRequest req;
        req.statistic = stat;
        req.horizon = h;
        req.master_seed = seed;
        req.replications = opt.replications;
        req.parallelism = opt.parallelism;
        return run_batch(cfg, req);
    };
    const double critical = two_sample_ks_critical(opt.ks_c_alpha, opt.replications, opt.replications);

    const SampleSet sup = batch(Statistic::MaxWaitSup, derive_key(opt.seed, 1), horizon);
    const SampleSet lindley = batch(Statistic::MaxWaitLindley, derive_key(opt.seed, 2), horizon);
    const double ks_wait = two_sample_ks(sup.values, lindley.values);
    add("sampler_equivalence", ks_wait <= critical, ks_wait, critical);

    const SampleSet direct = batch(Statistic::MaxQueueDirect, derive_key(opt.seed, 3), horizon);
    const SampleSet little = batch(Statistic::MaxQueueLittle, derive_key(opt.seed, 4), horizon);
    const double ks_queue = two_sample_ks(direct.values, little.values);
    add("littles_law", ks_queue <= critical && direct.censored_fraction() <= 0.01, ks_queue, critical,
        "direct sampler censored fraction " + std::to_string(direct.censored_fraction()));

    Horizon doubled = horizon;
    doubled.steps *= 2;
    const SampleSet longer = batch(Statistic::MaxWaitSup, derive_key(opt.seed, 1), doubled);
    double m1 = 0.0, m2 = 0.0;
    for (double v : sup.values) m1 += v;
    for (double v : longer.values) m2 += v;
    const double change = m1 > 0.0 ? std::abs(m2 - m1) / m1 : std::abs(m2 - m1);
    add("truncation_stability", change < 0.005, change, 0.005);
    return report;
}

}  // namespace fjq
