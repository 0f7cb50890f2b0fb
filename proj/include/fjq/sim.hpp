#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "fjq/dist.hpp"
#include "fjq/error.hpp"
#include "fjq/lundberg.hpp"
#include "fjq/rng.hpp"

namespace fjq {

/// A block of servers sharing one service distribution.
struct ServerClass {
    DistributionSpec service;
    std::size_t size;
};

/// N queues fed by one arrival stream. Servers are numbered class by class
/// in list order; server i always draws from the same child stream, so
/// growing a class appends servers without disturbing existing ones.
struct ForkJoinConfig {
    std::size_t n_servers = 0;
    DistributionSpec arrival = Deterministic{1.0};
    std::vector<ServerClass> classes;
    double lambda = 1.0;
    double sigma_A = 0.0;

    static ForkJoinConfig heterogeneous(DistributionSpec arrival, std::vector<ServerClass> classes) {
        ForkJoinConfig cfg;
        validate(arrival);
        const ArrivalSummary a = summarize_arrival(arrival);
        cfg.arrival = std::move(arrival);
        cfg.lambda = a.lambda;
        cfg.sigma_A = a.sigma_A;
        for (const auto& c : classes) cfg.n_servers += c.size;
        cfg.classes = std::move(classes);
        return cfg;
    }

    static ForkJoinConfig homogeneous(std::size_t n_servers, DistributionSpec arrival, DistributionSpec service) {
        return heterogeneous(std::move(arrival), {ServerClass{std::move(service), n_servers}});
    }
};

/// Throws InvalidParameter / Unstable when the config breaks an invariant.
inline const ForkJoinConfig& validate(const ForkJoinConfig& cfg) {
    validate(cfg.arrival);
    if (cfg.classes.empty()) throw Error(Errc::InvalidParameter, "need at least one server class", "classes");
    std::size_t total = 0;
    for (const auto& c : cfg.classes) {
        validate(c.service);
        if (c.size == 0) throw Error(Errc::InvalidParameter, "class sizes must be >= 1", "classes");
        total += c.size;
        if (moments(c.service).mean >= 1.0 / cfg.lambda)
            throw Error(Errc::Unstable, "a server class has E[S] >= 1/lambda");
    }
    if (total != cfg.n_servers) throw Error(Errc::InvalidParameter, "class sizes must sum to n_servers", "n_servers");
    const ArrivalSummary a = summarize_arrival(cfg.arrival);
    if (std::abs(a.lambda - cfg.lambda) > 1e-12 * a.lambda || std::abs(a.sigma_A - cfg.sigma_A) > 1e-12 * (1 + a.sigma_A))
        throw Error(Errc::InvalidParameter, "lambda / sigma_A disagree with the arrival distribution", "lambda");
    return cfg;
}

/// Class sizes round(α_k N) with largest-remainder correction so they sum to N.
inline std::vector<std::size_t> class_sizes(std::span<const double> alphas, std::size_t n_servers) {
    std::vector<std::size_t> sizes(alphas.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        const double exact = alphas[k] * static_cast<double>(n_servers);
        sizes[k] = static_cast<std::size_t>(std::floor(exact));
        assigned += sizes[k];
        remainders.emplace_back(exact - std::floor(exact), k);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < n_servers && r < remainders.size(); ++r, ++assigned)
        ++sizes[remainders[r].second];
    return sizes;
}

/// Truncation K of the all-time supremum.
struct Horizon {
    std::size_t steps = 1000;
    double safety_factor = 10.0;
};

/// K = max(1000, ceil(safety · ĉ · log N)).
inline Horizon default_horizon(const LundbergSolution& s, std::size_t n_servers, double safety_factor = 10.0) {
    const double scaled = std::ceil(safety_factor * s.c_hat * std::log(static_cast<double>(n_servers)));
    const std::size_t steps = std::max<std::size_t>(1000, static_cast<std::size_t>(std::max(0.0, scaled)));
    return {steps, safety_factor};
}

enum class Statistic { MaxWaitSup, MaxWaitLindley, MaxQueueLittle, MaxQueueDirect, HittingTime };

constexpr std::string_view to_string(Statistic s) noexcept {
    switch (s) {
    case Statistic::MaxWaitSup: return "max-wait-sup";
    case Statistic::MaxWaitLindley: return "max-wait-lindley";
    case Statistic::MaxQueueLittle: return "max-queue-little";
    case Statistic::MaxQueueDirect: return "max-queue-direct";
    case Statistic::HittingTime: return "hitting-time";
    }
    return "unknown";
}

inline std::optional<Statistic> parse_statistic(std::string_view name) {
    for (auto s : {Statistic::MaxWaitSup, Statistic::MaxWaitLindley, Statistic::MaxQueueLittle,
                   Statistic::MaxQueueDirect, Statistic::HittingTime})
        if (to_string(s) == name) return s;
    return std::nullopt;
}

/// One draw of a statistic; `censored` marks a horizon that was too short
/// (hitting level never reached, or every earlier task still queued).
struct Draw {
    double value;
    bool censored;
};

namespace detail {

// Child-stream tags under a replication stream.
inline constexpr std::uint64_t kArrivalTag = 0;
inline constexpr std::uint64_t kCountTag = 1;
inline constexpr std::uint64_t kServerTagBase = 2;

// Shared arrival stream plus one service stream per server.
class Walkers {
public:
    Walkers(const ForkJoinConfig& cfg, const RngStream& stream)
        : arrival_rng_(stream.child(kArrivalTag)), arrival_(make_sampler(cfg.arrival)) {
        rngs_.reserve(cfg.n_servers);
        for (std::size_t i = 0; i < cfg.n_servers; ++i) rngs_.push_back(stream.child(kServerTagBase + i));
        std::size_t begin = 0;
        for (const auto& c : cfg.classes) {
            samplers_.push_back(make_sampler(c.service));
            blocks_.emplace_back(begin, begin + c.size);
            begin += c.size;
        }
    }

    double next_arrival() { return draw(arrival_, arrival_rng_); }

    /// Calls op(i, service_draw) for every server, in server order.
    template <class Op>
    void each_server(Op&& op) {
        for (std::size_t c = 0; c < samplers_.size(); ++c) {
            const auto [begin, end] = blocks_[c];
            std::visit(
                [&](auto& sampler) {
                    for (std::size_t i = begin; i < end; ++i) op(i, sampler(rngs_[i]));
                },
                samplers_[c]);
        }
    }

    std::size_t size() const { return rngs_.size(); }

private:
    RngStream arrival_rng_;
    Sampler arrival_;
    std::vector<RngStream> rngs_;
    std::vector<Sampler> samplers_;
    std::vector<std::pair<std::size_t, std::size_t>> blocks_;
};

}  // namespace detail

/// max over i <= N and 0 <= k <= K of Σ_{j<=k} (S_i(j) − A(j)), with the
/// arrivals A shared by all servers. Never negative (k = 0 contributes 0).
inline double sample_max_wait_sup(const ForkJoinConfig& cfg, const Horizon& horizon, const RngStream& stream) {
    detail::Walkers walkers(cfg, stream);
    std::vector<double> sums(walkers.size(), 0.0);
    double best = 0.0;
    for (std::size_t k = 0; k < horizon.steps; ++k) {
        const double a = walkers.next_arrival();
        walkers.each_server([&](std::size_t i, double s) {
            const double v = sums[i] + s - a;
            sums[i] = v;
            best = v > best ? v : best;
        });
    }
    return best;
}

/// K Lindley steps W_i ← max(0, W_i + S_i − A) from empty queues; returns max_i W_i.
inline double sample_max_wait_lindley(const ForkJoinConfig& cfg, const Horizon& horizon, const RngStream& stream) {
    detail::Walkers walkers(cfg, stream);
    std::vector<double> waits(walkers.size(), 0.0);
    for (std::size_t k = 0; k < horizon.steps; ++k) {
        const double a = walkers.next_arrival();
        walkers.each_server([&](std::size_t i, double s) {
            const double v = waits[i] + s - a;
            waits[i] = v > 0.0 ? v : 0.0;
        });
    }
    return *std::max_element(waits.begin(), waits.end());
}

/// Number of renewals in [0, t]: the largest n with Â(1) + … + Â(n) <= t.
inline std::uint64_t count_arrivals(const DistributionSpec& arrival, double t, RngStream& stream) {
    if (!(t >= 0.0)) throw Error(Errc::InvalidParameter, "t must be >= 0", "t");
    if (const auto* d = std::get_if<Deterministic>(&arrival)) {
        auto n = static_cast<std::uint64_t>(std::floor(t / d->value));
        while (static_cast<double>(n + 1) * d->value <= t) ++n;
        while (n > 0 && static_cast<double>(n) * d->value > t) --n;
        return n;
    }
    Sampler sampler = make_sampler(arrival);
    std::uint64_t n = 0;
    double elapsed = 0.0;
    for (;;) {
        elapsed += draw(sampler, stream);
        if (elapsed > t) return n;
        ++n;
    }
}

/// Distributional Little's law: arrivals of an independent renewal stream
/// during a sup-sampler waiting-time draw.
inline std::uint64_t sample_max_queue_little(const ForkJoinConfig& cfg, const Horizon& horizon,
                                             const RngStream& stream) {
    const double wait = sample_max_wait_sup(cfg, horizon, stream);
    RngStream counter = stream.child(detail::kCountTag);
    return count_arrivals(cfg.arrival, wait, counter);
}

namespace detail {

// Forward simulation of K tasks. Task K is the observer arriving at epoch t;
// the j-th earlier task (task K − j) is still waiting at t iff its waiting
// time in some queue is at least the j interarrival times since it arrived.
// FCFS makes the waiting set an initial segment, so the largest such j is the
// longest queue seen by the arriving observer.
inline Draw max_queue_direct(const ForkJoinConfig& cfg, const Horizon& horizon, const RngStream& stream) {
    const std::size_t K = horizon.steps;
    detail::Walkers walkers(cfg, stream);
    std::vector<double> waits(walkers.size(), 0.0);
    std::vector<double> longest(K + 1, 0.0);      // longest[n]: max_i waiting time of task n
    std::vector<double> interarrival(K + 1, 0.0);  // interarrival[n]: A between tasks n−1 and n
    for (std::size_t n = 2; n <= K; ++n) {
        const double a = walkers.next_arrival();
        interarrival[n] = a;
        double m = 0.0;
        walkers.each_server([&](std::size_t i, double s) {
            const double v = std::max(0.0, waits[i] + s - a);
            waits[i] = v;
            m = v > m ? v : m;
        });
        longest[n] = m;
    }
    std::size_t queue = 0;
    double elapsed = 0.0;
    for (std::size_t j = 1; j + 1 <= K; ++j) {
        elapsed += interarrival[K - j + 1];
        if (longest[K - j] >= elapsed) queue = j;
    }
    // Task 1 meets an empty system, so q = K − 2 means the queue never
    // drained within the horizon.
    return {static_cast<double>(queue), queue + 2 >= K};
}

}  // namespace detail

/// Longest queue by direct forward simulation; throws HorizonTooShort when
/// every task after the first is still queued (the steady state was not reached).
inline std::uint64_t sample_max_queue_direct(const ForkJoinConfig& cfg, const Horizon& horizon,
                                             const RngStream& stream) {
    const Draw d = detail::max_queue_direct(cfg, horizon, stream);
    if (d.censored)
        throw Error(Errc::HorizonTooShort, "queue never drained within " + std::to_string(horizon.steps) + " tasks");
    return static_cast<std::uint64_t>(d.value);
}

struct HittingTime {
    std::uint64_t steps;
    bool censored;  ///< level not reached within the horizon; steps == K
};

/// First k <= K with max_i Σ_{j<=k}(S_i(j) − A(j)) >= level.
inline HittingTime sample_hitting_time(const ForkJoinConfig& cfg, double level, const Horizon& horizon,
                                       const RngStream& stream) {
    if (level <= 0.0) return {0, false};
    detail::Walkers walkers(cfg, stream);
    std::vector<double> sums(walkers.size(), 0.0);
    for (std::size_t k = 1; k <= horizon.steps; ++k) {
        const double a = walkers.next_arrival();
        bool hit = false;
        walkers.each_server([&](std::size_t i, double s) {
            const double v = sums[i] + s - a;
            sums[i] = v;
            hit = hit || v >= level;
        });
        if (hit) return {k, false};
    }
    return {horizon.steps, true};
}

/// Draw of `statistic` from one replication stream.
inline Draw sample_statistic(const ForkJoinConfig& cfg, Statistic statistic, const Horizon& horizon,
                             const RngStream& stream, double hitting_level = 0.0) {
    switch (statistic) {
    case Statistic::MaxWaitSup: return {sample_max_wait_sup(cfg, horizon, stream), false};
    case Statistic::MaxWaitLindley: return {sample_max_wait_lindley(cfg, horizon, stream), false};
    case Statistic::MaxQueueLittle:
        return {static_cast<double>(sample_max_queue_little(cfg, horizon, stream)), false};
    case Statistic::MaxQueueDirect: return detail::max_queue_direct(cfg, horizon, stream);
    case Statistic::HittingTime: {
        const HittingTime h = sample_hitting_time(cfg, hitting_level, horizon, stream);
        return {static_cast<double>(h.steps), h.censored};
    }
    }
    throw Error(Errc::InvalidParameter, "unknown statistic", "statistic");
}

// ---------------------------------------------------------------------------
// Provenance

namespace detail {

class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001B3ULL;
        }
    }
    void text(std::string_view s) { bytes(s.data(), s.size()); }
    void number(double x) {
        char buf[40];
        const int n = std::snprintf(buf, sizeof buf, "%a;", x);
        bytes(buf, static_cast<std::size_t>(n));
    }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

inline void hash_spec(Fnv1a& h, const DistributionSpec& spec) {
    std::visit(overloaded{
                   [&](const Deterministic& d) {
                       h.text("deterministic:");
                       h.number(d.value);
                   },
                   [&](const Exponential& d) {
                       h.text("exponential:");
                       h.number(d.rate);
                   },
                   [&](const Gamma& d) {
                       h.text("gamma:");
                       h.number(d.shape);
                       h.number(d.rate);
                   },
                   [&](const Uniform& d) {
                       h.text("uniform:");
                       h.number(d.lo);
                       h.number(d.hi);
                   },
                   [&](const HyperExponential& d) {
                       h.text("hyperexponential:");
                       for (double w : d.weights) h.number(w);
                       h.text("|");
                       for (double r : d.rates) h.number(r);
                   },
                   [&](const Empirical& d) {
                       h.text("empirical:");
                       for (double x : d.points()) h.number(x);
                   },
               },
               spec);
    h.text("/");
}

}  // namespace detail

/// FNV-1a digest of the model (arrival law, classes, sizes). Stable across
/// runs and platforms.
inline std::uint64_t config_digest(const ForkJoinConfig& cfg) {
    detail::Fnv1a h;
    h.text("arrival=");
    detail::hash_spec(h, cfg.arrival);
    for (const auto& c : cfg.classes) {
        h.text("class=");
        detail::hash_spec(h, c.service);
        h.text(std::to_string(c.size));
        h.text(";");
    }
    h.text("n=" + std::to_string(cfg.n_servers));
    return h.value();
}

/// Replicated draws with provenance. values[r] came from substream(master_seed, r).
struct SampleSet {
    std::vector<double> values;
    std::vector<bool> censored;
    std::uint64_t master_seed = 0;
    std::size_t replications = 0;
    std::uint64_t config_digest = 0;
    Horizon horizon;
    Statistic statistic = Statistic::MaxWaitSup;
    double hitting_level = 0.0;

    double censored_fraction() const {
        if (censored.empty()) return 0.0;
        return static_cast<double>(std::count(censored.begin(), censored.end(), true)) /
               static_cast<double>(censored.size());
    }

    /// Values of replications that were not censored.
    std::vector<double> uncensored() const {
        std::vector<double> out;
        for (std::size_t r = 0; r < values.size(); ++r)
            if (!censored[r]) out.push_back(values[r]);
        return out;
    }
};

struct BatchRequest {
    Statistic statistic = Statistic::MaxWaitSup;
    Horizon horizon;
    std::uint64_t master_seed = 0;
    std::size_t replications = 1;
    std::size_t parallelism = 1;
    double hitting_level = 0.0;  ///< HittingTime only
};

/// Runs the replications on `parallelism` threads. Output is identical for
/// every thread count. A failing replication is rethrown with its index.
inline SampleSet run_batch(const ForkJoinConfig& cfg, const BatchRequest& req) {
    validate(cfg);
    if (req.replications == 0) throw Error(Errc::InvalidParameter, "replications must be >= 1", "replications");
    if (req.horizon.steps == 0) throw Error(Errc::InvalidParameter, "horizon steps must be >= 1", "horizon");

    SampleSet out;
    out.values.assign(req.replications, 0.0);
    std::vector<char> censored(req.replications, 0);
    out.master_seed = req.master_seed;
    out.replications = req.replications;
    out.config_digest = config_digest(cfg);
    out.horizon = req.horizon;
    out.statistic = req.statistic;
    out.hitting_level = req.hitting_level;

    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::optional<std::pair<std::size_t, Error>> failure;

    auto worker = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= req.replications) return;
            try {
                const Draw d = sample_statistic(cfg, req.statistic, req.horizon, substream(req.master_seed, r),
                                                req.hitting_level);
                out.values[r] = d.value;
                censored[r] = d.censored;
            } catch (const Error& e) {
                std::lock_guard lock(failure_mutex);
                if (!failure || r < failure->first) failure.emplace(r, e);
                next.store(req.replications);
            }
        }
    };

    const std::size_t threads = std::clamp<std::size_t>(req.parallelism, 1, req.replications);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure)
        throw Error(failure->second.code(), "replication " + std::to_string(failure->first) + ": " +
                                                failure->second.what(), failure->second.field());
    out.censored.assign(censored.begin(), censored.end());
    return out;
}

}  // namespace fjq
