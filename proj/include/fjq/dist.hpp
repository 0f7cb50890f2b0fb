#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "fjq/error.hpp"
#include "fjq/rng.hpp"

namespace fjq {

/// Returned by log_mgf and friends for θ outside 𝒟. Root finders bracket
/// against it instead of catching an error.
inline constexpr double kOutsideDomain = std::numeric_limits<double>::infinity();

struct Deterministic {
    double value;
};

struct Exponential {
    double rate;
};

struct Gamma {
    double shape;
    double rate;
};

/// Uniform on [lo, hi], 0 <= lo < hi.
struct Uniform {
    double lo;
    double hi;
};

struct HyperExponential {
    std::vector<double> weights;
    std::vector<double> rates;
};

/// Resampled uniformly with replacement. The point set is shared between
/// copies, so large user samples are cheap to pass around.
class Empirical {
public:
    explicit Empirical(std::vector<double> points)
        : data_(std::make_shared<const std::vector<double>>(std::move(points))) {
        if (!data_->empty()) {
            auto [lo, hi] = std::minmax_element(data_->begin(), data_->end());
            min_ = *lo;
            max_ = *hi;
        }
    }

    std::span<const double> points() const noexcept { return *data_; }
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }

private:
    std::shared_ptr<const std::vector<double>> data_;
    double min_ = 0.0;
    double max_ = 0.0;
};

using DistributionSpec = std::variant<Deterministic, Exponential, Gamma, Uniform, HyperExponential, Empirical>;

struct Moments {
    double mean;
    double variance;
};

struct ArrivalSummary {
    double lambda;   ///< arrival rate 1/E[A]
    double sigma_A;  ///< Std(A)
    double mean;
};

/// First and second derivative of the log-MGF.
struct CgfDerivatives {
    double d1;
    double d2;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void require(bool ok, const char* field, const std::string& reason) {
    if (!ok) throw Error(Errc::InvalidParameter, std::string(field) + ": " + reason, field);
}

inline bool positive(double x) { return std::isfinite(x) && x > 0.0; }

// g(u) = log((e^u - 1)/u), the log-MGF of Uniform(0,1) at u, and its derivatives.
inline double log_expm1_over(double u) {
    const double a = std::abs(u);
    if (a < 1e-2) {
        const double u2 = u * u;
        return u / 2 + u2 / 24 - u2 * u2 / 2880 + u2 * u2 * u2 / 181440;
    }
    if (u > 0) return u + std::log(-std::expm1(-u)) - std::log(u);
    return std::log(std::expm1(u) / u);
}

inline double log_expm1_over_d1(double u) {
    const double a = std::abs(u);
    if (a < 1e-2) {
        const double u2 = u * u;
        return 0.5 + u / 12 - u * u2 / 720 + u * u2 * u2 / 30240;
    }
    if (u > 0) return 1.0 / (-std::expm1(-u)) - 1.0 / u;
    return 1.0 - (1.0 / (-std::expm1(u)) + 1.0 / u);
}

inline double log_expm1_over_d2(double u) {
    const double a = std::abs(u);
    if (a < 0.1) {
        const double u2 = u * u;
        return 1.0 / 12 - u2 / 240 + u2 * u2 / 6048 - u2 * u2 * u2 / 172800;
    }
    const double s = std::sinh(u / 2);
    return 1.0 / (u * u) - 1.0 / (4 * s * s);
}

// Stabilized exponential weights exp(θx - m) for the empirical CGF.
struct TiltedSums {
    double shift;   // m = max θx
    double weight;  // Σ exp(θx - m)
    std::size_t n;
};

inline TiltedSums tilted_sums(const Empirical& e, double theta) {
    const double shift = theta >= 0 ? theta * e.max() : theta * e.min();
    double w = 0.0;
    for (double x : e.points()) w += std::exp(theta * x - shift);
    return {shift, w, e.points().size()};
}

}  // namespace detail

/// Checks every family invariant; returns the spec unchanged or throws
/// Error(InvalidParameter) naming the offending field.
inline const DistributionSpec& validate(const DistributionSpec& spec) {
    using detail::positive;
    using detail::require;
    std::visit(detail::overloaded{
                   [](const Deterministic& d) { require(positive(d.value), "value", "must be finite and > 0"); },
                   [](const Exponential& d) { require(positive(d.rate), "rate", "must be finite and > 0"); },
                   [](const Gamma& d) {
                       require(positive(d.shape), "shape", "must be finite and > 0");
                       require(positive(d.rate), "rate", "must be finite and > 0");
                   },
                   [](const Uniform& d) {
                       require(std::isfinite(d.lo) && d.lo >= 0.0, "lo", "must be finite and >= 0");
                       require(std::isfinite(d.hi) && d.lo < d.hi, "hi", "must exceed lo");
                   },
                   [](const HyperExponential& d) {
                       require(!d.weights.empty(), "weights", "must be nonempty");
                       require(d.weights.size() == d.rates.size(), "rates", "must match weights in length");
                       for (double w : d.weights) require(positive(w), "weights", "entries must be > 0");
                       for (double r : d.rates) require(positive(r), "rates", "entries must be > 0");
                       const double total = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
                       require(std::abs(total - 1.0) <= 1e-12, "weights", "must sum to 1");
                   },
                   [](const Empirical& d) {
                       require(!d.points().empty(), "points", "must be nonempty");
                       for (double x : d.points())
                           require(std::isfinite(x) && x >= 0.0, "points", "entries must be finite and >= 0");
                   },
               },
               spec);
    return spec;
}

/// Exact mean and variance; Empirical uses the plug-in (denominator n) values.
inline Moments moments(const DistributionSpec& spec) {
    return std::visit(
        detail::overloaded{
            [](const Deterministic& d) { return Moments{d.value, 0.0}; },
            [](const Exponential& d) { return Moments{1.0 / d.rate, 1.0 / (d.rate * d.rate)}; },
            [](const Gamma& d) { return Moments{d.shape / d.rate, d.shape / (d.rate * d.rate)}; },
            [](const Uniform& d) {
                const double w = d.hi - d.lo;
                return Moments{0.5 * (d.lo + d.hi), w * w / 12.0};
            },
            [](const HyperExponential& d) {
                double m1 = 0.0, m2 = 0.0;
                for (std::size_t k = 0; k < d.weights.size(); ++k) {
                    m1 += d.weights[k] / d.rates[k];
                    m2 += 2.0 * d.weights[k] / (d.rates[k] * d.rates[k]);
                }
                return Moments{m1, m2 - m1 * m1};
            },
            [](const Empirical& d) {
                const auto pts = d.points();
                const double n = static_cast<double>(pts.size());
                const double mean = std::accumulate(pts.begin(), pts.end(), 0.0) / n;
                double ss = 0.0;
                for (double x : pts) ss += (x - mean) * (x - mean);
                return Moments{mean, ss / n};
            },
        },
        spec);
}

inline ArrivalSummary summarize_arrival(const DistributionSpec& spec) {
    const Moments m = moments(spec);
    const double sigma = std::holds_alternative<Deterministic>(spec) ? 0.0 : std::sqrt(m.variance);
    return {1.0 / m.mean, sigma, m.mean};
}

/// Supremum of 𝒟 = {θ : E[e^{θX}] < ∞}; +∞ for bounded-support families.
inline double theta_sup(const DistributionSpec& spec) {
    return std::visit(detail::overloaded{
                          [](const Exponential& d) { return d.rate; },
                          [](const Gamma& d) { return d.rate; },
                          [](const HyperExponential& d) { return *std::min_element(d.rates.begin(), d.rates.end()); },
                          [](const auto&) { return std::numeric_limits<double>::infinity(); },
                      },
                      spec);
}

/// log E[exp(θX)], or kOutsideDomain when θ ∉ 𝒟. Exactly 0 at θ = 0.
inline double log_mgf(const DistributionSpec& spec, double theta) {
    if (theta == 0.0) return 0.0;
    if (theta >= theta_sup(spec)) return kOutsideDomain;
    return std::visit(
        detail::overloaded{
            [&](const Deterministic& d) { return theta * d.value; },
            [&](const Exponential& d) { return -std::log1p(-theta / d.rate); },
            [&](const Gamma& d) { return -d.shape * std::log1p(-theta / d.rate); },
            [&](const Uniform& d) { return theta * d.lo + detail::log_expm1_over(theta * (d.hi - d.lo)); },
            [&](const HyperExponential& d) {
                double m = 0.0;
                for (std::size_t k = 0; k < d.weights.size(); ++k)
                    m += d.weights[k] * d.rates[k] / (d.rates[k] - theta);
                return std::log(m);
            },
            [&](const Empirical& d) {
                const auto s = detail::tilted_sums(d, theta);
                return s.shift + std::log(s.weight / static_cast<double>(s.n));
            },
        },
        spec);
}

/// Derivatives of log_mgf at an interior θ. For Empirical these are the mean
/// and variance of X under the exponentially tilted resampling measure.
inline CgfDerivatives log_mgf_derivatives(const DistributionSpec& spec, double theta) {
    if (!(theta < theta_sup(spec)))
        throw Error(Errc::OutsideDomain, "theta " + std::to_string(theta) + " is not inside the MGF domain");
    return std::visit(
        detail::overloaded{
            [&](const Deterministic& d) { return CgfDerivatives{d.value, 0.0}; },
            [&](const Exponential& d) {
                const double r = 1.0 / (d.rate - theta);
                return CgfDerivatives{r, r * r};
            },
            [&](const Gamma& d) {
                const double r = 1.0 / (d.rate - theta);
                return CgfDerivatives{d.shape * r, d.shape * r * r};
            },
            [&](const Uniform& d) {
                const double w = d.hi - d.lo;
                const double u = theta * w;
                return CgfDerivatives{d.lo + w * detail::log_expm1_over_d1(u), w * w * detail::log_expm1_over_d2(u)};
            },
            [&](const HyperExponential& d) {
                double m0 = 0.0, m1 = 0.0, m2 = 0.0;
                for (std::size_t k = 0; k < d.weights.size(); ++k) {
                    const double r = 1.0 / (d.rates[k] - theta);
                    const double term = d.weights[k] * d.rates[k] * r;
                    m0 += term;
                    m1 += term * r;
                    m2 += 2.0 * term * r * r;
                }
                const double mean = m1 / m0;
                return CgfDerivatives{mean, m2 / m0 - mean * mean};
            },
            [&](const Empirical& d) {
                const auto s = detail::tilted_sums(d, theta);
                double mean = 0.0;
                for (double x : d.points()) mean += x * std::exp(theta * x - s.shift);
                mean /= s.weight;
                double var = 0.0;
                for (double x : d.points()) var += (x - mean) * (x - mean) * std::exp(theta * x - s.shift);
                return CgfDerivatives{mean, var / s.weight};
            },
        },
        spec);
}

// ---------------------------------------------------------------------------
// Sampling

struct DeterministicSampler {
    double value;
    double operator()(RngStream&) const noexcept { return value; }
};

struct ExponentialSampler {
    boost::random::exponential_distribution<double> dist;
    double operator()(RngStream& rng) { return dist(rng); }
};

struct GammaSampler {
    boost::random::gamma_distribution<double> dist;
    double operator()(RngStream& rng) { return dist(rng); }
};

struct UniformSampler {
    double lo;
    double width;
    double operator()(RngStream& rng) noexcept { return lo + width * rng.uniform(); }
};

struct HyperExponentialSampler {
    std::vector<double> cumulative;
    std::vector<double> rates;
    boost::random::exponential_distribution<double> unit{1.0};

    double operator()(RngStream& rng) {
        const double u = rng.uniform();
        std::size_t k = 0;
        while (k + 1 < cumulative.size() && u >= cumulative[k]) ++k;
        return unit(rng) / rates[k];
    }
};

struct EmpiricalSampler {
    std::span<const double> points;
    boost::random::uniform_int_distribution<std::size_t> index;
    double operator()(RngStream& rng) { return points[index(rng)]; }
};

/// A ready-to-draw sampler per family. Hot loops visit this once and then
/// call the concrete functor directly.
using Sampler = std::variant<DeterministicSampler, ExponentialSampler, GammaSampler, UniformSampler,
                             HyperExponentialSampler, EmpiricalSampler>;

/// The returned sampler borrows Empirical point storage from `spec`, which
/// must outlive it.
inline Sampler make_sampler(const DistributionSpec& spec) {
    return std::visit(
        detail::overloaded{
            [](const Deterministic& d) -> Sampler { return DeterministicSampler{d.value}; },
            [](const Exponential& d) -> Sampler {
                return ExponentialSampler{boost::random::exponential_distribution<double>(d.rate)};
            },
            [](const Gamma& d) -> Sampler {
                return GammaSampler{boost::random::gamma_distribution<double>(d.shape, 1.0 / d.rate)};
            },
            [](const Uniform& d) -> Sampler { return UniformSampler{d.lo, d.hi - d.lo}; },
            [](const HyperExponential& d) -> Sampler {
                HyperExponentialSampler s;
                std::partial_sum(d.weights.begin(), d.weights.end(), std::back_inserter(s.cumulative));
                s.rates = d.rates;
                return s;
            },
            [](const Empirical& d) -> Sampler {
                return EmpiricalSampler{d.points(),
                                        boost::random::uniform_int_distribution<std::size_t>(0, d.points().size() - 1)};
            },
        },
        spec);
}

inline double draw(Sampler& sampler, RngStream& rng) {
    return std::visit([&](auto& s) { return s(rng); }, sampler);
}

/// One draw; the same (spec, stream state) always yields the same value.
inline double sample(const DistributionSpec& spec, RngStream& rng) {
    Sampler s = make_sampler(spec);
    return draw(s, rng);
}

}  // namespace fjq
