#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "fjq/dist.hpp"
#include "fjq/error.hpp"

namespace fjq {

/// Cramér–Lundberg constants of a (service, arrival-rate) pair.
struct LundbergSolution {
    double gamma;                ///< positive root of Λ
    double lambda_prime;         ///< Λ'(γ)
    double lambda_double_prime;  ///< Λ''(γ)
    double c_hat;                ///< 1/(γ Λ'(γ))
    double theta_sup;            ///< sup 𝒟(Λ), possibly +∞
    bool interior;               ///< γ < theta_sup
};

/// Λ(θ) = log E[exp(θ(S − 1/λ))].
/// Bounded-support families fold the shift into the linear term first, so
/// Λ keeps its log-scale tail for very large θ instead of cancelling to 0.
inline double shifted_cgf(const DistributionSpec& service, double lambda, double theta) {
    if (theta == 0.0) return 0.0;
    const double c = 1.0 / lambda;
    if (const auto* d = std::get_if<Deterministic>(&service)) return theta * (d->value - c);
    if (const auto* u = std::get_if<Uniform>(&service)) {
        // Tilt toward the edge on θ's side: g(u) = u + g(−u).
        const double edge = theta >= 0 ? u->hi : u->lo;
        return theta * (edge - c) + detail::log_expm1_over(-std::abs(theta) * (u->hi - u->lo));
    }
    if (const auto* e = std::get_if<Empirical>(&service)) {
        const auto s = detail::tilted_sums(*e, theta);
        const double edge = theta >= 0 ? e->max() : e->min();
        return theta * (edge - c) + std::log(s.weight / static_cast<double>(s.n));
    }
    const double k = log_mgf(service, theta);
    if (k == kOutsideDomain) return kOutsideDomain;
    return k - theta * c;
}

/// (Λ'(θ), Λ''(θ)); throws OutsideDomain unless θ < sup 𝒟.
inline CgfDerivatives shifted_cgf_derivatives(const DistributionSpec& service, double lambda, double theta) {
    const CgfDerivatives d = log_mgf_derivatives(service, theta);
    return {d.d1 - 1.0 / lambda, d.d2};
}

inline double hitting_constant(double gamma, double lambda_prime) { return 1.0 / (gamma * lambda_prime); }

/// ĉ = 1/(γΛ'(γ)): the maximum reaches (1/γ) log N after about ĉ log N steps.
inline double hitting_constant(const LundbergSolution& s) { return hitting_constant(s.gamma, s.lambda_prime); }

namespace detail {

inline void check_rate(double lambda) {
    if (!(std::isfinite(lambda) && lambda > 0.0))
        throw Error(Errc::InvalidParameter, "lambda must be finite and > 0", "lambda");
}

}  // namespace detail

/// Unique positive root γ of Λ with its derivatives.
///
/// Brackets by doubling θ from 1e-8 until Λ turns nonnegative or the MGF
/// domain ends, bisects to ~1e-14, then polishes with safeguarded Newton.
/// Throws Unstable when E[S] >= 1/λ and NoRoot when Λ stays negative on 𝒟.
/// A root reached only in the limit θ ↑ sup 𝒟 is returned with interior=false.
inline LundbergSolution solve_gamma(const DistributionSpec& service, double lambda) {
    validate(service);
    detail::check_rate(lambda);
    const double drift = moments(service).mean - 1.0 / lambda;
    if (drift >= 0.0)
        throw Error(Errc::Unstable, "E[S] - 1/lambda = " + std::to_string(drift) + " is not negative");

    const double sup = theta_sup(service);
    auto cgf = [&](double t) { return shifted_cgf(service, lambda, t); };

    double lo = 0.0;
    double hi = 1e-8;
    bool hit_boundary = false;
    constexpr long kMaxDoublings = 1'000'000;
    for (long i = 0;; ++i) {
        if (hi >= sup) {
            hi = sup;
            hit_boundary = true;
            break;
        }
        const double v = cgf(hi);
        if (v >= 0.0) break;
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi) || i >= kMaxDoublings)
            throw Error(Errc::NoRoot, "shifted CGF stays negative for all theta > 0");
    }

    for (int i = 0; i < 4000 && hi - lo > 1e-14 * std::max(1.0, lo); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (cgf(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }

    const double f_lo = cgf(lo);
    if (hit_boundary && sup - lo <= 1e-12 * std::max(1.0, sup)) {
        if (std::abs(f_lo) > 1e-12)
            throw Error(Errc::NoRoot, "shifted CGF stays negative up to the MGF domain boundary");
        // Λ(θ) → 0 only as θ ↑ sup 𝒟: derivatives are not available there.
        return {sup, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                std::numeric_limits<double>::quiet_NaN(), sup, false};
    }

    // Safeguarded Newton inside [lo, hi].
    double x = (std::abs(f_lo) <= std::abs(cgf(hi))) ? lo : hi;
    for (int i = 0; i < 200; ++i) {
        const double f = cgf(x);
        if (std::abs(f) <= 1e-14) break;
        if (f < 0.0)
            lo = std::max(lo, x);
        else
            hi = std::min(hi, x);
        double next = x - f / shifted_cgf_derivatives(service, lambda, x).d1;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }

    const CgfDerivatives d = shifted_cgf_derivatives(service, lambda, x);
    return {x, d.d1, d.d2, hitting_constant(x, d.d1), sup, x < sup};
}

/// Λ*(x) with the maximizing t. `attained` is false when no interior t
/// solves Λ'(t) = x; `value` is then the limit of tx − Λ(t) toward the
/// domain edge (often +∞).
struct LegendreValue {
    double value;
    double argmax;
    bool attained;
};

inline LegendreValue legendre(const DistributionSpec& service, double lambda, double x) {
    validate(service);
    detail::check_rate(lambda);
    const double drift = moments(service).mean - 1.0 / lambda;
    if (moments(service).variance == 0.0) {
        // Point mass: Λ is linear, Λ* is 0 at the drift and +∞ elsewhere.
        if (x == drift) return {0.0, 0.0, true};
        return {kOutsideDomain, x > drift ? kOutsideDomain : -kOutsideDomain, false};
    }
    if (x == drift) return {0.0, 0.0, true};

    const double sup = theta_sup(service);
    auto slope = [&](double t) { return shifted_cgf_derivatives(service, lambda, t).d1; };
    auto objective = [&](double t) { return t * x - shifted_cgf(service, lambda, t); };

    double lo, hi;
    if (x > drift) {
        lo = 0.0;
        hi = 1e-8;
        for (;;) {
            if (hi >= sup) {
                hi = sup;  // Λ' → ∞ at a finite edge for every supported family
                break;
            }
            if (slope(hi) >= x) break;
            lo = hi;
            hi *= 2.0;
            if (!std::isfinite(hi)) return {objective(lo), lo, false};
        }
    } else {
        hi = 0.0;
        lo = -1e-8;
        for (;;) {
            if (slope(lo) <= x) break;
            hi = lo;
            lo *= 2.0;
            if (!std::isfinite(lo)) return {objective(hi), hi, false};
        }
    }

    for (int i = 0; i < 4000 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (slope(mid) < x)
            lo = mid;
        else
            hi = mid;
    }
    const double t = (hi < sup) ? 0.5 * (lo + hi) : lo;
    return {objective(t), t, true};
}

}  // namespace fjq
