#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fjq/dist.hpp"
#include "fjq/error.hpp"
#include "fjq/lundberg.hpp"
#include "fjq/stats.hpp"

namespace fjq {

enum class LawKind { Normal, LowerBoundMix, UpperBoundMix };

constexpr std::string_view to_string(LawKind kind) noexcept {
    switch (kind) {
    case LawKind::Normal: return "normal";
    case LawKind::LowerBoundMix: return "lower-bound";
    case LawKind::UpperBoundMix: return "upper-bound";
    }
    return "unknown";
}

/// Limit of (M − center_coeff·log N)/sqrt(log N) for a maximum M over N queues.
///
/// Normal: scale·X. The two mixtures are the ε-window bounds
///   LowerBoundMix: σ_A sqrt(ĉ−ε) X₁ − σ_A sqrt(ε) |X₂|
///   UpperBoundMix: σ_A sqrt(ĉ−ε) X₁ + σ_A sqrt(2ε) |X₂|
/// which squeeze the normal law as ε ↓ 0. For mixtures `scale` records the
/// limiting normal scale σ_A sqrt(ĉ).
struct LimitLaw {
    LawKind kind = LawKind::Normal;
    double center_coeff = 0.0;
    double scale = 0.0;
    double epsilon = 0.0;
    double c_hat = 0.0;
    double sigma_A = 0.0;

    /// Coefficient of X₁ in a mixture law.
    double mix_a() const { return sigma_A * std::sqrt(c_hat - epsilon); }
    /// Coefficient of |X₂| in a mixture law (sign given by kind).
    double mix_b() const {
        return sigma_A * std::sqrt(kind == LawKind::UpperBoundMix ? 2.0 * epsilon : epsilon);
    }
};

struct ClassSpec {
    DistributionSpec service;
    double alpha;
    LundbergSolution solution;
};

namespace detail {

inline void require_interior(const LundbergSolution& s) {
    if (!s.interior)
        throw Error(Errc::AssumptionViolated, "Lundberg root is not interior to the MGF domain");
}

inline void require_sigma(double sigma_A) {
    if (!(std::isfinite(sigma_A) && sigma_A >= 0.0))
        throw Error(Errc::InvalidParameter, "sigma_A must be finite and >= 0", "sigma_A");
}

}  // namespace detail

/// Normal law of the longest waiting time: center 1/γ, scale σ_A/sqrt(Λ'(γ)γ).
inline LimitLaw wait_limit_law(const LundbergSolution& s, double sigma_A) {
    detail::require_interior(s);
    detail::require_sigma(sigma_A);
    LimitLaw law;
    law.center_coeff = 1.0 / s.gamma;
    law.scale = sigma_A / std::sqrt(s.lambda_prime * s.gamma);
    law.c_hat = s.c_hat;
    law.sigma_A = sigma_A;
    return law;
}

/// Normal law of the longest queue: center λ/γ, scale
/// sqrt(λ²σ_A²/(Λ'(γ)γ) + λ³σ_A²/γ).
inline LimitLaw queue_limit_law(const LundbergSolution& s, double lambda, double sigma_A) {
    detail::require_interior(s);
    detail::require_sigma(sigma_A);
    detail::check_rate(lambda);
    const double var = sigma_A * sigma_A;
    LimitLaw law;
    law.center_coeff = lambda / s.gamma;
    law.scale = std::sqrt(lambda * lambda * var / (s.lambda_prime * s.gamma) + lambda * lambda * lambda * var / s.gamma);
    law.c_hat = s.c_hat;
    law.sigma_A = sigma_A;
    return law;
}

/// ε-window bound law for the waiting-time maximum; needs 0 < ε < ĉ.
inline LimitLaw bound_law(LawKind kind, const LundbergSolution& s, double sigma_A, double epsilon) {
    if (kind == LawKind::Normal) throw Error(Errc::KindMismatch, "bound_law builds mixture kinds only");
    detail::require_interior(s);
    detail::require_sigma(sigma_A);
    if (!(epsilon > 0.0 && epsilon < s.c_hat))
        throw Error(Errc::InvalidParameter, "epsilon must lie in (0, c_hat)", "epsilon");
    LimitLaw law;
    law.kind = kind;
    law.center_coeff = 1.0 / s.gamma;
    law.scale = sigma_A * std::sqrt(s.c_hat);
    law.epsilon = epsilon;
    law.c_hat = s.c_hat;
    law.sigma_A = sigma_A;
    return law;
}

/// CDF of a mixture law at x:
///   ∫₀^∞ 2φ(y) Φ((x ± b·y)/a) dy
/// by adaptive Gauss–Kronrod on [0, 8]; the half-normal mass beyond 8
/// (2Φ̄(8) < 1.3e-15) is added with the integrand's value at y = 8.
inline double bound_law_cdf(const LimitLaw& law, double x) {
    if (law.kind == LawKind::Normal)
        throw Error(Errc::KindMismatch, "bound_law_cdf applies to mixture laws; use normal_cdf for Normal");
    const double a = law.mix_a();
    const double b = law.mix_b();
    const double sign = law.kind == LawKind::LowerBoundMix ? 1.0 : -1.0;

    if (a == 0.0) {
        if (b == 0.0) return x >= 0.0 ? 1.0 : 0.0;
        if (law.kind == LawKind::LowerBoundMix) return x >= 0.0 ? 1.0 : 2.0 * normal_cdf(x / b);
        return x < 0.0 ? 0.0 : 2.0 * normal_cdf(x / b) - 1.0;
    }

    constexpr double kCut = 8.0;
    auto integrand = [&](double y) { return 2.0 * normal_pdf(y) * normal_cdf((x + sign * b * y) / a); };
    double error = 0.0;
    const double body =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, 0.0, kCut, 20, 1e-12, &error);
    const double tail = 2.0 * normal_cdf(-kCut) * normal_cdf((x + sign * b * kCut) / a);
    return std::clamp(body + tail, 0.0, 1.0);
}

/// CDF of the standardized law at x, dispatching on kind.
inline double limit_law_cdf(const LimitLaw& law, double x) {
    if (law.kind != LawKind::Normal) return bound_law_cdf(law, x);
    if (law.scale == 0.0) return x >= 0.0 ? 1.0 : 0.0;
    return normal_cdf(x / law.scale);
}

/// p-quantile of the standardized law (scale·z_p for Normal, inverted CDF
/// for mixtures).
inline double limit_law_quantile(const LimitLaw& law, double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error(Errc::OutOfRange, "quantile needs p in (0, 1)");
    if (law.kind == LawKind::Normal) return law.scale * normal_quantile(p);
    if (law.mix_a() == 0.0 && law.mix_b() == 0.0) return 0.0;
    const double spread = law.mix_a() + law.mix_b();
    double lo = -spread, hi = spread;
    while (bound_law_cdf(law, lo) > p) lo *= 2.0;
    while (bound_law_cdf(law, hi) < p) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, spread); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (bound_law_cdf(law, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct QuantilePrediction {
    double value;
    bool degenerate;  ///< law has zero spread and p != 0.5: value is the center
};

/// center·log N + sqrt(log N)·(standardized p-quantile).
inline QuantilePrediction predicted_quantile(const LimitLaw& law, std::size_t n_servers, double p) {
    if (n_servers < 2) throw Error(Errc::InvalidParameter, "n_servers must be >= 2", "n_servers");
    if (!(p > 0.0 && p < 1.0)) throw Error(Errc::OutOfRange, "quantile needs p in (0, 1)");
    const double log_n = std::log(static_cast<double>(n_servers));
    const double center = law.center_coeff * log_n;
    const bool zero_spread =
        law.kind == LawKind::Normal ? law.scale == 0.0 : (law.mix_a() == 0.0 && law.mix_b() == 0.0);
    if (zero_spread) return {center, p != 0.5};
    return {center + std::sqrt(log_n) * limit_law_quantile(law, p), false};
}

struct HeteroSelection {
    std::size_t k_star;  ///< 0-based index into the input class list
    LimitLaw law;
};

/// Picks the class with the smallest γ; its waiting-time law governs the
/// whole system. α_k only certify linear class growth and do not enter the
/// law. Refuses ties within 1e-9 (absolute on γ).
inline HeteroSelection hetero_select(std::span<const ClassSpec> classes, double sigma_A) {
    if (classes.empty()) throw Error(Errc::InvalidParameter, "need at least one class", "classes");
    double total = 0.0;
    for (const auto& c : classes) {
        if (!(c.alpha > 0.0 && c.alpha <= 1.0))
            throw Error(Errc::InvalidParameter, "alpha must lie in (0, 1]", "alpha");
        detail::require_interior(c.solution);
        total += c.alpha;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(Errc::InvalidParameter, "alphas must sum to 1", "alpha");

    std::size_t best = 0;
    for (std::size_t k = 1; k < classes.size(); ++k)
        if (classes[k].solution.gamma < classes[best].solution.gamma) best = k;
    for (std::size_t k = 0; k < classes.size(); ++k) {
        if (k != best && std::abs(classes[k].solution.gamma - classes[best].solution.gamma) <= 1e-9)
            throw Error(Errc::AmbiguousMinimum, "classes " + std::to_string(best) + " and " + std::to_string(k) +
                                                    " share the smallest gamma");
    }
    return {best, wait_limit_law(classes[best].solution, sigma_A)};
}

}  // namespace fjq
