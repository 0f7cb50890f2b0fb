#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "fjq/error.hpp"

namespace fjq {

/// Standard normal CDF Φ.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal density φ.
inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// Φ⁻¹(p) for p in (0, 1): rational initial guess (Acklam) refined by
/// Newton steps on Φ until |Φ(q) − p| <= 1e-12.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error(Errc::OutOfRange, "normal_quantile needs p in (0, 1)");

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549671664286150e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double q;
    if (p < p_low) {
        const double r = std::sqrt(-2.0 * std::log(p));
        q = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double s = p - 0.5;
        const double r = s * s;
        q = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * s /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double r = std::sqrt(-2.0 * std::log1p(-p));
        q = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    }

    for (int i = 0; i < 8; ++i) {
        // Work in the smaller tail to keep the residual accurate.
        const double err = (q <= 0.0) ? normal_cdf(q) - p : (1.0 - p) - normal_cdf(-q);
        if (std::abs(err) <= 1e-15 * std::max(1e-300, std::min(p, 1.0 - p))) break;
        const double step = err / normal_pdf(q);
        q -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(q))) break;
    }
    return q;
}

/// One-sample Kolmogorov–Smirnov distance sup |F̂ − F| with the
/// right-continuous empirical CDF. Sorts a copy; input order is irrelevant.
inline double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw Error(Errc::EmptySample, "ks_distance needs at least one value");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        const double above = static_cast<double>(i + 1) / n - f;
        const double below = f - static_cast<double>(i) / n;
        d = std::max({d, above, below});
    }
    return std::clamp(d, 0.0, 1.0);
}

/// Two-sample Kolmogorov–Smirnov distance over the merged support.
inline double two_sample_ks(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error(Errc::EmptySample, "two_sample_ks needs two nonempty samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

/// Asymptotic two-sample KS critical value c(α)·sqrt((n+m)/(nm)).
inline double two_sample_ks_critical(double c_alpha, std::size_t n, std::size_t m) {
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    return c_alpha * std::sqrt((dn + dm) / (dn * dm));
}

struct LineFit {
    double slope;
    double intercept;
    double r_squared;
};

/// Ordinary least squares y ≈ slope·x + intercept.
inline LineFit fit_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(Errc::InvalidParameter, "x and y differ in length", "points");
    if (x.size() < 2) throw Error(Errc::DegenerateDesign, "need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error(Errc::DegenerateDesign, "all x values are equal");
    const double slope = sxy / sxx;
    const double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return {slope, my - slope * mx, r2};
}

/// Empirical p-quantile (type 7, linear interpolation) of an unsorted sample.
inline double empirical_quantile(std::span<const double> sample, double p) {
    if (sample.empty()) throw Error(Errc::EmptySample, "empirical_quantile needs values");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double h = (static_cast<double>(s.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace fjq
