#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "fjq/asymptotics.hpp"
#include "fjq/standardize.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fjq;

namespace {

LundbergSolution solution(double gamma, double lambda_prime) {
    return {gamma, lambda_prime, 1.0, hitting_constant(gamma, lambda_prime), 10.0, true};
}

LundbergSolution exp2() { return solve_gamma(Exponential{2.0}, 1.0); }

}  // namespace

TEST(WaitLaw, Examples) {
    LimitLaw law = wait_limit_law(solution(2.0, 0.5), 0.0);
    EXPECT_EQ(law.kind, LawKind::Normal);
    EXPECT_DOUBLE_EQ(law.center_coeff, 0.5);
    EXPECT_EQ(law.scale, 0.0);
    law = wait_limit_law(solution(2.0, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(law.center_coeff, 0.5);
    EXPECT_DOUBLE_EQ(law.scale, 1.0);
    law = wait_limit_law(exp2(), 1.0);
    EXPECT_NEAR(law.center_coeff, oracle::kExp2WaitCenter, 1e-10);
    EXPECT_NEAR(law.scale, oracle::kExp2WaitScale, 1e-10);
    EXPECT_NEAR(law.scale, 0.6556, 5e-4);
}

TEST(WaitLaw, RequiresInteriorRoot) {
    LundbergSolution s = solution(2.0, 0.5);
    s.interior = false;
    EXPECT_ERRC(wait_limit_law(s, 1.0), AssumptionViolated);
    EXPECT_ERRC(queue_limit_law(s, 1.0, 1.0), AssumptionViolated);
}

TEST(QueueLaw, Examples) {
    LimitLaw law = queue_limit_law(solution(2.0, 0.5), 3.0, 0.0);
    EXPECT_DOUBLE_EQ(law.center_coeff, 1.5);
    EXPECT_EQ(law.scale, 0.0);
    law = queue_limit_law(solution(2.0, 0.5), 2.0, 0.5);
    EXPECT_NEAR(law.scale, std::sqrt(2.0), 1e-15);
    const auto s = exp2();
    const LimitLaw wait = wait_limit_law(s, 1.3);
    law = queue_limit_law(s, 1.0, 1.3);
    EXPECT_NEAR(law.scale * law.scale, wait.scale * wait.scale + 1.3 * 1.3 / s.gamma, 1e-14);
    EXPECT_DOUBLE_EQ(law.center_coeff, 1.0 / s.gamma);
}

TEST(BoundLaw, MatchesQuadratureOracle) {
    const auto s = exp2();
    const LimitLaw lower = bound_law(LawKind::LowerBoundMix, s, 1.0, 0.1 * s.c_hat);
    const LimitLaw upper = bound_law(LawKind::UpperBoundMix, s, 1.0, 0.1 * s.c_hat);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(bound_law_cdf(lower, oracle::kMixPoints[i]), oracle::kLowerMixCdf[i], 1e-10);
        EXPECT_NEAR(bound_law_cdf(upper, oracle::kMixPoints[i]), oracle::kUpperMixCdf[i], 1e-10);
    }
}

TEST(BoundLaw, MatchesMonteCarlo) {
    const auto s = exp2();
    const double eps = 0.25 * s.c_hat;
    for (LawKind kind : {LawKind::LowerBoundMix, LawKind::UpperBoundMix}) {
        const LimitLaw law = bound_law(kind, s, 1.0, eps);
        RngStream rng(5);
        boost::random::normal_distribution<double> z;
        const std::size_t n = 1'000'000;
        const double sign = kind == LawKind::LowerBoundMix ? -1.0 : 1.0;
        std::vector<double> xs(n);
        for (auto& x : xs) x = law.mix_a() * z(rng) + sign * law.mix_b() * std::abs(z(rng));
        for (double x : {-1.0, -0.2, 0.0, 0.4, 1.1}) {
            const double share = std::count_if(xs.begin(), xs.end(), [&](double v) { return v <= x; }) / double(n);
            const double cdf = bound_law_cdf(law, x);
            EXPECT_NEAR(share, cdf, 5.0 * std::sqrt(cdf * (1 - cdf) / n) + 1e-6);
        }
    }
}

TEST(BoundLaw, CollapsesToTheNormalAsEpsilonVanishes) {
    const auto s = exp2();
    for (LawKind kind : {LawKind::LowerBoundMix, LawKind::UpperBoundMix}) {
        const LimitLaw law = bound_law(kind, s, 1.0, 1e-14);
        for (double x = -3.0; x <= 3.0; x += 0.25)
            EXPECT_NEAR(bound_law_cdf(law, x), normal_cdf(x / std::sqrt(s.c_hat)), 1e-6);
    }
}

// The gap closes like sqrt(ε): F(x) ≈ Φ(x/a) ± b·E|X₂|·φ(x/a)/a.
TEST(BoundLaw, FirstOrderGapAtSmallEpsilon) {
    const auto s = exp2();
    const double eps = 1e-10;
    for (LawKind kind : {LawKind::LowerBoundMix, LawKind::UpperBoundMix}) {
        const LimitLaw law = bound_law(kind, s, 1.0, eps);
        const double sign = kind == LawKind::LowerBoundMix ? 1.0 : -1.0;
        const double a = law.mix_a(), b = law.mix_b();
        for (double x = -3.0; x <= 3.0; x += 0.25) {
            const double first_order =
                normal_cdf(x / a) + sign * b * std::sqrt(2.0 / std::numbers::pi) * normal_pdf(x / a) / a;
            EXPECT_NEAR(bound_law_cdf(law, x), first_order, 1e-9);
        }
    }
}

TEST(BoundLaw, MonotoneWithLimitsAndOrdered) {
    const auto s = exp2();
    const LimitLaw lower = bound_law(LawKind::LowerBoundMix, s, 1.0, 0.1 * s.c_hat);
    const LimitLaw upper = bound_law(LawKind::UpperBoundMix, s, 1.0, 0.1 * s.c_hat);
    for (const LimitLaw& law : {lower, upper}) {
        double prev = 0.0;
        for (double x = -8.0; x <= 8.0; x += 0.05) {
            const double v = bound_law_cdf(law, x);
            EXPECT_GE(v, prev - 1e-14);
            prev = v;
        }
        EXPECT_LT(bound_law_cdf(law, -12.0), 1e-12);
        EXPECT_GT(bound_law_cdf(law, 12.0), 1.0 - 1e-12);
    }
    for (double x = -3.0; x <= 3.0; x += 0.1) EXPECT_GE(bound_law_cdf(lower, x), bound_law_cdf(upper, x));
}

TEST(BoundLaw, Errors) {
    const auto s = exp2();
    EXPECT_ERRC(bound_law(LawKind::Normal, s, 1.0, 0.01), KindMismatch);
    EXPECT_ERRC(bound_law(LawKind::LowerBoundMix, s, 1.0, 0.0), InvalidParameter);
    EXPECT_ERRC(bound_law(LawKind::LowerBoundMix, s, 1.0, s.c_hat), InvalidParameter);
    EXPECT_ERRC(bound_law_cdf(wait_limit_law(s, 1.0), 0.0), KindMismatch);
}

TEST(LimitLawQuantile, InvertsTheCdf) {
    const auto s = exp2();
    for (const LimitLaw& law :
         {wait_limit_law(s, 1.0), bound_law(LawKind::LowerBoundMix, s, 1.0, 0.1 * s.c_hat),
          bound_law(LawKind::UpperBoundMix, s, 1.0, 0.3 * s.c_hat)}) {
        for (double p : {0.001, 0.05, 0.3, 0.5, 0.77, 0.999}) EXPECT_NEAR(limit_law_cdf(law, limit_law_quantile(law, p)), p, 1e-9);
    }
}

TEST(PredictedQuantile, MedianIsTheCenter) {
    const LimitLaw law = wait_limit_law(exp2(), 1.0);
    for (std::size_t n : {2u, 100u, 10000u})
        EXPECT_DOUBLE_EQ(predicted_quantile(law, n, 0.5).value, law.center_coeff * std::log(double(n)));
}

TEST(PredictedQuantile, AffineInTheStandardQuantile) {
    LimitLaw law;
    law.center_coeff = 0.5;
    law.scale = 1.0;
    const double log_n = std::log(1000.0);
    const auto q = predicted_quantile(law, 1000, 0.8413447460685429);
    EXPECT_NEAR(q.value, 0.5 * log_n + std::sqrt(log_n), 1e-9);
    EXPECT_FALSE(q.degenerate);
}

TEST(PredictedQuantile, MonotoneInN) {
    const LimitLaw law = wait_limit_law(exp2(), 1.0);
    for (double p = 0.1; p <= 0.9; p += 0.1) {
        double prev = -1.0;
        for (std::size_t n = 2; n <= 1'000'000; n *= 3) {
            const double v = predicted_quantile(law, n, p).value;
            EXPECT_GT(v, prev);
            prev = v;
        }
    }
}

TEST(PredictedQuantile, DegenerateLaw) {
    const LimitLaw law = wait_limit_law(exp2(), 0.0);
    const auto q = predicted_quantile(law, 100, 0.9);
    EXPECT_TRUE(q.degenerate);
    EXPECT_DOUBLE_EQ(q.value, law.center_coeff * std::log(100.0));
    EXPECT_ERRC(predicted_quantile(law, 1, 0.5), InvalidParameter);
    EXPECT_ERRC(predicted_quantile(law, 10, 1.0), OutOfRange);
}

TEST(Hetero, PicksTheSmallestGamma) {
    std::vector<ClassSpec> classes;
    for (double g : {1.2, 0.8, 2.0}) classes.push_back({Exponential{1.0}, 1.0 / 3.0, solution(g, 1.0)});
    const auto pick = hetero_select(classes, 1.0);
    EXPECT_EQ(pick.k_star, 1u);
    EXPECT_DOUBLE_EQ(pick.law.center_coeff, 1.0 / 0.8);
}

TEST(Hetero, SingleClassIsTheWaitLaw) {
    const auto s = exp2();
    const std::vector<ClassSpec> one{{Exponential{2.0}, 1.0, s}};
    const auto pick = hetero_select(one, 1.0);
    const LimitLaw direct = wait_limit_law(s, 1.0);
    EXPECT_EQ(pick.k_star, 0u);
    EXPECT_EQ(pick.law.center_coeff, direct.center_coeff);
    EXPECT_EQ(pick.law.scale, direct.scale);
}

TEST(Hetero, Exp2BeatsExp4) {
    const std::vector<ClassSpec> classes{{Exponential{2.0}, 0.5, solve_gamma(Exponential{2.0}, 1.0)},
                                         {Exponential{4.0}, 0.5, solve_gamma(Exponential{4.0}, 1.0)}};
    EXPECT_EQ(hetero_select(classes, 1.0).k_star, 0u);
    const std::vector<ClassSpec> swapped{classes[1], classes[0]};
    EXPECT_EQ(hetero_select(swapped, 1.0).k_star, 1u);
}

TEST(Hetero, Errors) {
    std::vector<ClassSpec> tie{{Exponential{1.0}, 0.5, solution(1.0, 1.0)},
                               {Exponential{1.0}, 0.5, solution(1.0 + 1e-12, 1.0)}};
    EXPECT_ERRC(hetero_select(tie, 1.0), AmbiguousMinimum);
    std::vector<ClassSpec> bad_alpha{{Exponential{1.0}, 0.5, solution(1.0, 1.0)},
                                     {Exponential{1.0}, 0.6, solution(2.0, 1.0)}};
    EXPECT_ERRC(hetero_select(bad_alpha, 1.0), InvalidParameter);
    EXPECT_ERRC(hetero_select(std::vector<ClassSpec>{}, 1.0), InvalidParameter);
}

TEST(Standardize, RoundTripAndCenter) {
    const LimitLaw law = wait_limit_law(exp2(), 1.0);
    const std::size_t n = 10000;
    const double log_n = std::log(double(n));
    const std::vector<double> xs{0.0, 1.5, law.center_coeff * log_n, 17.25};
    const StandardizedSample z = standardize(xs, law, n);
    EXPECT_NEAR(z.values[2], 0.0, 1e-15);
    EXPECT_NEAR(z.values[1], (1.5 - law.center_coeff * log_n) / std::sqrt(log_n), 1e-15);
    const auto back = destandardize(z);
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(back[i], xs[i], 1e-12);
    EXPECT_ERRC(standardize(xs, law, 1), InvalidParameter);
}
