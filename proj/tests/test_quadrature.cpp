#include <cmath>

#include <gtest/gtest.h>

#include "vpinn/basis.hpp"
#include "vpinn/errors.hpp"
#include "vpinn/quadrature.hpp"

using namespace vpinn;

namespace {

double monomial_integral(int n) { return n % 2 ? 0.0 : 2.0 / (n + 1); }

double integrate_monomial(const QuadratureRule& rule, int n) {
    return integrate(rule, [n](double x) { return std::pow(x, n); });
}

}  // namespace

TEST(Quadrature, GaussLegendreExactToDegree2QMinus1) {
    for (int Q = 2; Q <= 64; ++Q) {
        const auto rule = gauss_rule(RuleKind::GaussLegendre, Q);
        ASSERT_EQ(rule.nodes.size(), static_cast<std::size_t>(Q));
        for (int n = 0; n <= 2 * Q - 1; ++n) {
            EXPECT_NEAR(integrate_monomial(rule, n), monomial_integral(n), 1e-12) << "Q=" << Q << " n=" << n;
        }
    }
}

TEST(Quadrature, GaussLobattoExactToDegree2QMinus3) {
    for (int Q = 2; Q <= 64; ++Q) {
        const auto rule = gauss_rule(RuleKind::GaussLobatto, Q);
        ASSERT_EQ(rule.nodes.front(), -1.0);
        ASSERT_EQ(rule.nodes.back(), 1.0);
        for (int n = 0; n <= 2 * Q - 3; ++n) {
            EXPECT_NEAR(integrate_monomial(rule, n), monomial_integral(n), 1e-12) << "Q=" << Q << " n=" << n;
        }
    }
}

TEST(Quadrature, NotExactOneDegreePastTheLimit) {
    // x^{2Q} is the first even monomial the rule misses
    const auto gl = gauss_rule(RuleKind::GaussLegendre, 3);
    EXPECT_GT(std::abs(integrate_monomial(gl, 6) - monomial_integral(6)), 1e-3);
    const auto lob = gauss_rule(RuleKind::GaussLobatto, 3);
    EXPECT_GT(std::abs(integrate_monomial(lob, 4) - monomial_integral(4)), 1e-3);
}

TEST(Quadrature, ThreePointRulesMatchClosedForms) {
    const auto gl = gauss_rule(RuleKind::GaussLegendre, 3);
    EXPECT_NEAR(gl.nodes[0], -std::sqrt(0.6), 1e-15);
    EXPECT_NEAR(gl.nodes[1], 0.0, 1e-15);
    EXPECT_NEAR(gl.weights[0], 5.0 / 9.0, 1e-15);
    EXPECT_NEAR(gl.weights[1], 8.0 / 9.0, 1e-15);

    const auto lob = gauss_rule(RuleKind::GaussLobatto, 4);
    EXPECT_NEAR(lob.nodes[1], -1.0 / std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(lob.weights[0], 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(lob.weights[1], 5.0 / 6.0, 1e-15);
}

TEST(Quadrature, NodesAscendingSymmetricWeightsPositive) {
    for (auto kind : {RuleKind::GaussLegendre, RuleKind::GaussLobatto}) {
        for (int Q : {2, 7, 70, 200}) {
            const auto r = gauss_rule(kind, Q);
            double wsum = 0.0;
            for (int i = 0; i < Q; ++i) {
                EXPECT_GT(r.weights[i], 0.0);
                EXPECT_NEAR(r.nodes[i], -r.nodes[Q - 1 - i], 1e-14);
                if (i > 0) EXPECT_LT(r.nodes[i - 1], r.nodes[i]);
                wsum += r.weights[i];
            }
            EXPECT_NEAR(wsum, 2.0, 1e-13);
        }
    }
}

TEST(Quadrature, RejectsTooFewPoints) {
    EXPECT_THROW(gauss_rule(RuleKind::GaussLegendre, 1), ConfigError);
    EXPECT_THROW(gauss_rule(RuleKind::GaussLobatto, 0), ConfigError);
}

TEST(Quadrature, LegendreOrthogonality) {
    const auto rule = gauss_rule(RuleKind::GaussLegendre, 40);
    for (int j = 0; j <= 20; ++j) {
        for (int k = 0; k <= 20; ++k) {
            const double v = integrate(rule, [&](double x) { return legendre_eval(j, x).p * legendre_eval(k, x).p; });
            const double expect = j == k ? 2.0 / (2 * k + 1) : 0.0;
            EXPECT_NEAR(v, expect, 1e-12) << j << "," << k;
        }
    }
}

TEST(Quadrature, TensorRuleIntegratesProducts) {
    const TensorRule rule{gauss_rule(RuleKind::GaussLobatto, 10), gauss_rule(RuleKind::GaussLegendre, 6)};
    EXPECT_EQ(rule.size(), 60u);
    const double v = integrate_2d(rule, [](double x, double y) { return x * x * y * y * y * y; });
    EXPECT_NEAR(v, (2.0 / 3.0) * (2.0 / 5.0), 1e-14);
}

TEST(Quadrature, KindNamesRoundTrip) {
    for (auto kind : {RuleKind::GaussLegendre, RuleKind::GaussLobatto}) {
        EXPECT_EQ(rule_kind_from_string(to_string(kind)), kind);
    }
    EXPECT_THROW(rule_kind_from_string("simpson"), ConfigError);
}
