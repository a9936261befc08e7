#include "vpinn/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "vpinn/basis.hpp"
#include "vpinn/errors.hpp"

namespace vpinn {

std::string_view to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::GaussLegendre: return "gauss-legendre";
        case RuleKind::GaussLobatto: return "gauss-lobatto";
    }
    return "unknown";
}

RuleKind rule_kind_from_string(std::string_view name) {
    if (name == "gauss-legendre" || name == "legendre") return RuleKind::GaussLegendre;
    if (name == "gauss-lobatto" || name == "lobatto") return RuleKind::GaussLobatto;
    throw ConfigError(
        fmt::format("unknown quadrature kind '{}' (expected gauss-legendre|gauss-lobatto)", name));
}

namespace {

constexpr double kNewtonTol = 1e-14;
constexpr int kNewtonMaxIter = 100;

// Newton iteration x <- x - f/f' where (f, f') is picked from the Legendre values at x.
template <class Pick>
double newton_root(double x, int degree, Pick pick) {
    std::vector<LegendreValue> seq(static_cast<std::size_t>(degree) + 1);
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        legendre_sequence(x, seq);
        const auto [f, df] = pick(seq.back());
        const double dx = f / df;
        x -= dx;
        if (std::abs(dx) < kNewtonTol) return x;
    }
    throw InternalError(fmt::format("quadrature root iteration did not converge (degree {})", degree));
}

QuadratureRule legendre_rule(int Q) {
    QuadratureRule rule{RuleKind::GaussLegendre, Q, std::vector<double>(Q), std::vector<double>(Q)};
    const int half = (Q + 1) / 2;
    std::vector<LegendreValue> seq(static_cast<std::size_t>(Q) + 1);
    for (int i = 0; i < half; ++i) {
        // i-th root from the left, Chebyshev-like initial guess
        double x = -std::cos(std::numbers::pi * (i + 0.75) / (Q + 0.5));
        x = newton_root(x, Q, [](const LegendreValue& v) { return std::pair{v.p, v.dp}; });
        if (2 * i + 1 == Q) x = 0.0;
        legendre_sequence(x, seq);
        const double dp = seq.back().dp;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = x;
        rule.nodes[Q - 1 - i] = -x;
        rule.weights[i] = w;
        rule.weights[Q - 1 - i] = w;
    }
    return rule;
}

QuadratureRule lobatto_rule(int Q) {
    const int n = Q - 1;
    QuadratureRule rule{RuleKind::GaussLobatto, Q, std::vector<double>(Q), std::vector<double>(Q)};
    const double end_weight = 2.0 / (n * (n + 1.0));
    rule.nodes.front() = -1.0;
    rule.nodes.back() = 1.0;
    rule.weights.front() = end_weight;
    rule.weights.back() = end_weight;
    std::vector<LegendreValue> seq(static_cast<std::size_t>(n) + 1);
    const int half = Q / 2;
    for (int i = 1; i < half + (Q % 2); ++i) {
        double x = -std::cos(std::numbers::pi * i / n);
        x = newton_root(x, n, [](const LegendreValue& v) { return std::pair{v.dp, v.d2p}; });
        if (2 * i + 1 == Q) x = 0.0;
        legendre_sequence(x, seq);
        const double p = seq.back().p;
        const double w = end_weight / (p * p);
        rule.nodes[i] = x;
        rule.nodes[Q - 1 - i] = -x;
        rule.weights[i] = w;
        rule.weights[Q - 1 - i] = w;
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_rule(RuleKind kind, int order) {
    if (order < 2) throw ConfigError(fmt::format("quadrature order Q={} must be >= 2", order));
    QuadratureRule rule = kind == RuleKind::GaussLegendre ? legendre_rule(order) : lobatto_rule(order);
    for (std::size_t q = 1; q < rule.nodes.size(); ++q) {
        if (!(rule.nodes[q] > rule.nodes[q - 1])) {
            throw InternalError(
                fmt::format("{} rule with Q={} has non-increasing nodes", to_string(kind), order));
        }
    }
    return rule;
}

}  // namespace vpinn
