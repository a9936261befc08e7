#pragma once

#include <string_view>
#include <vector>

namespace vpinn {

enum class RuleKind { GaussLegendre, GaussLobatto };

std::string_view to_string(RuleKind kind);
RuleKind rule_kind_from_string(std::string_view name);

/// Q-point rule on [-1, 1]; nodes ascending, weights positive.
/// Gauss-Legendre integrates polynomials of degree <= 2Q-1 exactly,
/// Gauss-Lobatto (endpoints included) degree <= 2Q-3.
struct QuadratureRule {
    RuleKind kind = RuleKind::GaussLegendre;
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes by Newton iteration on P_Q (Legendre) or P'_{Q-1} (Lobatto interior),
/// converged to 1e-14. Throws ConfigError for Q < 2.
QuadratureRule gauss_rule(RuleKind kind, int order);

template <class F>
double integrate(const QuadratureRule& rule, F&& f) {
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) sum += rule.weights[q] * f(rule.nodes[q]);
    return sum;
}

/// Tensor product of two 1D rules; point p = i * ny + j holds (x_i, y_j).
struct TensorRule {
    QuadratureRule x;
    QuadratureRule y;

    std::size_t size() const { return x.nodes.size() * y.nodes.size(); }
};

template <class F>
double integrate_2d(const TensorRule& rule, F&& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.x.nodes.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < rule.y.nodes.size(); ++j) {
            row += rule.y.weights[j] * f(rule.x.nodes[i], rule.y.nodes[j]);
        }
        sum += rule.x.weights[i] * row;
    }
    return sum;
}

}  // namespace vpinn
