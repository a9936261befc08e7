#pragma once

// Independent reference checks shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "vpinn/basis.hpp"
#include "vpinn/closedform.hpp"
#include "vpinn/quadrature.hpp"
#include "vpinn/training.hpp"

namespace vpinn::testing {

inline double quad200(const std::function<double(double)>& f) {
    static const QuadratureRule rule = gauss_rule(RuleKind::GaussLegendre, 200);
    return integrate(rule, f);
}

/// Largest |closed form - quadrature of the defining integral| over every closed-form
/// residual, for one shallow sine net.
inline double closedform_max_error(const ShallowNetParams& s, int k_sine, int k_legendre, const BoundaryData& bc) {
    double worst = 0.0;
    const auto note = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
    const auto u = [&](double x) { return s.eval(x)[0]; };
    const auto du = [&](double x) { return s.eval(x)[1]; };
    const auto d2u = [&](double x) { return s.eval(x)[2]; };
    for (int k = 1; k <= k_sine; ++k) {
        const double kp = k * M_PI;
        note(residual_sine_r12(s, k), -quad200([&](double x) { return d2u(x) * std::sin(kp * x); }));
        note(residual_sine_r12(s, k), quad200([&](double x) { return du(x) * kp * std::cos(kp * x); }));
        note(residual_sine_r3(s, k, bc), quad200([&](double x) { return u(x) * kp * kp * std::sin(kp * x); }) +
                                             bc.h * kp * std::cos(kp) - bc.g * kp * std::cos(-kp));
        note(residual_burgers_nl(s, k), quad200([&](double x) { return u(x) * du(x) * std::sin(kp * x); }));
        note(residual_projection(s, k), quad200([&](double x) { return u(x) * std::sin(kp * x); }));
    }
    const TestBasis basis{TestFamily::LegendreComposite, k_legendre};
    for (int k = 1; k <= k_legendre; ++k) {
        const auto v = [&](double x) { return test_fn(basis, k, x); };
        note(residual_legendre_r1(s, k), -quad200([&](double x) { return d2u(x) * v(x).v; }));
        note(residual_legendre_r2(s, k), quad200([&](double x) { return du(x) * v(x).dv; }));
        note(residual_legendre_projection(s, k), quad200([&](double x) { return u(x) * v(x).v; }));
    }
    return worst;
}

struct GradCase {
    std::string name;
    SolutionTag tag;
    NetworkSpec net;
    LossConfig loss;
};

inline LossConfig small_loss(LossForm form, TestFamily fam, int K, bool analytic, double tau = 3.0) {
    LossConfig c;
    c.form = form;
    c.basis = fam;
    c.K = K;
    c.analytic = analytic;
    c.tau = tau;
    c.Q = 60;
    c.penalizing_points = 40;
    c.boundary_per_edge = 6;
    return c;
}

/// Strong and every variational form, shallow-analytic and deep-quadrature, 1D and 2D.
inline std::vector<GradCase> gradient_cases() {
    const NetworkSpec shallow{1, {4}, Activation::Sine};
    const NetworkSpec deep1{1, {6, 6}, Activation::Tanh};
    const NetworkSpec deep2{2, {5, 5}, Activation::Sine};
    std::vector<GradCase> cases;
    for (auto form : {LossForm::V1, LossForm::V2, LossForm::V3, LossForm::Projection}) {
        const std::string f(to_string(form));
        cases.push_back({"shallow-sine-analytic/" + f, SolutionTag::SineModal, shallow,
                         small_loss(form, TestFamily::Sine, 5, true)});
        cases.push_back({"deep-legendre-quadrature/" + f, SolutionTag::SineModal, deep1,
                         small_loss(form, TestFamily::LegendreComposite, 6, false)});
    }
    for (auto form : {LossForm::V1, LossForm::V2, LossForm::Projection}) {
        cases.push_back({"shallow-legendre-analytic/" + std::string(to_string(form)), SolutionTag::Steep, shallow,
                         small_loss(form, TestFamily::LegendreComposite, 6, true)});
    }
    cases.push_back({"strong-burgers", SolutionTag::SineModal, deep1, small_loss(LossForm::Strong, TestFamily::Sine, 1, false)});
    cases.push_back({"strong-2d", SolutionTag::Steep2D, deep2, small_loss(LossForm::Strong, TestFamily::Sine, 1, false)});
    for (auto form : {LossForm::V1, LossForm::V2}) {
        auto c = small_loss(form, TestFamily::LegendreComposite, 3, false);
        c.Q = 12;
        c.rule = RuleKind::GaussLobatto;
        cases.push_back({"deep-2d/" + std::string(to_string(form)), SolutionTag::Steep2D, deep2, c});
    }
    return cases;
}

/// Relative mismatch between the loss gradient and central differences at a random
/// initialization.
inline double gradient_case_mismatch(const GradCase& c, std::uint64_t seed, std::size_t* parameters = nullptr) {
    const auto problem = make_problem(FabricatedSolution::defaults(c.tag));
    const LossEvaluator loss(problem, c.net, c.loss, 5);
    const auto net = initialize_network(c.net, {InitScheme::XavierWidened, 2.0}, seed);
    if (parameters) *parameters = net.parameter_count();
    const auto vg = loss.value_and_gradient(net);
    const auto fd = central_difference([&](const Eigen::VectorXd& p) { return loss.value(with_flat(net, p)); },
                                       net.flatten());
    return gradient_mismatch(vg.gradient, fd);
}

}  // namespace vpinn::testing
