#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vpinn/errors.hpp"
#include "vpinn/training.hpp"

using namespace vpinn;
using namespace vpinn::testing;

namespace {

double grid_max_abs(const DeepNetParams& net) {
    Eigen::MatrixXd pts(1, 201);
    for (int i = 0; i < 201; ++i) pts(0, i) = -1.0 + 0.01 * i;
    return eval_batch(net, pts, JetOrder::Value).u.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Loss, GradientsMatchCentralDifferences) {
    std::mt19937_64 rng(31);
    for (const auto& c : gradient_cases()) {
        std::size_t parameters = 0;
        EXPECT_LT(gradient_case_mismatch(c, rng(), &parameters), 1e-5) << c.name;
        EXPECT_LE(parameters, 200u) << c.name;
    }
}

TEST(Loss, AnalyticAndQuadraturePathsAgree) {
    const auto problem = make_problem(FabricatedSolution::defaults(SolutionTag::SineModal));
    const NetworkSpec spec{1, {5}, Activation::Sine};
    std::mt19937_64 rng(2);
    for (auto form : {LossForm::V1, LossForm::V2, LossForm::V3, LossForm::Projection}) {
        auto a = small_loss(form, TestFamily::Sine, 5, true);
        auto q = a;
        a.Q = q.Q = 200;
        q.analytic = false;
        const LossEvaluator la(problem, spec, a), lq(problem, spec, q);
        EXPECT_TRUE(la.uses_analytic_path());
        EXPECT_FALSE(lq.uses_analytic_path());
        for (int t = 0; t < 5; ++t) {
            const auto net = initialize_network(spec, {}, rng());
            EXPECT_NEAR(la.value(net), lq.value(net), 1e-9 * std::max(1.0, lq.value(net))) << to_string(form);
        }
    }
}

TEST(Loss, ZeroAndExactSolutions) {
    const auto zero = make_custom_problem_1d(Operator::Poisson1D, [](double) { return 0.0; }, {0.0, 0.0});
    const NetworkSpec spec{1, {4}, Activation::Tanh};
    for (auto form : {LossForm::Strong, LossForm::V1, LossForm::V2, LossForm::V3}) {
        EXPECT_EQ(loss_value(spec.zeros(), zero, spec, small_loss(form, TestFamily::LegendreComposite, 4, false)), 0.0);
    }
    const auto sm = make_problem(FabricatedSolution::defaults(SolutionTag::SineModal));
    auto exact = DeepNetParams::zeros(1, {1}, Activation::Sine);
    exact.weights[0](0, 0) = 2.1 * M_PI;
    exact.output[0] = 1.0;
    const NetworkSpec one{1, {1}, Activation::Sine};
    for (auto form : {LossForm::Strong, LossForm::V1, LossForm::V2, LossForm::V3, LossForm::Projection}) {
        for (bool analytic : {false, true}) {
            if (form == LossForm::Strong && analytic) continue;
            auto c = small_loss(form, TestFamily::Sine, 5, analytic);
            c.Q = 200;
            EXPECT_LT(loss_value(exact, sm, one, c), 1e-20) << to_string(form);
        }
    }
}

TEST(Loss, BoundaryWeights) {
    // zero net on sine-modal: every residual vanishes except the boundary mismatch
    const auto problem = make_problem(FabricatedSolution::defaults(SolutionTag::SineModal));
    const NetworkSpec spec{1, {2}, Activation::Sine};
    const double b2 = std::pow(std::sin(2.1 * M_PI), 2);
    const LossEvaluator v1(problem, spec, small_loss(LossForm::V2, TestFamily::Sine, 3, true, 4.0));
    const auto rv = v1.residuals(spec.zeros());
    const double interior = (rv.R - rv.F).squaredNorm() / 3.0;
    EXPECT_NEAR(v1.value(spec.zeros()) - interior, 4.0 / 2.0 * 2.0 * b2, 1e-12);
    const LossEvaluator proj(problem, spec, small_loss(LossForm::Projection, TestFamily::Sine, 3, true, 4.0));
    const auto rp = proj.residuals(spec.zeros());
    EXPECT_NEAR(proj.value(spec.zeros()) - (rp.R - rp.F).squaredNorm() / 3.0, 4.0 * 2.0 * b2, 1e-12);
}

TEST(Loss, ConfigurationChecks) {
    auto c = small_loss(LossForm::V1, TestFamily::Sine, 5, false);
    c.tau = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = small_loss(LossForm::V1, TestFamily::Sine, 0, false);
    EXPECT_THROW(c.validate(), ConfigError);

    const auto sm = make_problem(FabricatedSolution::defaults(SolutionTag::SineModal));
    // analytic residuals need a shallow sine network
    EXPECT_THROW(LossEvaluator(sm, NetworkSpec{1, {4}, Activation::Tanh}, small_loss(LossForm::V1, TestFamily::Sine, 5, true)),
                 ConfigError);
    EXPECT_THROW(LossEvaluator(sm, NetworkSpec{1, {4, 4}, Activation::Sine}, small_loss(LossForm::V1, TestFamily::Sine, 5, true)),
                 ConfigError);
    EXPECT_THROW(LossEvaluator(sm, NetworkSpec{2, {4}, Activation::Sine}, small_loss(LossForm::V1, TestFamily::Sine, 5, false)),
                 ConfigError);
    EXPECT_THROW(NetworkSpec({1, {}, Activation::Sine}).validate(), ConfigError);
    EXPECT_THROW(InitPolicy({InitScheme::XavierWidened, 0.5}).validate(), ConfigError);
    for (auto f : {LossForm::Strong, LossForm::V1, LossForm::V2, LossForm::V3, LossForm::Projection}) {
        EXPECT_EQ(loss_form_from_string(to_string(f)), f);
    }
    EXPECT_EQ(loss_form_from_string("pinn"), LossForm::Strong);
}

TEST(Init, XavierStatistics) {
    const NetworkSpec spec{1, {4000, 50}, Activation::Tanh};
    const auto std_net = initialize_network(spec, {InitScheme::XavierStandard, 10.0}, 1);
    const auto wide = initialize_network(spec, {InitScheme::XavierWidened, 10.0}, 1);
    const auto sd = [](const Eigen::MatrixXd& m) {
        const double mean = m.mean();
        return std::sqrt((m.array() - mean).square().sum() / (m.size() - 1));
    };
    EXPECT_NEAR(sd(std_net.weights[0]), 1.0, 0.05);
    EXPECT_NEAR(sd(std_net.weights[1]), 1.0 / std::sqrt(4000.0), 0.05 / std::sqrt(4000.0));
    EXPECT_NEAR(sd(wide.weights[0]), 10.0, 0.5);
    EXPECT_EQ(wide.weights[1], std_net.weights[1]);  // only the first layer is widened
    EXPECT_EQ(std_net.biases[0].cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(initialize_network(spec, {}, 7).flatten(), initialize_network(spec, {}, 7).flatten());
    EXPECT_NE(initialize_network(spec, {}, 7).flatten(), initialize_network(spec, {}, 8).flatten());
}

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments) {
    Eigen::VectorXd p(3);
    p << 1.0, -2.0, 0.5;
    const Eigen::VectorXd p0 = p;
    AdamState st;
    adam_step(p, Eigen::VectorXd::Constant(3, 1.0), st, 1e-3);
    const Eigen::VectorXd m1 = st.m;
    const Eigen::VectorXd after_one = p;
    adam_step(p, Eigen::VectorXd::Zero(3), st, 1e-3);
    EXPECT_LT((st.m - 0.9 * m1).norm(), 1e-16);
    // the bias-corrected first moment is still nonzero, so the step continues
    EXPECT_NE(p, after_one);
    EXPECT_NE(p0, after_one);

    Eigen::VectorXd q = Eigen::VectorXd::Ones(2);
    AdamState fresh;
    adam_step(q, Eigen::VectorXd::Zero(2), fresh, 1e-3);
    EXPECT_EQ(q, Eigen::VectorXd::Ones(2));
}

TEST(Adam, FirstStepAndConstantGradientMoveByLearningRate) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd g(2);
    g << 250.0, -1e-3;
    AdamState st;
    adam_step(p, g, st, 1e-2);
    // m_hat / sqrt(v_hat) = sign(g) * |g| / (|g| + eps)
    EXPECT_NEAR(p[0], -1e-2, 1e-12);
    EXPECT_NEAR(p[1], 1e-2 * 1e-3 / (1e-3 + 1e-8), 1e-12);
    for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd before = p;
        adam_step(p, g, st, 1e-2);
        EXPECT_NEAR(p[0] - before[0], -1e-2, 1e-6);
    }
}

TEST(Adam, QuadraticBowlConverges) {
    Eigen::VectorXd p(4);
    p << 1.0, -0.5, 2.0, 0.1;
    AdamState st;
    for (int i = 0; i < 5000; ++i) adam_step(p, 2.0 * p, st, 1e-2);
    EXPECT_LE(p.norm(), 1e-6);
}

TEST(Adam, RejectsNonFiniteGradient) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(3);
    g[2] = std::nan("");
    AdamState st;
    EXPECT_THROW(adam_step(p, g, st, 1e-3), NonFiniteError);
}

TEST(Train, ZeroProblemConvergesToZero) {
    const auto zero = make_custom_problem_1d(Operator::Poisson1D, [](double) { return 0.0; }, {0.0, 0.0});
    const NetworkSpec spec{1, {10}, Activation::Tanh};
    TrainOptions opt;
    opt.max_iters = 4000;
    opt.compute_metrics = false;
    for (auto form : {LossForm::V2, LossForm::Strong}) {
        auto c = small_loss(form, TestFamily::LegendreComposite, 8, false, 10.0);
        c.penalizing_points = 100;
        const auto rec = train(zero, spec, c, {InitScheme::XavierStandard, 1.0}, 3, opt);
        EXPECT_FALSE(rec.diverged);
        EXPECT_FALSE(rec.metrics.has_value());
        EXPECT_LE(grid_max_abs(rec.final_params), 1e-3) << to_string(form);
    }
}

TEST(Train, DeterministicHistoriesAndFloor) {
    const auto problem = make_problem(FabricatedSolution::defaults(SolutionTag::SineModal));
    const NetworkSpec spec{1, {5}, Activation::Sine};
    TrainOptions opt;
    opt.max_iters = 3000;
    opt.record_interval = 250;
    const auto c = small_loss(LossForm::V1, TestFamily::Sine, 5, true, 5.0);
    const auto a = train(problem, spec, c, {}, 6, opt);
    const auto b = train(problem, spec, c, {}, 6, opt);
    EXPECT_EQ(a.loss_history, b.loss_history);
    EXPECT_EQ(a.final_params.flatten(), b.final_params.flatten());
    ASSERT_FALSE(a.loss_history.empty());
    EXPECT_EQ(a.loss_history.front().first, 0);
    EXPECT_EQ(a.loss_history.back().first, a.iterations);
    for (const auto& [it, l] : a.loss_history) EXPECT_TRUE(std::isfinite(l)) << it;
    ASSERT_TRUE(a.metrics.has_value());
    EXPECT_EQ(a.boundary_error,
              std::max(std::abs(a.metrics->approx.front() - a.metrics->exact.front()),
                       std::abs(a.metrics->approx.back() - a.metrics->exact.back())));

    // a floor above the starting loss stops before the first update
    opt.loss_floor = 1e12;
    const auto stop = train(problem, spec, c, {}, 6, opt);
    EXPECT_EQ(stop.iterations, 0);
    EXPECT_EQ(stop.final_params.flatten(), initialize_network(spec, {}, 6).flatten());
}

TEST(Train, DivergenceIsRecordedNotThrown) {
    const auto problem = make_problem(FabricatedSolution::defaults(SolutionTag::SineModal));
    const NetworkSpec spec{1, {5}, Activation::Sine};
    TrainOptions opt;
    opt.max_iters = 100;
    opt.divergence_ceiling = 1e-6;
    const auto rec = train(problem, spec, small_loss(LossForm::V1, TestFamily::Sine, 5, true), {}, 1, opt);
    EXPECT_TRUE(rec.diverged);
    EXPECT_FALSE(rec.diverged_reason.empty());
    EXPECT_THROW(multi_seed_error(problem, spec, small_loss(LossForm::V1, TestFamily::Sine, 5, true), {}, {1, 2}, opt),
                 AllSeedsDiverged);
}

TEST(MultiSeed, AveragingInvariants) {
    const auto problem = make_problem(FabricatedSolution::defaults(SolutionTag::SineModal));
    const NetworkSpec spec{1, {5}, Activation::Sine};
    TrainOptions opt;
    opt.max_iters = 1500;
    opt.metric_grid = 101;
    const auto c = small_loss(LossForm::V2, TestFamily::Sine, 5, true);
    const auto single = multi_seed_error(problem, spec, c, {}, {4}, opt);
    ASSERT_EQ(single.records.size(), 1u);
    EXPECT_EQ(single.mean_abs_error, single.records[0].metrics->abs_error);

    const auto fwd = multi_seed_error(problem, spec, c, {}, {1, 2, 3}, opt, 1);
    const auto rev = multi_seed_error(problem, spec, c, {}, {3, 2, 1}, opt, 3);
    ASSERT_EQ(fwd.mean_abs_error.size(), 101u);
    for (std::size_t i = 0; i < fwd.mean_abs_error.size(); ++i) {
        EXPECT_NEAR(fwd.mean_abs_error[i], rev.mean_abs_error[i], 1e-15);
    }
    EXPECT_EQ(fwd.linf[0], rev.linf[2]);
    const auto best = fwd.best_index();
    EXPECT_EQ(fwd.linf[best], *std::min_element(fwd.linf.begin(), fwd.linf.end()));
}

TEST(MultiSeed, MetricsNeedAnExactSolution) {
    const auto custom = make_custom_problem_1d(Operator::Poisson1D, [](double) { return 1.0; }, {0.0, 0.0});
    TrainOptions opt;
    opt.max_iters = 5;
    EXPECT_THROW(multi_seed_error(custom, NetworkSpec{1, {3}, Activation::Tanh},
                                  small_loss(LossForm::V2, TestFamily::LegendreComposite, 3, false), {}, {1}, opt),
                 MetricUnavailable);
}
