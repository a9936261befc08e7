#include "vpinn/training.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "vpinn/errors.hpp"

namespace vpinn {

std::string_view to_string(LossForm form) {
    switch (form) {
        case LossForm::Strong: return "strong";
        case LossForm::V1: return "v1";
        case LossForm::V2: return "v2";
        case LossForm::V3: return "v3";
        case LossForm::Projection: return "projection";
    }
    return "unknown";
}

LossForm loss_form_from_string(std::string_view name) {
    if (name == "strong" || name == "pinn") return LossForm::Strong;
    if (name == "v1") return LossForm::V1;
    if (name == "v2") return LossForm::V2;
    if (name == "v3") return LossForm::V3;
    if (name == "projection") return LossForm::Projection;
    throw ConfigError(fmt::format("unknown loss form '{}' (strong|v1|v2|v3|projection)", name));
}

std::string_view to_string(InitScheme scheme) {
    return scheme == InitScheme::XavierStandard ? "xavier" : "xavier-widened";
}

InitScheme init_scheme_from_string(std::string_view name) {
    if (name == "xavier") return InitScheme::XavierStandard;
    if (name == "xavier-widened") return InitScheme::XavierWidened;
    throw ConfigError(fmt::format("unknown init scheme '{}' (xavier|xavier-widened)", name));
}

void LossConfig::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be a positive number");
    if (K < 1 || K > kMaxTestIndex) {
        throw ConfigError(fmt::format("K must be in [1, {}], got {}", kMaxTestIndex, K));
    }
    if (Ky < 0 || Ky > kMaxTestIndex) {
        throw ConfigError(fmt::format("Ky must be in [0, {}], got {}", kMaxTestIndex, Ky));
    }
    if (Q < 2 || Q > 512) throw ConfigError(fmt::format("Q must be in [2, 512], got {}", Q));
    if (Qy != 0 && (Qy < 2 || Qy > 512)) {
        throw ConfigError(fmt::format("Qy must be 0 or in [2, 512], got {}", Qy));
    }
    if (penalizing_points < 1) throw ConfigError("penalizing_points must be at least 1");
    if (boundary_per_edge < 2) throw ConfigError("boundary_per_edge must be at least 2");
}

void NetworkSpec::validate() const {
    if (input_dim != 1 && input_dim != 2) throw ConfigError("input_dim must be 1 or 2");
    if (widths.empty()) throw ConfigError("network needs at least one hidden layer");
    for (int w : widths) {
        if (w < 1) throw ConfigError(fmt::format("layer width must be positive, got {}", w));
    }
}

DeepNetParams NetworkSpec::zeros() const {
    validate();
    return DeepNetParams::zeros(input_dim, widths, activation);
}

bool NetworkSpec::is_shallow_sine() const {
    return input_dim == 1 && widths.size() == 1 && activation == Activation::Sine;
}

void InitPolicy::validate() const {
    if (!(rho >= 1.0) || !std::isfinite(rho)) throw ConfigError("widening factor rho must be >= 1");
}

DeepNetParams initialize_network(const NetworkSpec& spec, const InitPolicy& policy,
                                 std::uint64_t seed) {
    policy.validate();
    DeepNetParams net = spec.zeros();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int l = 0; l < net.depth(); ++l) {
        auto& W = net.weights[l];
        double sd = 1.0 / std::sqrt(static_cast<double>(W.cols()));
        if (l == 0 && policy.scheme == InitScheme::XavierWidened) sd *= policy.rho;
        for (Eigen::Index i = 0; i < W.rows(); ++i)
            for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = sd * normal(rng);
    }
    const double sd = 1.0 / std::sqrt(static_cast<double>(net.output.size()));
    for (Eigen::Index i = 0; i < net.output.size(); ++i) net.output[i] = sd * normal(rng);
    return net;
}

namespace {

VariationalForm to_variational(LossForm form) {
    switch (form) {
        case LossForm::V1: return VariationalForm::V1;
        case LossForm::V2: return VariationalForm::V2;
        case LossForm::V3: return VariationalForm::V3;
        case LossForm::Projection: return VariationalForm::Projection;
        case LossForm::Strong: break;
    }
    throw InternalError("strong form has no variational counterpart");
}

}  // namespace

LossEvaluator::LossEvaluator(const ProblemSpec& problem, const NetworkSpec& network,
                             const LossConfig& config, std::uint64_t point_seed)
    : problem_(problem), config_(config) {
    config_.validate();
    network.validate();
    if (network.input_dim != problem.dim()) {
        throw ConfigError(fmt::format("network input_dim {} does not match the {}D problem",
                                      network.input_dim, problem.dim()));
    }
    const bool burgers = problem.op == Operator::Burgers1D;

    boundary_points_ = problem_boundary_points(problem, config_.boundary_per_edge);
    boundary_data_.resize(boundary_points_.cols());
    for (Eigen::Index i = 0; i < boundary_points_.cols(); ++i) {
        const double y = problem.dim() == 2 ? boundary_points_(1, i) : 0.0;
        boundary_data_[i] = problem.boundary_value(boundary_points_(0, i), y);
    }

    if (config_.form == LossForm::Strong) {
        if (config_.analytic) throw ConfigError("analytic residuals exist only for variational forms");
        interior_ = random_interior_points(problem.dim(), config_.penalizing_points, point_seed);
        interior_forcing_.resize(interior_.cols());
        for (Eigen::Index i = 0; i < interior_.cols(); ++i) {
            interior_forcing_[i] =
                problem.forcing(interior_(0, i), problem.dim() == 2 ? interior_(1, i) : 0.0);
        }
        return;
    }

    const VariationalForm vform = to_variational(config_.form);
    if (config_.analytic) {
        if (!network.is_shallow_sine() || problem.dim() != 1) {
            throw ConfigError("analytic residuals need a 1D shallow sine network");
        }
        if (config_.basis == TestFamily::LegendreComposite) {
            if (burgers) throw ConfigError("no closed-form Burgers residual for Legendre tests");
            if (config_.form == LossForm::V3) {
                throw ConfigError("no closed-form v3 residual for Legendre tests");
            }
        }
        analytic_ = true;
        const TestBasis basis{config_.basis, config_.K};
        basis.validate();
        const QuadratureRule rule = gauss_rule(config_.rule, config_.Q);
        if (vform == VariationalForm::Projection) {
            if (!problem.has_exact()) throw ConfigError("projection form needs an exact solution");
            const TestTable t = tabulate(basis, rule.nodes);
            Eigen::VectorXd wu(static_cast<Eigen::Index>(rule.nodes.size()));
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                wu[static_cast<Eigen::Index>(q)] = rule.weights[q] * problem.exact(rule.nodes[q], 0.0);
            }
            target_ = t.v * wu;
        } else if (auto F = analytic_force(problem, basis)) {
            target_ = *F;
        } else {
            target_ = assemble_force(problem, basis, rule);
        }
        return;
    }

    if (problem.dim() == 1) {
        assembler_ = std::make_shared<VariationalAssembler>(
            problem, TestBasis{config_.basis, config_.K}, gauss_rule(config_.rule, config_.Q), vform);
    } else {
        const TestBasis2D basis{{config_.basis, config_.K}, {config_.basis, config_.test_count_y()}};
        const TensorRule rule{gauss_rule(config_.rule, config_.Q),
                              gauss_rule(config_.rule, config_.order_y())};
        assembler_ = std::make_shared<VariationalAssembler>(problem, basis, rule, vform);
    }
    target_ = assembler_->target();
}

double LossEvaluator::boundary_penalty(const DeepNetParams& net, Eigen::VectorXd* gradient) const {
    // the 1D projection loss weights each end by tau instead of tau/2
    const bool full_weight = config_.form == LossForm::Projection && problem_.dim() == 1;
    const double scale =
        full_weight ? config_.tau : config_.tau / static_cast<double>(boundary_points_.cols());
    if (!gradient) {
        const Eigen::RowVectorXd u = eval_batch(net, boundary_points_, JetOrder::Value).u;
        return scale * (u.transpose() - boundary_data_).squaredNorm();
    }
    const JetTape tape(net, boundary_points_, JetOrder::Value);
    const Eigen::VectorXd r = tape.jets().u.transpose() - boundary_data_;
    JetBatch adj = JetBatch::zeros_like(tape.jets());
    adj.u = 2.0 * scale * r.transpose();
    *gradient += tape.backward(adj);
    return scale * r.squaredNorm();
}

double LossEvaluator::analytic_residual(const ShallowNetParams& s, int k, double seed,
                                        ShallowNetParams* grad) const {
    const bool burgers = problem_.op == Operator::Burgers1D;
    double R = 0.0;
    if (config_.basis == TestFamily::Sine) {
        switch (config_.form) {
            case LossForm::V1:
            case LossForm::V2:
                R = grad ? residual_sine_r12(s, k, seed, *grad) : residual_sine_r12(s, k);
                break;
            case LossForm::V3:
                R = grad ? residual_sine_r3(s, k, problem_.bc, seed, *grad)
                         : residual_sine_r3(s, k, problem_.bc);
                break;
            default:
                R = grad ? residual_projection(s, k, seed, *grad) : residual_projection(s, k);
                break;
        }
        if (burgers && config_.form != LossForm::Projection) {
            R += grad ? residual_burgers_nl(s, k, seed, *grad) : residual_burgers_nl(s, k);
        }
        return R;
    }
    switch (config_.form) {
        case LossForm::V1:
            return grad ? residual_legendre_r1(s, k, seed, *grad) : residual_legendre_r1(s, k);
        case LossForm::V2:
            return grad ? residual_legendre_r2(s, k, seed, *grad) : residual_legendre_r2(s, k);
        default:
            return grad ? residual_legendre_projection(s, k, seed, *grad)
                        : residual_legendre_projection(s, k);
    }
}

ValueAndGradient LossEvaluator::analytic(const DeepNetParams& net, bool with_gradient) const {
    const ShallowNetParams s = ShallowNetParams::from_deep(net);
    const int K = config_.K;
    Eigen::VectorXd d(K);
    for (int k = 1; k <= K; ++k) d[k - 1] = analytic_residual(s, k, 0.0, nullptr) - target_[k - 1];

    ValueAndGradient out;
    out.value = d.squaredNorm() / K;
    if (with_gradient) {
        // residuals are cheap next to their gradients, so evaluate twice rather than branch
        ShallowNetParams g = ShallowNetParams::zeros(s.size());
        for (int k = 1; k <= K; ++k) analytic_residual(s, k, 2.0 * d[k - 1] / K, &g);
        out.gradient = g.flatten();
    }
    return out;
}

ValueAndGradient LossEvaluator::quadrature(const DeepNetParams& net, bool with_gradient) const {
    const double K = static_cast<double>(target_.size());
    ValueAndGradient out;
    if (!with_gradient) {
        const JetBatch jets = eval_batch(net, assembler_->points(), assembler_->required_order());
        out.value = (assembler_->residual(jets) - target_).squaredNorm() / K;
        return out;
    }
    const JetTape tape(net, assembler_->points(), assembler_->required_order());
    const Eigen::VectorXd d = assembler_->residual(tape.jets()) - target_;
    JetBatch adj = JetBatch::zeros_like(tape.jets());
    assembler_->accumulate_adjoint(tape.jets(), (2.0 / K) * d, adj);
    out.value = d.squaredNorm() / K;
    out.gradient = tape.backward(adj);
    return out;
}

namespace {

Eigen::VectorXd strong_interior(Operator op, const JetBatch& jets, const Eigen::VectorXd& f) {
    switch (op) {
        case Operator::Poisson1D: return -jets.diag2.row(0).transpose() - f;
        case Operator::Burgers1D:
            return (jets.u.array() * jets.grad.row(0).array() - jets.diag2.row(0).array())
                       .matrix()
                       .transpose() -
                   f;
        case Operator::Poisson2D:
            return (jets.diag2.row(0) + jets.diag2.row(1)).transpose() - f;
    }
    throw InternalError("unhandled operator");
}

}  // namespace

ValueAndGradient LossEvaluator::strong(const DeepNetParams& net, bool with_gradient) const {
    const double Nr = static_cast<double>(interior_.cols());
    ValueAndGradient out;
    if (!with_gradient) {
        const JetBatch jets = eval_batch(net, interior_, JetOrder::Second);
        out.value = strong_interior(problem_.op, jets, interior_forcing_).squaredNorm() / Nr;
        return out;
    }
    const JetTape tape(net, interior_, JetOrder::Second);
    const JetBatch& jets = tape.jets();
    const Eigen::VectorXd r = strong_interior(problem_.op, jets, interior_forcing_);
    const Eigen::RowVectorXd rb = (2.0 / Nr) * r.transpose();
    JetBatch adj = JetBatch::zeros_like(jets);
    switch (problem_.op) {
        case Operator::Poisson1D: adj.diag2.row(0) = -rb; break;
        case Operator::Burgers1D:
            adj.u = rb.array() * jets.grad.row(0).array();
            adj.grad.row(0) = rb.array() * jets.u.array();
            adj.diag2.row(0) = -rb;
            break;
        case Operator::Poisson2D:
            adj.diag2.row(0) = rb;
            adj.diag2.row(1) = rb;
            break;
    }
    out.value = r.squaredNorm() / Nr;
    out.gradient = tape.backward(adj);
    return out;
}

double LossEvaluator::value(const DeepNetParams& net) const {
    double interior = 0.0;
    if (config_.form == LossForm::Strong) interior = strong(net, false).value;
    else if (analytic_) interior = analytic(net, false).value;
    else interior = quadrature(net, false).value;
    return interior + boundary_penalty(net, nullptr);
}

ValueAndGradient LossEvaluator::value_and_gradient(const DeepNetParams& net) const {
    ValueAndGradient out;
    if (config_.form == LossForm::Strong) out = strong(net, true);
    else if (analytic_) out = analytic(net, true);
    else out = quadrature(net, true);
    out.value += boundary_penalty(net, &out.gradient);
    require_finite(out.gradient, "loss gradient");
    return out;
}

ResidualVector LossEvaluator::residuals(const DeepNetParams& net) const {
    ResidualVector out;
    if (config_.form == LossForm::Strong) {
        out.R = strong_interior(problem_.op, eval_batch(net, interior_, JetOrder::Second),
                                interior_forcing_);
        out.F = Eigen::VectorXd::Zero(out.R.size());
    } else if (analytic_) {
        const ShallowNetParams s = ShallowNetParams::from_deep(net);
        out.R.resize(config_.K);
        for (int k = 1; k <= config_.K; ++k) out.R[k - 1] = analytic_residual(s, k, 0.0, nullptr);
        out.F = target_;
    } else {
        out.R = assembler_->residual(eval_batch(net, assembler_->points(), assembler_->required_order()));
        out.F = target_;
    }
    out.boundary = eval_batch(net, boundary_points_, JetOrder::Value).u.transpose() - boundary_data_;
    return out;
}

double loss_value(const DeepNetParams& net, const ProblemSpec& problem, const NetworkSpec& network,
                  const LossConfig& config) {
    return LossEvaluator(problem, network, config).value(net);
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient, AdamState& state,
               double lr) {
    if (gradient.size() != params.size()) throw ConfigError("gradient and parameter sizes differ");
    require_finite(gradient, "adam gradient");
    if (state.m.size() != params.size()) {
        state.m = Eigen::VectorXd::Zero(params.size());
        state.v = Eigen::VectorXd::Zero(params.size());
        state.step = 0;
    }
    ++state.step;
    state.m = kAdamBeta1 * state.m + (1.0 - kAdamBeta1) * gradient;
    state.v = kAdamBeta2 * state.v + (1.0 - kAdamBeta2) * gradient.cwiseAbs2();
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
    params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + kAdamEpsilon);
}

TrainingRecord train(const ProblemSpec& problem, const NetworkSpec& network,
                     const LossConfig& config, const InitPolicy& init, std::uint64_t seed,
                     const TrainOptions& options) {
    if (options.max_iters < 0) throw ConfigError("max_iters must be non-negative");
    if (options.record_interval < 1) throw ConfigError("record_interval must be at least 1");
    if (!(options.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");

    const auto start = std::chrono::steady_clock::now();
    TrainingRecord rec;
    rec.seed = seed;
    DeepNetParams net = initialize_network(network, init, seed);
    // penalizing points get their own stream so they do not shift with the network size
    const LossEvaluator loss(problem, network, config, seed ^ 0x9e3779b97f4a7c15ULL);

    Eigen::VectorXd p = net.flatten();
    AdamState state;
    long it = 0;
    for (;; ++it) {
        net.assign(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
        ValueAndGradient vg;
        try {
            vg = loss.value_and_gradient(net);
        } catch (const SingularFrequency& e) {
            rec.diverged = true;
            rec.diverged_reason = e.what();
        } catch (const NonFiniteError& e) {
            rec.diverged = true;
            rec.diverged_reason = e.what();
        }
        if (!rec.diverged && !(vg.value <= options.divergence_ceiling)) {
            rec.diverged = true;
            rec.diverged_reason = fmt::format("loss {} exceeded the ceiling at iteration {}",
                                              vg.value, it);
        }
        if (rec.diverged) break;

        rec.final_loss = vg.value;
        const bool last = it >= options.max_iters || vg.value < options.loss_floor;
        if (it % options.record_interval == 0 || last) rec.loss_history.emplace_back(it, vg.value);
        if (last) break;
        adam_step(p, vg.gradient, state, options.learning_rate);
    }
    rec.iterations = it;
    rec.final_params = net;

    if (!rec.diverged) {
        const Eigen::RowVectorXd ub = eval_batch(net, loss.boundary_points(), JetOrder::Value).u;
        for (Eigen::Index i = 0; i < ub.size(); ++i) {
            const double y = problem.dim() == 2 ? loss.boundary_points()(1, i) : 0.0;
            rec.boundary_error = std::max(
                rec.boundary_error,
                std::abs(ub[i] - problem.boundary_value(loss.boundary_points()(0, i), y)));
        }
        if (options.compute_metrics && problem.has_exact()) {
            rec.metrics = error_metrics(net, problem, options.metric_grid);
        }
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

std::size_t MultiSeedResult::best_index() const {
    std::size_t best = records.size();
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].diverged || std::isnan(linf[i])) continue;
        if (best == records.size() || linf[i] < linf[best]) best = i;
    }
    if (best == records.size()) throw AllSeedsDiverged("no seed produced error metrics");
    return best;
}

MultiSeedResult multi_seed_error(const ProblemSpec& problem, const NetworkSpec& network,
                                 const LossConfig& config, const InitPolicy& init,
                                 const std::vector<std::uint64_t>& seeds,
                                 const TrainOptions& options, int workers) {
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (!problem.has_exact()) {
        throw MetricUnavailable("averaged errors need a problem with an exact solution");
    }
    TrainOptions opts = options;
    opts.compute_metrics = true;

    MultiSeedResult out;
    out.records.resize(seeds.size());
    std::vector<std::exception_ptr> failures(seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                out.records[i] = train(problem, network, config, init, seeds[i], opts);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(seeds.size(), static_cast<std::size_t>(std::max(1, workers)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    for (const auto& r : out.records) {
        if (r.diverged || !r.metrics) {
            out.linf.push_back(nan);
            out.l2.push_back(nan);
            continue;
        }
        out.linf.push_back(r.metrics->linf);
        out.l2.push_back(r.metrics->l2);
        if (used == 0) {
            out.x = r.metrics->x;
            out.y = r.metrics->y;
            out.mean_abs_error.assign(r.metrics->abs_error.size(), 0.0);
        }
        for (std::size_t i = 0; i < out.mean_abs_error.size(); ++i) {
            out.mean_abs_error[i] += r.metrics->abs_error[i];
        }
        ++used;
    }
    if (used == 0) {
        throw AllSeedsDiverged(fmt::format("all {} seeds diverged", seeds.size()));
    }
    for (double& e : out.mean_abs_error) e /= static_cast<double>(used);
    return out;
}

}  // namespace vpinn
