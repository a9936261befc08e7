#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vpinn/assembly.hpp"
#include "vpinn/basis.hpp"
#include "vpinn/closedform.hpp"
#include "vpinn/diffprop.hpp"
#include "vpinn/problems.hpp"
#include "vpinn/quadrature.hpp"

namespace vpinn {

enum class LossForm { Strong, V1, V2, V3, Projection };

std::string_view to_string(LossForm form);
LossForm loss_form_from_string(std::string_view name);

struct LossConfig {
    LossForm form = LossForm::V1;
    double tau = 5.0;

    // variational forms
    TestFamily basis = TestFamily::Sine;
    int K = 5;
    int Ky = 0;  // 2D only; 0 means same as K
    RuleKind rule = RuleKind::GaussLegendre;
    int Q = 200;
    int Qy = 0;  // 2D only; 0 means same as Q
    bool analytic = false;

    // strong form
    int penalizing_points = 1000;

    // 2D boundary training points per edge
    int boundary_per_edge = 80;

    int test_count_y() const { return Ky > 0 ? Ky : K; }
    int order_y() const { return Qy > 0 ? Qy : Q; }

    /// Field-level checks that do not depend on the problem.
    void validate() const;

    bool operator==(const LossConfig&) const = default;
};

struct NetworkSpec {
    int input_dim = 1;
    std::vector<int> widths{5};
    Activation activation = Activation::Sine;

    void validate() const;
    DeepNetParams zeros() const;
    bool is_shallow_sine() const;

    bool operator==(const NetworkSpec&) const = default;
};

enum class InitScheme { XavierStandard, XavierWidened };

std::string_view to_string(InitScheme scheme);
InitScheme init_scheme_from_string(std::string_view name);

/// Weights ~ N(0, 1/fan_in), biases 0. The widened scheme scales the standard
/// deviation of the first-layer weights (the input frequencies) by rho.
struct InitPolicy {
    InitScheme scheme = InitScheme::XavierWidened;
    double rho = 10.0;

    void validate() const;

    bool operator==(const InitPolicy&) const = default;
};

DeepNetParams initialize_network(const NetworkSpec& spec, const InitPolicy& policy,
                                 std::uint64_t seed);

/// Loss of a network for one problem and loss configuration, with its exact gradient.
///
///   variational: (1/K) sum_k (R_k - F_k)^2 + tau/N_u sum_b r_b^2
///   strong:      (1/N_r) sum_i r(x_i)^2   + tau/N_u sum_b r_b^2
///
/// In 1D the boundary points are {-1, 1}, so the penalty is tau/2 (r_-^2 + r_+^2);
/// the 1D projection loss uses tau (r_-^2 + r_+^2).
/// Test tables, quadrature and forcing are prepared once at construction.
class LossEvaluator {
public:
    /// point_seed fixes the strong-form penalizing points.
    LossEvaluator(const ProblemSpec& problem, const NetworkSpec& network, const LossConfig& config,
                  std::uint64_t point_seed = 0);

    double value(const DeepNetParams& net) const;
    ValueAndGradient value_and_gradient(const DeepNetParams& net) const;

    /// Parts of the loss at net: residual vector (R and F, or strong residuals) and
    /// the boundary mismatch.
    ResidualVector residuals(const DeepNetParams& net) const;

    bool uses_analytic_path() const { return analytic_; }
    const Eigen::MatrixXd& boundary_points() const { return boundary_points_; }
    const Eigen::MatrixXd& penalizing_points() const { return interior_; }

private:
    double analytic_residual(const ShallowNetParams& s, int k, double seed,
                             ShallowNetParams* grad) const;
    ValueAndGradient analytic(const DeepNetParams& net, bool with_gradient) const;
    ValueAndGradient quadrature(const DeepNetParams& net, bool with_gradient) const;
    ValueAndGradient strong(const DeepNetParams& net, bool with_gradient) const;
    double boundary_penalty(const DeepNetParams& net, Eigen::VectorXd* gradient) const;

    ProblemSpec problem_;
    LossConfig config_;
    bool analytic_ = false;

    Eigen::MatrixXd boundary_points_;
    Eigen::VectorXd boundary_data_;

    std::shared_ptr<const VariationalAssembler> assembler_;  // deep variational path
    Eigen::VectorXd target_;                                 // analytic path F or U
    Eigen::MatrixXd interior_;                               // strong path
    Eigen::VectorXd interior_forcing_;
};

/// One-shot helpers.
double loss_value(const DeepNetParams& net, const ProblemSpec& problem, const NetworkSpec& network,
                  const LossConfig& config);

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// One bias-corrected Adam update in place. Throws NonFiniteError on a bad gradient.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient, AdamState& state,
               double lr);

struct TrainOptions {
    long max_iters = 50000;
    long record_interval = 100;
    double learning_rate = 1e-3;
    double loss_floor = 1e-14;
    double divergence_ceiling = 1e8;
    bool compute_metrics = true;
    int metric_grid = 0;  // 0 = problem default

    bool operator==(const TrainOptions&) const = default;
};

struct TrainingRecord {
    std::uint64_t seed = 0;
    long iterations = 0;
    std::vector<std::pair<long, double>> loss_history;
    DeepNetParams final_params;
    double final_loss = 0.0;
    double wall_seconds = 0.0;
    bool diverged = false;
    std::string diverged_reason;
    std::optional<ErrorMetrics> metrics;
    double boundary_error = 0.0;  // max |u_NN - u_b| over the boundary training points
};

/// Adam from a seeded initialization. Deterministic in the seed. Stops at max_iters or
/// when the loss falls below the floor. A loss above the ceiling, a non-finite value or
/// a singular closed form ends the run with diverged = true instead of throwing.
TrainingRecord train(const ProblemSpec& problem, const NetworkSpec& network,
                     const LossConfig& config, const InitPolicy& init, std::uint64_t seed,
                     const TrainOptions& options);

struct MultiSeedResult {
    std::vector<TrainingRecord> records;  // in seed order
    std::vector<double> x, y;             // metric grid
    std::vector<double> mean_abs_error;   // over converged seeds
    std::vector<double> linf;             // per seed (NaN for diverged)
    std::vector<double> l2;

    /// Index of the non-diverged seed with the smallest L-infinity error.
    std::size_t best_index() const;
};

/// Trains every seed (workers threads at a time) and averages the pointwise error
/// arrays of the runs that did not diverge. Throws AllSeedsDiverged if none survive.
MultiSeedResult multi_seed_error(const ProblemSpec& problem, const NetworkSpec& network,
                                 const LossConfig& config, const InitPolicy& init,
                                 const std::vector<std::uint64_t>& seeds,
                                 const TrainOptions& options, int workers = 1);

}  // namespace vpinn
