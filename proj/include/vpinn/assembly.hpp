#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

#include "vpinn/basis.hpp"
#include "vpinn/diffprop.hpp"
#include "vpinn/problems.hpp"
#include "vpinn/quadrature.hpp"

namespace vpinn {

/// Which integration-by-parts variant of (L u, v_k) is assembled.
///   V1: -(u'', v_k)            V2: (u', v_k')
///   V3: -(u, v_k'') + [u_exact v_k'] at the two ends
///   Projection: (u, v_k), matched against (u_exact, v_k) instead of (f, v_k)
/// In 2D (Laplacian), V1 is (lap u, v) and V2 is -(grad u, grad v).
enum class VariationalForm { V1, V2, V3, Projection };

std::string_view to_string(VariationalForm form);

struct ResidualVector {
    Eigen::VectorXd R;         // network side, length K (Kx*Ky in 2D, kx-major)
    Eigen::VectorXd F;         // forcing side (or projection target)
    Eigen::VectorXd boundary;  // u_NN - u_exact at the boundary points
};

struct StrongResidualSet {
    Eigen::VectorXd interior;  // L u_NN - f at the penalizing points
    Eigen::VectorXd boundary;  // u_NN - boundary data at the boundary points
};

/// 4 * per_edge points along the edges of [-1,1]^2 (equispaced, corners included).
Eigen::MatrixXd square_boundary_points(int per_edge);

/// Boundary training points of a problem: {-1, 1} in 1D, the square edges in 2D.
Eigen::MatrixXd problem_boundary_points(const ProblemSpec& problem, int per_edge = 80);

/// F_k = sum_q W_q f(x_q) v_k(x_q).
Eigen::VectorXd assemble_force(const ProblemSpec& problem, const TestBasis& basis,
                               const QuadratureRule& rule);
Eigen::VectorXd assemble_force_2d(const ProblemSpec& problem, const TestBasis2D& basis,
                                  const TensorRule& rule);

/// Exact F_k when the forcing is a combination of sines and the tests are sin(k pi x):
/// available for the sine-modal solution. Empty otherwise.
std::optional<Eigen::VectorXd> analytic_force(const ProblemSpec& problem, const TestBasis& basis);

/// Precomputed test tables and forcing for one (problem, basis, rule, form). Turns
/// network jets at the quadrature points into residuals, and residual adjoints back
/// into jet adjoints.
class VariationalAssembler {
public:
    VariationalAssembler(const ProblemSpec& problem, const TestBasis& basis,
                         const QuadratureRule& rule, VariationalForm form);
    VariationalAssembler(const ProblemSpec& problem, const TestBasis2D& basis,
                         const TensorRule& rule, VariationalForm form);

    int dim() const { return dim_; }
    Eigen::Index test_count() const { return target_.size(); }
    VariationalForm form() const { return form_; }
    JetOrder required_order() const { return order_; }

    /// d x P quadrature points the network is evaluated at.
    const Eigen::MatrixXd& points() const { return points_; }

    /// F (or the projection target U).
    const Eigen::VectorXd& target() const { return target_; }

    /// Network side R of the residual for jets evaluated at points().
    Eigen::VectorXd residual(const JetBatch& jets) const;

    /// adj += d(sum_k rbar_k R_k)/d(jets).
    void accumulate_adjoint(const JetBatch& jets, const Eigen::VectorXd& rbar, JetBatch& adj) const;

private:
    void init_target(const ProblemSpec& problem);

    int dim_ = 1;
    VariationalForm form_;
    Operator op_;
    JetOrder order_ = JetOrder::First;
    Eigen::MatrixXd points_;
    Eigen::VectorXd target_;
    Eigen::VectorXd boundary_term_;  // constant part of V3

    // 1D
    Eigen::RowVectorXd w_;
    TestTable tests_;
    // 2D: weights as Qx x Qy, tables per direction
    Eigen::MatrixXd w2_;
    TestTable tx_, ty_;
};

/// One-shot assembly of the variational residual pieces.
ResidualVector assemble_variational(const DeepNetParams& net, const TestBasis& basis,
                                    const QuadratureRule& rule, VariationalForm form,
                                    const ProblemSpec& problem);
ResidualVector assemble_variational_2d(const DeepNetParams& net, const TestBasis2D& basis,
                                       const TensorRule& rule, VariationalForm form,
                                       const ProblemSpec& problem, int boundary_per_edge = 80);

/// Strong-form residuals at penalizing points (d x N_r) and boundary points (d x N_u).
StrongResidualSet assemble_strong(const DeepNetParams& net, const ProblemSpec& problem,
                                  const Eigen::MatrixXd& interior, const Eigen::MatrixXd& boundary);

/// Strong residual r = L u - f from a jet at one point.
double strong_residual(Operator op, double u, const Eigen::VectorXd& grad,
                       const Eigen::VectorXd& diag2, double f);

/// Uniform random penalizing points in the open domain, reproducible from the seed.
Eigen::MatrixXd random_interior_points(int dim, int count, unsigned long long seed);

}  // namespace vpinn
