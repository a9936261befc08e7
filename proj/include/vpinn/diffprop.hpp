#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace vpinn {

enum class Activation { Sine, Tanh };

std::string_view to_string(Activation act);
Activation activation_from_string(std::string_view name);

/// Fully connected network u(x) = c^T s(W_L s(... s(W_1 x + b_1) ...) + b_L).
/// The output map is linear with no bias.
struct DeepNetParams {
    int input_dim = 1;
    Activation activation = Activation::Tanh;
    std::vector<Eigen::MatrixXd> weights;  // W_i: N_i x N_{i-1}
    std::vector<Eigen::VectorXd> biases;   // b_i: N_i
    Eigen::VectorXd output;                // c: N_L

    /// All-zero network with the given hidden widths.
    static DeepNetParams zeros(int input_dim, const std::vector<int>& widths, Activation act);

    int depth() const { return static_cast<int>(weights.size()); }
    std::vector<int> widths() const;
    std::size_t parameter_count() const;

    /// Layer by layer: W_i row-major, then b_i; output weights last.
    Eigen::VectorXd flatten() const;
    void assign(std::span<const double> flat);

    /// Throws ConfigError on broken shape chains, NonFiniteError on NaN/Inf entries.
    void validate() const;
};

/// Value, gradient and pure second derivatives at one point.
struct EvalJet {
    Eigen::VectorXd x;
    double u = 0.0;
    Eigen::VectorXd grad;
    Eigen::VectorXd diag2;
};

/// Jets for a batch of P points. grad and diag2 are d x P; empty when not requested.
struct JetBatch {
    Eigen::RowVectorXd u;
    Eigen::MatrixXd grad;
    Eigen::MatrixXd diag2;

    /// Zero-filled batch with the same channel layout, used for adjoints.
    static JetBatch zeros_like(const JetBatch& other);
};

/// Derivative order carried through the network: 0 value only, 1 adds the input
/// gradient, 2 adds the pure second derivatives.
enum class JetOrder : int { Value = 0, First = 1, Second = 2 };

/// Forward sweep over a batch of points that keeps every intermediate so a reverse
/// sweep can return d(scalar)/d(parameters) for any scalar built from the jets.
///
/// Per hidden unit z = s(a) the tangent channels propagate as
///   z'  = s'(a) a'
///   z'' = s''(a) (a')^2 + s'(a) a''
/// and the reverse sweep differentiates these relations, which needs s'''.
class JetTape {
public:
    /// points is d x P.
    JetTape(const DeepNetParams& net, const Eigen::MatrixXd& points, JetOrder order);

    const JetBatch& jets() const { return jets_; }
    JetOrder order() const { return order_; }

    /// adjoint holds d(scalar)/d(jet channel) with the same layout as jets().
    /// Returns the flattened parameter gradient (DeepNetParams::flatten order).
    Eigen::VectorXd backward(const JetBatch& adjoint) const;

private:
    struct Layer {
        Eigen::MatrixXd z;
        Eigen::MatrixXd s1, s2, s3;  // s', s'', s''' at the pre-activation
        std::vector<Eigen::MatrixXd> ap, app, zp, zpp;
    };

    DeepNetParams net_;
    Eigen::MatrixXd points_;
    JetOrder order_;
    std::vector<Layer> layers_;
    JetBatch jets_;
};

EvalJet eval_jet(const DeepNetParams& net, std::span<const double> x);

JetBatch eval_batch(const DeepNetParams& net, const Eigen::MatrixXd& points, JetOrder order);

/// Builds a scalar from the jets and writes d(scalar)/d(jets) into the adjoint,
/// which arrives zero-filled with the jets' layout.
using ScalarBuilder = std::function<double(const JetBatch& jets, JetBatch& adjoint)>;

struct ValueAndGradient {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// Throws NonFiniteError naming the first parameter whose derivative is not finite.
ValueAndGradient param_gradient(const DeepNetParams& net, const Eigen::MatrixXd& points,
                                JetOrder order, const ScalarBuilder& builder);

/// Throws NonFiniteError(where, i) for the first non-finite entry.
void require_finite(const Eigen::VectorXd& v, std::string_view where);

}  // namespace vpinn
