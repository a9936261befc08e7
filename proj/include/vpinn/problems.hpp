#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vpinn/closedform.hpp"
#include "vpinn/diffprop.hpp"

namespace vpinn {

/// Differential operator L in L u = f.
///   Poisson1D: -u''          Burgers1D: u u' - u''          Poisson2D: u_xx + u_yy
enum class Operator { Poisson1D, Burgers1D, Poisson2D };

std::string_view to_string(Operator op);
Operator operator_from_string(std::string_view name);
int dimension(Operator op);

/// Manufactured exact solutions.
///   SineModal:         A sin(w x)
///   VanishingBoundary: A (1 - x^2) sin(w x)
///   Steep:             A sin(w x) + tanh(r x)
///   BoundaryLayer:     A sin(w x) + exp((eps - (x + 1)) / eps)
///   Steep2D:           (A sin(w x) + tanh(r x)) sin(w y)
enum class SolutionTag { SineModal, VanishingBoundary, Steep, BoundaryLayer, Steep2D };

std::string_view to_string(SolutionTag tag);
SolutionTag solution_tag_from_string(std::string_view name);

struct FabricatedSolution {
    SolutionTag tag = SolutionTag::SineModal;
    double amplitude = 1.0;
    double omega = 0.0;
    double steepness = 0.0;
    double layer_width = 0.01;

    /// Defaults used by the benchmark examples for each tag.
    static FabricatedSolution defaults(SolutionTag tag);
    void validate() const;

    /// Exact value and derivatives (hand-derived).
    struct Derivs {
        double u, ux, uy, uxx, uyy;
    };
    Derivs eval(double x, double y = 0.0) const;

    bool operator==(const FabricatedSolution&) const = default;
};

/// A boundary-value problem on [-1,1] or [-1,1]^2. forcing and the boundary trace
/// are always set; exact is empty for problems without a known solution.
struct ProblemSpec {
    Operator op = Operator::Poisson1D;
    std::optional<FabricatedSolution> fabricated;
    BoundaryData bc;  // 1D Dirichlet values
    std::function<double(double, double)> forcing;
    std::function<double(double, double)> boundary_value;
    std::function<double(double, double)> exact;

    int dim() const { return dimension(op); }
    bool has_exact() const { return static_cast<bool>(exact); }
};

/// Builds the problem for a fabricated solution. The operator defaults to the one the
/// tag belongs to (Burgers for SineModal/VanishingBoundary, Poisson otherwise).
/// Self-checks operator(exact) == forcing at 1000 random points, using second-order
/// forward differentiation of the exact solution as the independent route.
ProblemSpec make_problem(const FabricatedSolution& solution,
                         std::optional<Operator> op = std::nullopt);

/// Problem with user forcing and constant Dirichlet data; no exact solution.
ProblemSpec make_custom_problem_1d(Operator op, std::function<double(double)> forcing,
                                   BoundaryData bc);

/// Max relative mismatch between forcing and operator(exact) over random points.
double forcing_consistency(const ProblemSpec& problem, int points, unsigned seed);

Operator default_operator(SolutionTag tag);

struct ErrorMetrics {
    std::vector<double> x;  // grid coordinates (row-major over (x, y) in 2D)
    std::vector<double> y;  // empty in 1D
    std::vector<double> exact;
    std::vector<double> approx;
    std::vector<double> abs_error;
    double linf = 0.0;
    double l2 = 0.0;
};

/// Pointwise |u_NN - u_exact| on a uniform grid: `n` points in 1D, n x n in 2D.
/// L2 uses the trapezoid rule. Throws MetricUnavailable without an exact solution.
ErrorMetrics error_metrics(const DeepNetParams& net, const ProblemSpec& problem, int n = 0);

/// Same with an arbitrary evaluator u(x, y).
ErrorMetrics error_metrics(const std::function<double(double, double)>& u,
                           const ProblemSpec& problem, int n = 0);

inline constexpr int kDefaultGrid1D = 1001;
inline constexpr int kDefaultGrid2D = 101;

}  // namespace vpinn
