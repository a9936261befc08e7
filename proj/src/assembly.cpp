#include "vpinn/assembly.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "vpinn/errors.hpp"

namespace vpinn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPi = std::numbers::pi;

// int_{-1}^{1} sin(alpha x) sin(k pi x) dx
std::optional<double> sine_overlap(double alpha, int k) {
    const double kp = k * kPi;
    const double D = alpha * alpha - kp * kp;
    if (std::abs(D) < 1e-8) return std::nullopt;
    const double parity = (k % 2 == 0) ? 1.0 : -1.0;
    return parity * std::sin(alpha) * 2.0 * kp / D;
}

Eigen::Map<const RowMat> as_grid(const double* data, Eigen::Index nx, Eigen::Index ny) {
    return Eigen::Map<const RowMat>(data, nx, ny);
}

Eigen::RowVectorXd flatten_rowmajor(const Eigen::MatrixXd& m) {
    RowMat r = m;
    return Eigen::Map<const Eigen::RowVectorXd>(r.data(), r.size());
}

}  // namespace

std::string_view to_string(VariationalForm form) {
    switch (form) {
        case VariationalForm::V1: return "v1";
        case VariationalForm::V2: return "v2";
        case VariationalForm::V3: return "v3";
        case VariationalForm::Projection: return "projection";
    }
    return "unknown";
}

Eigen::MatrixXd square_boundary_points(int per_edge) {
    if (per_edge < 2) throw ConfigError("need at least 2 boundary points per edge");
    Eigen::MatrixXd pts(2, 4 * per_edge);
    const double h = 2.0 / (per_edge - 1);
    for (int i = 0; i < per_edge; ++i) {
        const double s = i == per_edge - 1 ? 1.0 : -1.0 + i * h;
        pts.col(i) << -1.0, s;
        pts.col(per_edge + i) << 1.0, s;
        pts.col(2 * per_edge + i) << s, -1.0;
        pts.col(3 * per_edge + i) << s, 1.0;
    }
    return pts;
}

Eigen::MatrixXd problem_boundary_points(const ProblemSpec& problem, int per_edge) {
    if (problem.dim() == 2) return square_boundary_points(per_edge);
    Eigen::MatrixXd pts(1, 2);
    pts << -1.0, 1.0;
    return pts;
}

Eigen::VectorXd assemble_force(const ProblemSpec& problem, const TestBasis& basis,
                               const QuadratureRule& rule) {
    if (problem.dim() != 1) throw ConfigError("assemble_force is for 1D problems");
    const TestTable t = tabulate(basis, rule.nodes);
    Eigen::RowVectorXd wf(static_cast<Eigen::Index>(rule.nodes.size()));
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        wf[static_cast<Eigen::Index>(q)] = rule.weights[q] * problem.forcing(rule.nodes[q], 0.0);
    }
    return t.v * wf.transpose();
}

Eigen::VectorXd assemble_force_2d(const ProblemSpec& problem, const TestBasis2D& basis,
                                  const TensorRule& rule) {
    if (problem.dim() != 2) throw ConfigError("assemble_force_2d is for 2D problems");
    const TestTable tx = tabulate(basis.x, rule.x.nodes);
    const TestTable ty = tabulate(basis.y, rule.y.nodes);
    const auto nx = static_cast<Eigen::Index>(rule.x.nodes.size());
    const auto ny = static_cast<Eigen::Index>(rule.y.nodes.size());
    Eigen::MatrixXd wf(nx, ny);
    for (Eigen::Index i = 0; i < nx; ++i)
        for (Eigen::Index j = 0; j < ny; ++j)
            wf(i, j) = rule.x.weights[i] * rule.y.weights[j] *
                       problem.forcing(rule.x.nodes[i], rule.y.nodes[j]);
    return flatten_rowmajor(tx.v * wf * ty.v.transpose()).transpose();
}

std::optional<Eigen::VectorXd> analytic_force(const ProblemSpec& problem, const TestBasis& basis) {
    if (!problem.fabricated || problem.fabricated->tag != SolutionTag::SineModal ||
        basis.family != TestFamily::Sine || problem.dim() != 1) {
        return std::nullopt;
    }
    const double A = problem.fabricated->amplitude, w = problem.fabricated->omega;
    Eigen::VectorXd F(basis.count);
    for (int k = 1; k <= basis.count; ++k) {
        // -u'' = A w^2 sin(w x); Burgers adds u u' = A^2 w / 2 sin(2 w x)
        const auto lin = sine_overlap(w, k);
        if (!lin) return std::nullopt;
        double value = A * w * w * *lin;
        if (problem.op == Operator::Burgers1D) {
            const auto nl = sine_overlap(2.0 * w, k);
            if (!nl) return std::nullopt;
            value += A * A * w / 2.0 * *nl;
        }
        F[k - 1] = value;
    }
    return F;
}

VariationalAssembler::VariationalAssembler(const ProblemSpec& problem, const TestBasis& basis,
                                           const QuadratureRule& rule, VariationalForm form)
    : dim_(1), form_(form), op_(problem.op) {
    if (problem.dim() != 1) throw ConfigError("1D assembler needs a 1D problem");
    basis.validate();
    const auto Q = static_cast<Eigen::Index>(rule.nodes.size());
    points_.resize(1, Q);
    w_.resize(Q);
    for (Eigen::Index q = 0; q < Q; ++q) {
        points_(0, q) = rule.nodes[static_cast<std::size_t>(q)];
        w_[q] = rule.weights[static_cast<std::size_t>(q)];
    }
    tests_ = tabulate(basis, rule.nodes);

    const bool burgers = op_ == Operator::Burgers1D;
    switch (form_) {
        case VariationalForm::V1: order_ = JetOrder::Second; break;
        case VariationalForm::V2: order_ = JetOrder::First; break;
        case VariationalForm::V3: order_ = burgers ? JetOrder::First : JetOrder::Value; break;
        case VariationalForm::Projection: order_ = JetOrder::Value; break;
    }
    if (form_ == VariationalForm::V3) {
        // [u v_k'] with the exact Dirichlet data at both ends
        boundary_term_.resize(basis.count);
        for (int k = 1; k <= basis.count; ++k) {
            boundary_term_[k - 1] = problem.bc.h * test_fn(basis, k, 1.0).dv -
                                    problem.bc.g * test_fn(basis, k, -1.0).dv;
        }
    }
    init_target(problem);
}

VariationalAssembler::VariationalAssembler(const ProblemSpec& problem, const TestBasis2D& basis,
                                           const TensorRule& rule, VariationalForm form)
    : dim_(2), form_(form), op_(problem.op) {
    if (problem.dim() != 2) throw ConfigError("2D assembler needs a 2D problem");
    basis.validate();
    if (form == VariationalForm::V3) {
        throw ConfigError("form v3 is not available in 2D (use v1 or v2)");
    }
    const auto nx = static_cast<Eigen::Index>(rule.x.nodes.size());
    const auto ny = static_cast<Eigen::Index>(rule.y.nodes.size());
    points_.resize(2, nx * ny);
    w2_.resize(nx, ny);
    for (Eigen::Index i = 0; i < nx; ++i) {
        for (Eigen::Index j = 0; j < ny; ++j) {
            points_(0, i * ny + j) = rule.x.nodes[i];
            points_(1, i * ny + j) = rule.y.nodes[j];
            w2_(i, j) = rule.x.weights[i] * rule.y.weights[j];
        }
    }
    tx_ = tabulate(basis.x, rule.x.nodes);
    ty_ = tabulate(basis.y, rule.y.nodes);
    switch (form_) {
        case VariationalForm::V1: order_ = JetOrder::Second; break;
        case VariationalForm::V2: order_ = JetOrder::First; break;
        default: order_ = JetOrder::Value; break;
    }
    init_target(problem);
}

void VariationalAssembler::init_target(const ProblemSpec& problem) {
    const bool projection = form_ == VariationalForm::Projection;
    if (projection && !problem.has_exact()) {
        throw ConfigError("projection form needs a problem with an exact solution");
    }
    const auto& fn = projection ? problem.exact : problem.forcing;
    const Eigen::Index P = points_.cols();
    Eigen::RowVectorXd vals(P);
    for (Eigen::Index p = 0; p < P; ++p) {
        vals[p] = fn(points_(0, p), dim_ == 2 ? points_(1, p) : 0.0);
    }
    if (dim_ == 1) {
        target_ = tests_.v * (w_.array() * vals.array()).matrix().transpose();
    } else {
        const Eigen::MatrixXd g = w2_.array() * as_grid(vals.data(), w2_.rows(), w2_.cols()).array();
        target_ = flatten_rowmajor(tx_.v * g * ty_.v.transpose()).transpose();
    }
}

Eigen::VectorXd VariationalAssembler::residual(const JetBatch& jets) const {
    if (dim_ == 1) {
        const Eigen::ArrayXd w = w_.transpose().array();
        Eigen::VectorXd R;
        switch (form_) {
            case VariationalForm::V1:
                R = -(tests_.v * (w * jets.diag2.row(0).transpose().array()).matrix());
                break;
            case VariationalForm::V2:
                R = tests_.dv * (w * jets.grad.row(0).transpose().array()).matrix();
                break;
            case VariationalForm::V3:
                R = -(tests_.d2v * (w * jets.u.transpose().array()).matrix()) + boundary_term_;
                break;
            case VariationalForm::Projection:
                R = tests_.v * (w * jets.u.transpose().array()).matrix();
                break;
        }
        if (op_ == Operator::Burgers1D && form_ != VariationalForm::Projection) {
            R += tests_.v *
                 (w * jets.u.transpose().array() * jets.grad.row(0).transpose().array()).matrix();
        }
        return R;
    }

    const Eigen::Index nx = w2_.rows(), ny = w2_.cols();
    const Eigen::ArrayXXd W = w2_.array();
    auto grid = [&](const Eigen::RowVectorXd& v) -> Eigen::MatrixXd {
        return W * as_grid(v.data(), nx, ny).array();
    };
    Eigen::MatrixXd R;
    switch (form_) {
        case VariationalForm::V1: {
            const Eigen::RowVectorXd lap = jets.diag2.row(0) + jets.diag2.row(1);
            R = tx_.v * grid(lap) * ty_.v.transpose();
            break;
        }
        case VariationalForm::V2: {
            const Eigen::RowVectorXd ux = jets.grad.row(0), uy = jets.grad.row(1);
            R = -(tx_.dv * grid(ux) * ty_.v.transpose() + tx_.v * grid(uy) * ty_.dv.transpose());
            break;
        }
        default: R = tx_.v * grid(jets.u) * ty_.v.transpose(); break;
    }
    return flatten_rowmajor(R).transpose();
}

void VariationalAssembler::accumulate_adjoint(const JetBatch& jets, const Eigen::VectorXd& rbar,
                                              JetBatch& adj) const {
    if (dim_ == 1) {
        const Eigen::RowVectorXd back = rbar.transpose() * tests_.v;  // sum_k rbar_k v_k(x_q)
        const Eigen::ArrayXXd w = w_.array();
        switch (form_) {
            case VariationalForm::V1:
                adj.diag2.row(0).array() -= w * back.array();
                break;
            case VariationalForm::V2:
                adj.grad.row(0).array() += w * (rbar.transpose() * tests_.dv).array();
                break;
            case VariationalForm::V3:
                adj.u.array() -= w * (rbar.transpose() * tests_.d2v).array();
                break;
            case VariationalForm::Projection:
                adj.u.array() += w * back.array();
                break;
        }
        if (op_ == Operator::Burgers1D && form_ != VariationalForm::Projection) {
            adj.u.array() += w * back.array() * jets.grad.row(0).array();
            adj.grad.row(0).array() += w * back.array() * jets.u.array();
        }
        return;
    }

    const Eigen::Index nx = w2_.rows(), ny = w2_.cols();
    const Eigen::MatrixXd Rb = as_grid(rbar.data(), tx_.v.rows(), ty_.v.rows());
    const Eigen::ArrayXXd W = w2_.array();
    switch (form_) {
        case VariationalForm::V1: {
            const Eigen::RowVectorXd g =
                flatten_rowmajor((W * (tx_.v.transpose() * Rb * ty_.v).array()).matrix());
            adj.diag2.row(0) += g;
            adj.diag2.row(1) += g;
            break;
        }
        case VariationalForm::V2:
            adj.grad.row(0) -=
                flatten_rowmajor((W * (tx_.dv.transpose() * Rb * ty_.v).array()).matrix());
            adj.grad.row(1) -=
                flatten_rowmajor((W * (tx_.v.transpose() * Rb * ty_.dv).array()).matrix());
            break;
        default:
            adj.u += flatten_rowmajor((W * (tx_.v.transpose() * Rb * ty_.v).array()).matrix());
            break;
    }
    (void)nx;
    (void)ny;
}

ResidualVector assemble_variational(const DeepNetParams& net, const TestBasis& basis,
                                    const QuadratureRule& rule, VariationalForm form,
                                    const ProblemSpec& problem) {
    const VariationalAssembler as(problem, basis, rule, form);
    const JetBatch jets = eval_batch(net, as.points(), as.required_order());
    ResidualVector out{as.residual(jets), as.target(), {}};
    const Eigen::MatrixXd bp = problem_boundary_points(problem);
    const Eigen::RowVectorXd ub = eval_batch(net, bp, JetOrder::Value).u;
    out.boundary.resize(bp.cols());
    for (Eigen::Index i = 0; i < bp.cols(); ++i) out.boundary[i] = ub[i] - problem.boundary_value(bp(0, i), 0.0);
    return out;
}

ResidualVector assemble_variational_2d(const DeepNetParams& net, const TestBasis2D& basis,
                                       const TensorRule& rule, VariationalForm form,
                                       const ProblemSpec& problem, int boundary_per_edge) {
    const VariationalAssembler as(problem, basis, rule, form);
    const JetBatch jets = eval_batch(net, as.points(), as.required_order());
    ResidualVector out{as.residual(jets), as.target(), {}};
    const Eigen::MatrixXd bp = square_boundary_points(boundary_per_edge);
    const Eigen::RowVectorXd ub = eval_batch(net, bp, JetOrder::Value).u;
    out.boundary.resize(bp.cols());
    for (Eigen::Index i = 0; i < bp.cols(); ++i) {
        out.boundary[i] = ub[i] - problem.boundary_value(bp(0, i), bp(1, i));
    }
    return out;
}

double strong_residual(Operator op, double u, const Eigen::VectorXd& grad,
                       const Eigen::VectorXd& diag2, double f) {
    switch (op) {
        case Operator::Poisson1D: return -diag2[0] - f;
        case Operator::Burgers1D: return u * grad[0] - diag2[0] - f;
        case Operator::Poisson2D: return diag2[0] + diag2[1] - f;
    }
    return 0.0;
}

StrongResidualSet assemble_strong(const DeepNetParams& net, const ProblemSpec& problem,
                                  const Eigen::MatrixXd& interior, const Eigen::MatrixXd& boundary) {
    const int d = problem.dim();
    const JetBatch jets = eval_batch(net, interior, JetOrder::Second);
    StrongResidualSet out;
    out.interior.resize(interior.cols());
    for (Eigen::Index p = 0; p < interior.cols(); ++p) {
        const double y = d == 2 ? interior(1, p) : 0.0;
        out.interior[p] = strong_residual(problem.op, jets.u[p], jets.grad.col(p), jets.diag2.col(p),
                                          problem.forcing(interior(0, p), y));
    }
    const Eigen::RowVectorXd ub = eval_batch(net, boundary, JetOrder::Value).u;
    out.boundary.resize(boundary.cols());
    for (Eigen::Index p = 0; p < boundary.cols(); ++p) {
        const double y = d == 2 ? boundary(1, p) : 0.0;
        out.boundary[p] = ub[p] - problem.boundary_value(boundary(0, p), y);
    }
    return out;
}

Eigen::MatrixXd random_interior_points(int dim, int count, unsigned long long seed) {
    if (count < 1) throw ConfigError("need at least one penalizing point");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::MatrixXd pts(dim, count);
    for (int p = 0; p < count; ++p)
        for (int i = 0; i < dim; ++i) {
            double v = uni(rng);
            while (v == -1.0) v = uni(rng);
            pts(i, p) = v;
        }
    return pts;
}

}  // namespace vpinn
