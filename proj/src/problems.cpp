#include "vpinn/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "vpinn/errors.hpp"

namespace vpinn {

namespace {

constexpr double kPi = std::numbers::pi;

// Second-order forward jet (value, first, second derivative along one direction).
struct Jet2 {
    double v = 0.0, d = 0.0, dd = 0.0;
};
Jet2 operator+(Jet2 a, Jet2 b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
Jet2 operator-(Jet2 a, Jet2 b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
Jet2 operator*(Jet2 a, Jet2 b) { return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd}; }
Jet2 operator*(double s, Jet2 a) { return {s * a.v, s * a.d, s * a.dd}; }
Jet2 chain(Jet2 a, double f, double f1, double f2) {
    return {f, f1 * a.d, f2 * a.d * a.d + f1 * a.dd};
}
Jet2 sin(Jet2 a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
Jet2 exp(Jet2 a) { return chain(a, std::exp(a.v), std::exp(a.v), std::exp(a.v)); }
Jet2 tanh(Jet2 a) {
    const double t = std::tanh(a.v), s = 1.0 - t * t;
    return chain(a, t, s, -2.0 * t * s);
}
Jet2 constant(double c) { return {c, 0.0, 0.0}; }

// Exact solutions written once over a generic scalar.
template <class T>
T exact_generic(const FabricatedSolution& s, T x, T y) {
    const double A = s.amplitude, w = s.omega;
    switch (s.tag) {
        case SolutionTag::SineModal: return A * sin(w * x);
        case SolutionTag::VanishingBoundary: return A * ((constant(1.0) - x * x) * sin(w * x));
        case SolutionTag::Steep: return A * sin(w * x) + tanh(s.steepness * x);
        case SolutionTag::BoundaryLayer: {
            const double e = s.layer_width;
            return A * sin(w * x) + exp((1.0 / e) * (constant(e - 1.0) - x));
        }
        case SolutionTag::Steep2D: return (A * sin(w * x) + tanh(s.steepness * x)) * sin(w * y);
    }
    return constant(0.0);
}

double apply_operator(Operator op, const FabricatedSolution::Derivs& d) {
    switch (op) {
        case Operator::Poisson1D: return -d.uxx;
        case Operator::Burgers1D: return d.u * d.ux - d.uxx;
        case Operator::Poisson2D: return d.uxx + d.uyy;
    }
    return 0.0;
}

}  // namespace

std::string_view to_string(Operator op) {
    switch (op) {
        case Operator::Poisson1D: return "poisson1d";
        case Operator::Burgers1D: return "burgers1d";
        case Operator::Poisson2D: return "poisson2d";
    }
    return "unknown";
}

Operator operator_from_string(std::string_view name) {
    if (name == "poisson1d") return Operator::Poisson1D;
    if (name == "burgers1d") return Operator::Burgers1D;
    if (name == "poisson2d") return Operator::Poisson2D;
    throw ConfigError(
        fmt::format("unknown operator '{}' (expected poisson1d|burgers1d|poisson2d)", name));
}

int dimension(Operator op) { return op == Operator::Poisson2D ? 2 : 1; }

std::string_view to_string(SolutionTag tag) {
    switch (tag) {
        case SolutionTag::SineModal: return "sine-modal";
        case SolutionTag::VanishingBoundary: return "vanishing-boundary";
        case SolutionTag::Steep: return "steep";
        case SolutionTag::BoundaryLayer: return "boundary-layer";
        case SolutionTag::Steep2D: return "steep-2d";
    }
    return "unknown";
}

SolutionTag solution_tag_from_string(std::string_view name) {
    for (auto tag : {SolutionTag::SineModal, SolutionTag::VanishingBoundary, SolutionTag::Steep,
                     SolutionTag::BoundaryLayer, SolutionTag::Steep2D}) {
        if (name == to_string(tag)) return tag;
    }
    throw ConfigError(fmt::format(
        "unknown problem tag '{}' (expected sine-modal|vanishing-boundary|steep|boundary-layer|steep-2d)",
        name));
}

Operator default_operator(SolutionTag tag) {
    switch (tag) {
        case SolutionTag::SineModal:
        case SolutionTag::VanishingBoundary: return Operator::Burgers1D;
        case SolutionTag::Steep:
        case SolutionTag::BoundaryLayer: return Operator::Poisson1D;
        case SolutionTag::Steep2D: return Operator::Poisson2D;
    }
    return Operator::Poisson1D;
}

FabricatedSolution FabricatedSolution::defaults(SolutionTag tag) {
    switch (tag) {
        case SolutionTag::SineModal: return {tag, 1.0, 2.1 * kPi, 0.0, 0.01};
        case SolutionTag::VanishingBoundary: return {tag, 1.0, 2.1 * kPi, 0.0, 0.01};
        case SolutionTag::Steep: return {tag, 0.1, 4.0 * kPi, 5.0, 0.01};
        case SolutionTag::BoundaryLayer: return {tag, 0.1, 4.0 * kPi, 0.0, 0.01};
        case SolutionTag::Steep2D: return {tag, 0.1, 2.0 * kPi, 10.0, 0.01};
    }
    return {};
}

void FabricatedSolution::validate() const {
    if (!std::isfinite(amplitude) || !std::isfinite(omega) || !std::isfinite(steepness) ||
        !std::isfinite(layer_width)) {
        throw ConfigError("fabricated solution parameters must be finite");
    }
    if (!(layer_width > 0.0)) {
        throw ConfigError(fmt::format("boundary layer width {} must be positive", layer_width));
    }
}

FabricatedSolution::Derivs FabricatedSolution::eval(double x, double y) const {
    const double A = amplitude, w = omega;
    const double s = std::sin(w * x), c = std::cos(w * x);
    Derivs d{0, 0, 0, 0, 0};
    switch (tag) {
        case SolutionTag::SineModal:
            d.u = A * s;
            d.ux = A * w * c;
            d.uxx = -A * w * w * s;
            break;
        case SolutionTag::VanishingBoundary: {
            const double q = 1.0 - x * x;
            d.u = A * q * s;
            d.ux = A * (-2.0 * x * s + q * w * c);
            d.uxx = A * (-2.0 * s - 4.0 * x * w * c - q * w * w * s);
            break;
        }
        case SolutionTag::Steep: {
            const double t = std::tanh(steepness * x), sech2 = 1.0 - t * t;
            d.u = A * s + t;
            d.ux = A * w * c + steepness * sech2;
            d.uxx = -A * w * w * s - 2.0 * steepness * steepness * t * sech2;
            break;
        }
        case SolutionTag::BoundaryLayer: {
            const double e = std::exp((layer_width - (x + 1.0)) / layer_width);
            d.u = A * s + e;
            d.ux = A * w * c - e / layer_width;
            d.uxx = -A * w * w * s + e / (layer_width * layer_width);
            break;
        }
        case SolutionTag::Steep2D: {
            const double t = std::tanh(steepness * x), sech2 = 1.0 - t * t;
            const double X = A * s + t;
            const double Xx = A * w * c + steepness * sech2;
            const double Xxx = -A * w * w * s - 2.0 * steepness * steepness * t * sech2;
            const double Y = std::sin(w * y), Yy = w * std::cos(w * y), Yyy = -w * w * Y;
            d.u = X * Y;
            d.ux = Xx * Y;
            d.uy = X * Yy;
            d.uxx = Xxx * Y;
            d.uyy = X * Yyy;
            break;
        }
    }
    return d;
}

ProblemSpec make_problem(const FabricatedSolution& solution, std::optional<Operator> op) {
    solution.validate();
    const Operator oper = op.value_or(default_operator(solution.tag));
    const bool sol2d = solution.tag == SolutionTag::Steep2D;
    if (sol2d != (dimension(oper) == 2)) {
        throw ConfigError(fmt::format("problem '{}' cannot be paired with operator '{}'",
                                      to_string(solution.tag), to_string(oper)));
    }
    ProblemSpec p;
    p.op = oper;
    p.fabricated = solution;
    const FabricatedSolution s = solution;
    p.exact = [s](double x, double y) { return s.eval(x, y).u; };
    p.boundary_value = p.exact;
    if (!sol2d) p.bc = {s.eval(-1.0).u, s.eval(1.0).u};

    if (s.tag == SolutionTag::SineModal && oper == Operator::Burgers1D) {
        const double A = s.amplitude, w = s.omega;
        p.forcing = [A, w](double x, double) {
            return A * A * w / 2.0 * std::sin(2.0 * w * x) + A * w * w * std::sin(w * x);
        };
    } else {
        p.forcing = [s, oper](double x, double y) { return apply_operator(oper, s.eval(x, y)); };
    }

    const double mismatch = forcing_consistency(p, 1000, 20200101u);
    if (mismatch > 1e-8) {
        throw InternalError(fmt::format("forcing for '{}' disagrees with operator(exact): {:.3e}",
                                        to_string(s.tag), mismatch));
    }
    return p;
}

ProblemSpec make_custom_problem_1d(Operator op, std::function<double(double)> forcing,
                                   BoundaryData bc) {
    if (dimension(op) != 1) throw ConfigError("make_custom_problem_1d needs a 1D operator");
    ProblemSpec p;
    p.op = op;
    p.bc = bc;
    p.forcing = [f = std::move(forcing)](double x, double) { return f(x); };
    p.boundary_value = [bc](double x, double) { return x < 0.0 ? bc.g : bc.h; };
    return p;
}

double forcing_consistency(const ProblemSpec& problem, int points, unsigned seed) {
    if (!problem.fabricated) throw MetricUnavailable("forcing check needs a fabricated solution");
    const FabricatedSolution& s = *problem.fabricated;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
        const double x = uni(rng), y = problem.dim() == 2 ? uni(rng) : 0.0;
        const Jet2 jx = exact_generic<Jet2>(s, {x, 1.0, 0.0}, constant(y));
        FabricatedSolution::Derivs d{jx.v, jx.d, 0.0, jx.dd, 0.0};
        if (problem.dim() == 2) {
            const Jet2 jy = exact_generic<Jet2>(s, constant(x), {y, 1.0, 0.0});
            d.uy = jy.d;
            d.uyy = jy.dd;
        }
        const double expected = apply_operator(problem.op, d);
        const double got = problem.forcing(x, y);
        worst = std::max(worst, std::abs(got - expected) / std::max(1.0, std::abs(expected)));
    }
    return worst;
}

ErrorMetrics error_metrics(const std::function<double(double, double)>& u,
                           const ProblemSpec& problem, int n) {
    if (!problem.has_exact()) throw MetricUnavailable("problem has no exact solution");
    const bool two_d = problem.dim() == 2;
    if (n <= 0) n = two_d ? kDefaultGrid2D : kDefaultGrid1D;
    if (n < 2) throw ConfigError("error grid needs at least 2 points per direction");
    const double h = 2.0 / (n - 1);
    auto coord = [&](int i) { return i == n - 1 ? 1.0 : -1.0 + i * h; };
    auto trap = [&](int i) { return (i == 0 || i == n - 1) ? 0.5 * h : h; };

    ErrorMetrics m;
    double l2sq = 0.0;
    auto push = [&](double x, double y, double weight) {
        const double ex = problem.exact(x, y);
        const double ap = u(x, y);
        const double e = std::abs(ap - ex);
        m.x.push_back(x);
        if (two_d) m.y.push_back(y);
        m.exact.push_back(ex);
        m.approx.push_back(ap);
        m.abs_error.push_back(e);
        m.linf = std::max(m.linf, e);
        l2sq += weight * e * e;
    };
    for (int i = 0; i < n; ++i) {
        if (!two_d) {
            push(coord(i), 0.0, trap(i));
            continue;
        }
        for (int j = 0; j < n; ++j) push(coord(i), coord(j), trap(i) * trap(j));
    }
    m.l2 = std::sqrt(l2sq);
    return m;
}

ErrorMetrics error_metrics(const DeepNetParams& net, const ProblemSpec& problem, int n) {
    if (net.input_dim != problem.dim()) {
        throw ConfigError(fmt::format("network input dimension {} does not match problem dimension {}",
                                      net.input_dim, problem.dim()));
    }
    if (!problem.has_exact()) throw MetricUnavailable("problem has no exact solution");
    const bool two_d = problem.dim() == 2;
    if (n <= 0) n = two_d ? kDefaultGrid2D : kDefaultGrid1D;
    // evaluate the net once on the whole grid, then look values up in grid order
    const double h = 2.0 / (n - 1);
    auto coord = [&](int i) { return i == n - 1 ? 1.0 : -1.0 + i * h; };
    const Eigen::Index P = two_d ? static_cast<Eigen::Index>(n) * n : n;
    Eigen::MatrixXd pts(net.input_dim, P);
    for (int i = 0; i < n; ++i) {
        if (!two_d) {
            pts(0, i) = coord(i);
            continue;
        }
        for (int j = 0; j < n; ++j) {
            pts(0, static_cast<Eigen::Index>(i) * n + j) = coord(i);
            pts(1, static_cast<Eigen::Index>(i) * n + j) = coord(j);
        }
    }
    const Eigen::RowVectorXd values = eval_batch(net, pts, JetOrder::Value).u;
    Eigen::Index cursor = 0;
    return error_metrics([&](double, double) { return values[cursor++]; }, problem, n);
}

}  // namespace vpinn
