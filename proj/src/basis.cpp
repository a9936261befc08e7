#include "vpinn/basis.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "vpinn/errors.hpp"

namespace vpinn {

void legendre_sequence(double x, std::span<LegendreValue> out) {
    if (out.empty()) return;
    out[0] = {1.0, 0.0, 0.0};
    if (out.size() == 1) return;
    out[1] = {x, 1.0, 0.0};
    for (std::size_t k = 2; k < out.size(); ++k) {
        const double a = static_cast<double>(2 * k - 1) / static_cast<double>(k);
        const double b = static_cast<double>(k - 1) / static_cast<double>(k);
        const LegendreValue& p1 = out[k - 1];
        const LegendreValue& p2 = out[k - 2];
        out[k].p = a * x * p1.p - b * p2.p;
        out[k].dp = a * (p1.p + x * p1.dp) - b * p2.dp;
        out[k].d2p = a * (2.0 * p1.dp + x * p1.d2p) - b * p2.d2p;
    }
}

LegendreValue legendre_eval(int k, double x) {
    if (k < 0) throw ConfigError(fmt::format("legendre_eval: negative degree {}", k));
    std::vector<LegendreValue> seq(static_cast<std::size_t>(k) + 1);
    legendre_sequence(x, seq);
    return seq.back();
}

std::string_view to_string(TestFamily family) {
    switch (family) {
        case TestFamily::Sine: return "sine";
        case TestFamily::LegendreComposite: return "legendre";
    }
    return "unknown";
}

TestFamily test_family_from_string(std::string_view name) {
    if (name == "sine") return TestFamily::Sine;
    if (name == "legendre") return TestFamily::LegendreComposite;
    throw ConfigError(fmt::format("unknown test family '{}' (expected sine|legendre)", name));
}

void TestBasis::validate() const {
    if (count < 1 || count > kMaxTestIndex) {
        throw ConfigError(
            fmt::format("test function count K={} outside [1, {}]", count, kMaxTestIndex));
    }
}

void TestBasis2D::validate() const {
    x.validate();
    y.validate();
}

namespace {

void check_index(const TestBasis& basis, int k) {
    if (k < 1 || k > basis.count) {
        throw ConfigError(fmt::format("test index k={} outside [1, {}]", k, basis.count));
    }
}

TestValue eval_unchecked(TestFamily family, int k, double x) {
    if (family == TestFamily::Sine) {
        const double kp = k * std::numbers::pi;
        const double s = std::sin(kp * x);
        const double c = std::cos(kp * x);
        return {s, kp * c, -kp * kp * s};
    }
    std::vector<LegendreValue> seq(static_cast<std::size_t>(k) + 2);
    legendre_sequence(x, seq);
    const LegendreValue& hi = seq[static_cast<std::size_t>(k) + 1];
    const LegendreValue& lo = seq[static_cast<std::size_t>(k) - 1];
    return {hi.p - lo.p, hi.dp - lo.dp, hi.d2p - lo.d2p};
}

}  // namespace

TestValue test_fn(const TestBasis& basis, int k, double x) {
    basis.validate();
    check_index(basis, k);
    return eval_unchecked(basis.family, k, x);
}

TestValue2D test_fn_2d(const TestBasis2D& basis, int kx, int ky, double x, double y) {
    basis.validate();
    check_index(basis.x, kx);
    check_index(basis.y, ky);
    const TestValue fx = eval_unchecked(basis.x.family, kx, x);
    const TestValue fy = eval_unchecked(basis.y.family, ky, y);
    return {fx.v * fy.v, fx.dv * fy.v, fx.v * fy.dv, fx.d2v * fy.v, fx.v * fy.d2v};
}

TestTable tabulate(const TestBasis& basis, std::span<const double> points) {
    basis.validate();
    const auto K = static_cast<Eigen::Index>(basis.count);
    const auto P = static_cast<Eigen::Index>(points.size());
    TestTable t{Eigen::MatrixXd(K, P), Eigen::MatrixXd(K, P), Eigen::MatrixXd(K, P)};
    std::vector<LegendreValue> seq(static_cast<std::size_t>(basis.count) + 2);
    for (Eigen::Index q = 0; q < P; ++q) {
        const double x = points[static_cast<std::size_t>(q)];
        if (basis.family == TestFamily::LegendreComposite) legendre_sequence(x, seq);
        for (Eigen::Index k = 1; k <= K; ++k) {
            TestValue tv;
            if (basis.family == TestFamily::Sine) {
                tv = eval_unchecked(TestFamily::Sine, static_cast<int>(k), x);
            } else {
                const auto& hi = seq[static_cast<std::size_t>(k) + 1];
                const auto& lo = seq[static_cast<std::size_t>(k) - 1];
                tv = {hi.p - lo.p, hi.dp - lo.dp, hi.d2p - lo.d2p};
            }
            t.v(k - 1, q) = tv.v;
            t.dv(k - 1, q) = tv.dv;
            t.d2v(k - 1, q) = tv.d2v;
        }
    }
    return t;
}

}  // namespace vpinn
