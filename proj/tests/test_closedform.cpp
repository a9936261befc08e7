#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vpinn/basis.hpp"
#include "vpinn/closedform.hpp"
#include "vpinn/errors.hpp"
#include "vpinn/quadrature.hpp"

using namespace vpinn;
using namespace vpinn::testing;

namespace {

const QuadratureRule& q200() {
    static const QuadratureRule rule = gauss_rule(RuleKind::GaussLegendre, 200);
    return rule;
}

double quad(const std::function<double(double)>& f) { return integrate(q200(), f); }

using Residual = std::function<double(const ShallowNetParams&, int)>;
using ResidualGrad = std::function<double(const ShallowNetParams&, int, double, ShallowNetParams&)>;

void expect_gradient(const ShallowNetParams& s, int k, const Residual& r, const ResidualGrad& rg) {
    ShallowNetParams grad = ShallowNetParams::zeros(s.size());
    const double seed = 0.7;
    const double v = rg(s, k, seed, grad);
    EXPECT_NEAR(v, r(s, k), 1e-12 * std::max(1.0, std::abs(v)));
    const auto f = [&](const Eigen::VectorXd& p) {
        ShallowNetParams t = s;
        t.assign(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
        return seed * r(t, k);
    };
    const auto fd = central_difference(f, s.flatten());
    EXPECT_LT(gradient_mismatch(grad.flatten(), fd), 1e-6) << "k=" << k;
}

}  // namespace

TEST(SphericalBessel, MatchesStandardLibrary) {
    for (double x : {1e-8, 0.01, 0.5, 3.0, 7.7, 25.0, 60.0}) {
        const auto seq = spherical_bessel_sequence(x, 80);
        for (int n = 0; n <= 80; ++n) {
            const double ref = std::sph_bessel(static_cast<unsigned>(n), x);
            if (!std::isfinite(ref)) {
                // libstdc++ gives NaN once the value underflows
                EXPECT_LT(std::abs(seq[n]), 1e-290) << "x=" << x << " n=" << n;
                continue;
            }
            EXPECT_NEAR(seq[n], ref, 1e-14 + 1e-11 * std::abs(ref)) << "x=" << x << " n=" << n;
        }
    }
}

TEST(SphericalBessel, ZeroArgumentAndNegative) {
    const auto z = spherical_bessel_sequence(0.0, 5);
    EXPECT_EQ(z[0], 1.0);
    for (int n = 1; n <= 5; ++n) EXPECT_EQ(z[n], 0.0);
    // j_n(-x) = (-1)^n j_n(x)
    const auto p = spherical_bessel_sequence(2.5, 6);
    const auto m = spherical_bessel_sequence(-2.5, 6);
    for (int n = 0; n <= 6; ++n) EXPECT_NEAR(m[n], (n % 2 ? -1.0 : 1.0) * p[n], 1e-16);
}

TEST(Moments, MatchQuadratureAndRecursion) {
    for (double w : {0.3, 2.0, 6.6, 19.0}) {
        const double theta = 0.4;
        const auto st = recursion_ibc(w, theta, 25);
        for (int k = 0; k <= 25; ++k) {
            const double re = quad([&](double x) { return std::cos(w * x) * legendre_eval(k, x).p; });
            const double im = quad([&](double x) { return std::sin(w * x) * legendre_eval(k, x).p; });
            EXPECT_NEAR(st.I[k].real(), re, 1e-13);
            EXPECT_NEAR(st.I[k].imag(), im, 1e-13);
            const std::complex<double> rot = std::polar(1.0, theta) * st.I[k];
            EXPECT_NEAR(st.B[k], rot.real(), 1e-14);
            EXPECT_NEAR(st.C[k], rot.imag(), 1e-14);
            if (k >= 2) {
                const std::complex<double> rec =
                    std::complex<double>(0.0, (2.0 * k - 1.0) / w) * st.I[k - 1] + st.I[k - 2];
                EXPECT_NEAR(std::abs(rec - st.I[k]), 0.0, 1e-12 * (1.0 + (2.0 * k) / w));
            }
        }
    }
    // I_1 = int x e^{iwx} dx = 2i (sin w - w cos w) / w^2
    const double w = 1.7;
    const auto st = recursion_ibc(w, 0.0, 1);
    EXPECT_NEAR(st.I[1].real(), 0.0, 1e-16);
    EXPECT_NEAR(st.I[1].imag(), 2.0 * (std::sin(w) - w * std::cos(w)) / (w * w), 1e-15);
}

TEST(ClosedForm, SineResidualsMatchQuadrature) {
    std::mt19937_64 rng(2024);
    const BoundaryData bc{-0.3, 0.8};
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = random_shallow(rng, 1 + trial % 8);
        for (int k = 1; k <= 8; ++k) {
            const double kp = k * M_PI;
            const auto u = [&](double x) { return s.eval(x)[0]; };
            const auto du = [&](double x) { return s.eval(x)[1]; };
            const double r12 = quad([&](double x) { return du(x) * kp * std::cos(kp * x); });
            EXPECT_NEAR(residual_sine_r12(s, k), r12, 1e-10);
            const double r1 = -quad([&](double x) { return s.eval(x)[2] * std::sin(kp * x); });
            EXPECT_NEAR(residual_sine_r12(s, k), r1, 1e-10);

            const double vp1 = kp * std::cos(kp), vm1 = kp * std::cos(-kp);
            const double r3 = quad([&](double x) { return u(x) * kp * kp * std::sin(kp * x); }) +
                              bc.h * vp1 - bc.g * vm1;
            EXPECT_NEAR(residual_sine_r3(s, k, bc), r3, 1e-10);

            const double nl = quad([&](double x) { return u(x) * du(x) * std::sin(kp * x); });
            EXPECT_NEAR(residual_burgers_nl(s, k), nl, 1e-10);

            const double pr = quad([&](double x) { return u(x) * std::sin(kp * x); });
            EXPECT_NEAR(residual_projection(s, k), pr, 1e-10);
        }
    }
}

TEST(ClosedForm, LegendreResidualsMatchQuadrature) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = random_shallow(rng, 1 + trial % 6, 20.0);
        const TestBasis basis{TestFamily::LegendreComposite, 30};
        for (int k = 1; k <= 30; ++k) {
            const auto v = [&](double x) { return test_fn(basis, k, x); };
            EXPECT_NEAR(residual_legendre_r1(s, k), -quad([&](double x) { return s.eval(x)[2] * v(x).v; }), 1e-9);
            EXPECT_NEAR(residual_legendre_r2(s, k), quad([&](double x) { return s.eval(x)[1] * v(x).dv; }), 1e-9);
            EXPECT_NEAR(residual_legendre_projection(s, k), quad([&](double x) { return s.eval(x)[0] * v(x).v; }),
                        1e-10);
        }
    }
}

TEST(ClosedForm, ResidualGradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(8);
    const BoundaryData bc{0.2, -0.5};
    for (int trial = 0; trial < 4; ++trial) {
        const auto s = random_shallow(rng, 3 + trial);
        for (int k : {1, 3, 6}) {
            expect_gradient(s, k, [](auto& n, int k) { return residual_sine_r12(n, k); },
                            [](auto& n, int k, double sd, auto& g) { return residual_sine_r12(n, k, sd, g); });
            expect_gradient(s, k, [&](auto& n, int k) { return residual_sine_r3(n, k, bc); },
                            [&](auto& n, int k, double sd, auto& g) { return residual_sine_r3(n, k, bc, sd, g); });
            expect_gradient(s, k, [](auto& n, int k) { return residual_burgers_nl(n, k); },
                            [](auto& n, int k, double sd, auto& g) { return residual_burgers_nl(n, k, sd, g); });
            expect_gradient(s, k, [](auto& n, int k) { return residual_projection(n, k); },
                            [](auto& n, int k, double sd, auto& g) { return residual_projection(n, k, sd, g); });
            expect_gradient(s, k, [](auto& n, int k) { return residual_legendre_r1(n, k); },
                            [](auto& n, int k, double sd, auto& g) { return residual_legendre_r1(n, k, sd, g); });
            expect_gradient(s, k, [](auto& n, int k) { return residual_legendre_r2(n, k); },
                            [](auto& n, int k, double sd, auto& g) { return residual_legendre_r2(n, k, sd, g); });
            expect_gradient(
                s, k, [](auto& n, int k) { return residual_legendre_projection(n, k); },
                [](auto& n, int k, double sd, auto& g) { return residual_legendre_projection(n, k, sd, g); });
        }
    }
}

TEST(ClosedForm, ResonantFrequencyIsReported) {
    ShallowNetParams s = ShallowNetParams::zeros(2);
    s.a << 1.0, 1.0;
    s.w << 1.3, 2.0 * M_PI + 1e-9;
    try {
        residual_sine_r12(s, 2);
        FAIL() << "expected SingularFrequency";
    } catch (const SingularFrequency& e) {
        EXPECT_EQ(e.neuron_i(), 1u);
        EXPECT_EQ(e.test_index(), 2);
    }
    EXPECT_NO_THROW(residual_sine_r12(s, 1));
    EXPECT_THROW(residual_projection(s, 2), SingularFrequency);
    // Burgers pairs resonate on w_i + w_j = k pi
    ShallowNetParams p = ShallowNetParams::zeros(2);
    p.a << 1.0, 1.0;
    p.w << 1.0, 3.0 * M_PI - 1.0;
    EXPECT_THROW(residual_burgers_nl(p, 3), SingularFrequency);
}

TEST(ClosedForm, ShallowAndDeepViewsAgree) {
    std::mt19937_64 rng(3);
    const auto s = random_shallow(rng, 4);
    const auto deep = s.to_deep();
    EXPECT_EQ(deep.flatten(), s.flatten());
    const auto back = ShallowNetParams::from_deep(deep);
    EXPECT_EQ(back.flatten(), s.flatten());
    const double xs[] = {0.31};
    const auto jet = eval_jet(deep, xs);
    const auto e = s.eval(0.31);
    EXPECT_NEAR(jet.u, e[0], 1e-15);
    EXPECT_NEAR(jet.grad[0], e[1], 1e-13);
    EXPECT_NEAR(jet.diag2[0], e[2], 1e-12);
    EXPECT_THROW(ShallowNetParams::from_deep(DeepNetParams::zeros(1, {3, 3}, Activation::Sine)), ConfigError);
    EXPECT_THROW(ShallowNetParams::from_deep(DeepNetParams::zeros(1, {3}, Activation::Tanh)), ConfigError);
}
