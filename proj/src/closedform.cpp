#include "vpinn/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "vpinn/basis.hpp"
#include "vpinn/errors.hpp"

namespace vpinn {

namespace {

constexpr double kPi = std::numbers::pi;

double parity(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

void check_k(int k) {
    if (k < 1 || k > kMaxTestIndex) {
        throw ConfigError(fmt::format("test index k={} outside [1, {}]", k, kMaxTestIndex));
    }
}

double guarded(double denominator, std::size_t i, std::size_t j, int k) {
    if (!(std::abs(denominator) > kSingularityGuard)) throw SingularFrequency(i, j, k, denominator);
    return denominator;
}

// sin(t + n pi/2), cos(t + n pi/2) without argument growth
double sin_quarter(double s, double c, int n) {
    switch (n & 3) {
        case 0: return s;
        case 1: return c;
        case 2: return -s;
        default: return -c;
    }
}
double cos_quarter(double s, double c, int n) {
    switch (n & 3) {
        case 0: return c;
        case 1: return -s;
        case 2: return -c;
        default: return s;
    }
}

// Shared kernel sum_j a_j m(w_j) cos(theta_j) sin(w_j) / (w_j^2 - k^2 pi^2) with
// m(w) = w^2 (stiffness) or 1 (mass).
double sine_kernel(const ShallowNetParams& net, int k, bool stiffness, double seed,
                   ShallowNetParams* grad) {
    check_k(k);
    const double kk = (k * kPi) * (k * kPi);
    double sum = 0.0;
    for (int j = 0; j < net.size(); ++j) {
        const double a = net.a[j], w = net.w[j];
        const double ct = std::cos(net.theta[j]), st = std::sin(net.theta[j]);
        const double sw = std::sin(w), cw = std::cos(w);
        const double D = guarded(w * w - kk, j, j, k);
        const double m = stiffness ? w * w : 1.0;
        const double dm = stiffness ? 2.0 * w : 0.0;
        const double phi = m * sw / D;
        sum += a * ct * phi;
        if (grad) {
            const double dphi = ((dm * sw + m * cw) * D - m * sw * 2.0 * w) / (D * D);
            grad->a[j] += seed * ct * phi;
            grad->w[j] += seed * a * ct * dphi;
            grad->theta[j] += seed * (-a * st * phi);
        }
    }
    return sum;
}

double r12_impl(const ShallowNetParams& net, int k, double seed, ShallowNetParams* grad) {
    const double pref = 2.0 * parity(k) * k * kPi;
    return pref * sine_kernel(net, k, true, seed * pref, grad);
}

double projection_impl(const ShallowNetParams& net, int k, double seed, ShallowNetParams* grad) {
    const double pref = 2.0 * parity(k) * k * kPi;
    return pref * sine_kernel(net, k, false, seed * pref, grad);
}

double r3_impl(const ShallowNetParams& net, int k, BoundaryData bc, double seed,
               ShallowNetParams* grad) {
    const double kk = (k * kPi) * (k * kPi);
    const double pref = 2.0 * parity(k) * k * kPi;
    return pref * 0.5 * (bc.h - bc.g) + kk * projection_impl(net, k, seed * kk, grad);
}

// g(s) = sin(s) / (s^2 - k^2 pi^2) and its derivative
struct PairTerm {
    double g, dg;
};

PairTerm pair_term(double s, double kk, std::size_t i, std::size_t j, int k) {
    const double D = guarded(s * s - kk, i, j, k);
    const double ss = std::sin(s), cs = std::cos(s);
    return {ss / D, (cs * D - 2.0 * s * ss) / (D * D)};
}

double burgers_impl(const ShallowNetParams& net, int k, double seed, ShallowNetParams* grad) {
    check_k(k);
    const double kk = (k * kPi) * (k * kPi);
    const double pref = parity(k) * k * kPi;
    const int N = net.size();
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            const double ai = net.a[i], aj = net.a[j], wi = net.w[i];
            const double tp = net.theta[j] + net.theta[i];
            const double tm = net.theta[j] - net.theta[i];
            const PairTerm plus = pair_term(net.w[j] + wi, kk, i, j, k);
            // diagonal: sin(0) = 0 against the finite denominator -k^2 pi^2
            const PairTerm minus = pair_term(net.w[j] - wi, kk, i, j, k);
            const double cp = std::cos(tp), cm = std::cos(tm);
            const double bracket = plus.g * cp + minus.g * cm;
            const double coeff = ai * aj * wi;
            sum += coeff * bracket;
            if (grad) {
                const double s = seed * pref;
                grad->a[i] += s * aj * wi * bracket;
                grad->a[j] += s * ai * wi * bracket;
                grad->w[i] += s * (ai * aj * bracket + coeff * (plus.dg * cp - minus.dg * cm));
                grad->w[j] += s * coeff * (plus.dg * cp + minus.dg * cm);
                const double sp = std::sin(tp), sm = std::sin(tm);
                grad->theta[i] += s * coeff * (-plus.g * sp + minus.g * sm);
                grad->theta[j] += s * coeff * (-plus.g * sp - minus.g * sm);
            }
        }
    }
    return pref * sum;
}

// Per-neuron quantities for the Legendre residuals: j_n and j_n' at w.
struct BesselTable {
    std::vector<double> j;
    std::vector<double> dj;
};

BesselTable bessel_with_derivative(double w, int nmax) {
    BesselTable t;
    t.j = spherical_bessel_sequence(w, nmax + 1);
    t.dj.resize(static_cast<std::size_t>(nmax) + 1);
    t.dj[0] = -t.j[1];
    for (int n = 1; n <= nmax; ++n) {
        t.dj[n] = (n * t.j[n - 1] - (n + 1) * t.j[n + 1]) / (2.0 * n + 1.0);
    }
    return t;
}

enum class LegendreKind { R1, R2, Projection };

double legendre_impl(const ShallowNetParams& net, int k, LegendreKind kind, double seed,
                     ShallowNetParams* grad) {
    check_k(k);
    double sum = 0.0;
    for (int j = 0; j < net.size(); ++j) {
        const double a = net.a[j], w = net.w[j];
        const double st = std::sin(net.theta[j]), ct = std::cos(net.theta[j]);
        const BesselTable bt = bessel_with_derivative(w, k + 1);
        // C_n = 2 j_n sin(theta + n pi/2), B_n = 2 j_n cos(theta + n pi/2)
        auto C = [&](int n) { return 2.0 * bt.j[n] * sin_quarter(st, ct, n); };
        auto B = [&](int n) { return 2.0 * bt.j[n] * cos_quarter(st, ct, n); };
        auto Cw = [&](int n) { return 2.0 * bt.dj[n] * sin_quarter(st, ct, n); };
        auto Bw = [&](int n) { return 2.0 * bt.dj[n] * cos_quarter(st, ct, n); };

        if (kind == LegendreKind::R2) {
            const double f = 2.0 * k + 1.0;
            sum += f * a * w * B(k);
            if (grad) {
                grad->a[j] += seed * f * w * B(k);
                grad->w[j] += seed * f * a * (B(k) + w * Bw(k));
                grad->theta[j] += seed * (-f * a * w * C(k));
            }
            continue;
        }
        const double dC = C(k + 1) - C(k - 1);
        const double dCw = Cw(k + 1) - Cw(k - 1);
        const double dB = B(k + 1) - B(k - 1);
        const double m = kind == LegendreKind::R1 ? w * w : 1.0;
        const double dm = kind == LegendreKind::R1 ? 2.0 * w : 0.0;
        sum += a * m * dC;
        if (grad) {
            grad->a[j] += seed * m * dC;
            grad->w[j] += seed * a * (dm * dC + m * dCw);
            grad->theta[j] += seed * a * m * dB;
        }
    }
    return sum;
}

}  // namespace

ShallowNetParams ShallowNetParams::zeros(int neurons) {
    if (neurons < 1) throw ConfigError(fmt::format("neuron count {} must be positive", neurons));
    return {Eigen::VectorXd::Zero(neurons), Eigen::VectorXd::Zero(neurons),
            Eigen::VectorXd::Zero(neurons)};
}

void ShallowNetParams::validate() const {
    if (a.size() < 1 || w.size() != a.size() || theta.size() != a.size()) {
        throw ConfigError(fmt::format("shallow net vectors have lengths a={}, w={}, theta={}",
                                      a.size(), w.size(), theta.size()));
    }
    require_finite(flatten(), "shallow network parameters");
}

Eigen::VectorXd ShallowNetParams::flatten() const {
    const Eigen::Index n = a.size();
    Eigen::VectorXd flat(3 * n);
    flat << w, theta, a;
    return flat;
}

void ShallowNetParams::assign(std::span<const double> flat) {
    const auto n = static_cast<std::size_t>(a.size());
    if (flat.size() != 3 * n) {
        throw ConfigError(
            fmt::format("parameter vector has {} entries, shallow net needs {}", flat.size(), 3 * n));
    }
    for (std::size_t j = 0; j < n; ++j) {
        w[static_cast<Eigen::Index>(j)] = flat[j];
        theta[static_cast<Eigen::Index>(j)] = flat[n + j];
        a[static_cast<Eigen::Index>(j)] = flat[2 * n + j];
    }
}

DeepNetParams ShallowNetParams::to_deep() const {
    DeepNetParams net = DeepNetParams::zeros(1, {size()}, Activation::Sine);
    net.weights[0].col(0) = w;
    net.biases[0] = theta;
    net.output = a;
    return net;
}

ShallowNetParams ShallowNetParams::from_deep(const DeepNetParams& net) {
    if (net.input_dim != 1 || net.depth() != 1 || net.activation != Activation::Sine) {
        throw ConfigError("only a 1D single-hidden-layer sine network has a shallow form");
    }
    return {net.output, net.weights[0].col(0), net.biases[0]};
}

std::array<double, 3> ShallowNetParams::eval(double x) const {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int j = 0; j < size(); ++j) {
        const double arg = w[j] * x + theta[j];
        const double s = std::sin(arg), c = std::cos(arg);
        out[0] += a[j] * s;
        out[1] += a[j] * w[j] * c;
        out[2] -= a[j] * w[j] * w[j] * s;
    }
    return out;
}

double residual_sine_r12(const ShallowNetParams& net, int k) { return r12_impl(net, k, 0.0, nullptr); }
double residual_sine_r12(const ShallowNetParams& net, int k, double seed, ShallowNetParams& grad) {
    return r12_impl(net, k, seed, &grad);
}

double residual_sine_r3(const ShallowNetParams& net, int k, BoundaryData bc) {
    return r3_impl(net, k, bc, 0.0, nullptr);
}
double residual_sine_r3(const ShallowNetParams& net, int k, BoundaryData bc, double seed,
                        ShallowNetParams& grad) {
    return r3_impl(net, k, bc, seed, &grad);
}

double residual_burgers_nl(const ShallowNetParams& net, int k) {
    return burgers_impl(net, k, 0.0, nullptr);
}
double residual_burgers_nl(const ShallowNetParams& net, int k, double seed, ShallowNetParams& grad) {
    return burgers_impl(net, k, seed, &grad);
}

double residual_projection(const ShallowNetParams& net, int k) {
    return projection_impl(net, k, 0.0, nullptr);
}
double residual_projection(const ShallowNetParams& net, int k, double seed, ShallowNetParams& grad) {
    return projection_impl(net, k, seed, &grad);
}

std::vector<double> spherical_bessel_sequence(double x, int nmax) {
    if (nmax < 0) throw ConfigError("spherical_bessel_sequence: negative order");
    std::vector<double> j(static_cast<std::size_t>(nmax) + 1, 0.0);
    if (x == 0.0) {
        j[0] = 1.0;
        return j;
    }
    const double ax = std::abs(x);
    const int m = std::min(nmax, static_cast<int>(std::floor(ax)));
    j[0] = std::sin(x) / x;
    if (m >= 1) j[1] = std::sin(x) / (x * x) - std::cos(x) / x;
    for (int n = 2; n <= m; ++n) j[n] = (2.0 * n - 1.0) / x * j[n - 1] - j[n - 2];
    if (nmax > m) {
        // r_n = j_n / j_{n-1} = x / (2n + 1 - x r_{n+1}), started well above nmax
        const int start = nmax + 30 + static_cast<int>(ax);
        std::vector<double> ratio(static_cast<std::size_t>(nmax) + 1, 0.0);
        double r = 0.0;
        for (int n = start; n > m; --n) {
            r = x / (2.0 * n + 1.0 - x * r);
            if (n <= nmax) ratio[n] = r;
        }
        for (int n = m + 1; n <= nmax; ++n) j[n] = j[n - 1] * ratio[n];
    }
    return j;
}

RecursionState recursion_ibc(double w, double theta, int k_max) {
    if (k_max < 0 || k_max > kMaxTestIndex + 1) {
        throw ConfigError(fmt::format("recursion order {} outside [0, {}]", k_max, kMaxTestIndex + 1));
    }
    const std::vector<double> j = spherical_bessel_sequence(w, k_max);
    RecursionState st;
    const double s = std::sin(theta), c = std::cos(theta);
    static constexpr std::complex<double> kI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int n = 0; n <= k_max; ++n) {
        st.I.push_back(2.0 * j[n] * kI[n & 3]);
        st.B.push_back(2.0 * j[n] * cos_quarter(s, c, n));
        st.C.push_back(2.0 * j[n] * sin_quarter(s, c, n));
    }
    return st;
}

double residual_legendre_r1(const ShallowNetParams& net, int k) {
    return legendre_impl(net, k, LegendreKind::R1, 0.0, nullptr);
}
double residual_legendre_r1(const ShallowNetParams& net, int k, double seed,
                            ShallowNetParams& grad) {
    return legendre_impl(net, k, LegendreKind::R1, seed, &grad);
}
double residual_legendre_r2(const ShallowNetParams& net, int k) {
    return legendre_impl(net, k, LegendreKind::R2, 0.0, nullptr);
}
double residual_legendre_r2(const ShallowNetParams& net, int k, double seed,
                            ShallowNetParams& grad) {
    return legendre_impl(net, k, LegendreKind::R2, seed, &grad);
}
double residual_legendre_projection(const ShallowNetParams& net, int k) {
    return legendre_impl(net, k, LegendreKind::Projection, 0.0, nullptr);
}
double residual_legendre_projection(const ShallowNetParams& net, int k, double seed,
                                    ShallowNetParams& grad) {
    return legendre_impl(net, k, LegendreKind::Projection, seed, &grad);
}

}  // namespace vpinn
