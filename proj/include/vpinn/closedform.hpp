#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vpinn/diffprop.hpp"

namespace vpinn {

/// One-hidden-layer sine network u(x) = sum_j a_j sin(w_j x + theta_j).
struct ShallowNetParams {
    Eigen::VectorXd a;      // output weights
    Eigen::VectorXd w;      // frequencies
    Eigen::VectorXd theta;  // phases

    static ShallowNetParams zeros(int neurons);

    int size() const { return static_cast<int>(a.size()); }
    void validate() const;

    /// Flat order (w, theta, a), identical to flatten() of to_deep().
    Eigen::VectorXd flatten() const;
    void assign(std::span<const double> flat);

    DeepNetParams to_deep() const;
    static ShallowNetParams from_deep(const DeepNetParams& net);

    /// (u, u', u'') at x.
    std::array<double, 3> eval(double x) const;
};

/// Dirichlet data u(-1) = g, u(1) = h.
struct BoundaryData {
    double g = 0.0;
    double h = 0.0;
};

/// Denominators closer than this to zero raise SingularFrequency.
inline constexpr double kSingularityGuard = 1e-6;

// Sine test functions v_k = sin(k pi x). Every residual has an overload that also
// accumulates seed * d(residual)/d(a, w, theta) into grad (same shape as net).

/// (u', v_k') on [-1, 1]; equal to -(u'', v_k) for this basis.
double residual_sine_r12(const ShallowNetParams& net, int k);
double residual_sine_r12(const ShallowNetParams& net, int k, double seed, ShallowNetParams& grad);

/// -(u, v_k'') + [u v_k'] with the exact boundary values substituted.
double residual_sine_r3(const ShallowNetParams& net, int k, BoundaryData bc);
double residual_sine_r3(const ShallowNetParams& net, int k, BoundaryData bc, double seed,
                        ShallowNetParams& grad);

/// Burgers nonlinearity (u u', v_k).
double residual_burgers_nl(const ShallowNetParams& net, int k);
double residual_burgers_nl(const ShallowNetParams& net, int k, double seed, ShallowNetParams& grad);

/// Projection (u, v_k).
double residual_projection(const ShallowNetParams& net, int k);
double residual_projection(const ShallowNetParams& net, int k, double seed, ShallowNetParams& grad);

/// Moments I_k = int_{-1}^{1} e^{iwx} P_k(x) dx and their rotations by the phase:
/// B_k = Re{e^{i theta} I_k}, C_k = Im{e^{i theta} I_k}, for k = 0..k_max.
/// They satisfy I_k = i (2k-1)/w I_{k-1} + I_{k-2}; evaluation goes through
/// I_k = 2 i^k j_k(w) with the spherical Bessel functions computed stably.
struct RecursionState {
    std::vector<std::complex<double>> I;
    std::vector<double> B;
    std::vector<double> C;
};

RecursionState recursion_ibc(double w, double theta, int k_max);

/// Spherical Bessel j_0..j_nmax at x: forward recursion while n <= |x|, downward
/// continued-fraction ratios above that. Exact zeros for x == 0 and n > 0.
std::vector<double> spherical_bessel_sequence(double x, int nmax);

// Legendre-composite test functions v_k = P_{k+1} - P_{k-1}.

/// -(u'', v_k) = sum_j a_j w_j^2 (C_{k+1} - C_{k-1}).
double residual_legendre_r1(const ShallowNetParams& net, int k);
double residual_legendre_r1(const ShallowNetParams& net, int k, double seed,
                            ShallowNetParams& grad);

/// (u', v_k') = (2k+1) sum_j a_j w_j B_k.
double residual_legendre_r2(const ShallowNetParams& net, int k);
double residual_legendre_r2(const ShallowNetParams& net, int k, double seed,
                            ShallowNetParams& grad);

/// (u, v_k) = sum_j a_j (C_{k+1} - C_{k-1}).
double residual_legendre_projection(const ShallowNetParams& net, int k);
double residual_legendre_projection(const ShallowNetParams& net, int k, double seed,
                                    ShallowNetParams& grad);

}  // namespace vpinn
