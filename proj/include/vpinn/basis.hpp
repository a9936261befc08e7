#pragma once

#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace vpinn {

/// Legendre polynomial P_k with its first two derivatives.
struct LegendreValue {
    double p = 0.0;
    double dp = 0.0;
    double d2p = 0.0;
};

/// Three-term recursion p_k = ((2k-1)/k) x p_{k-1} - ((k-1)/k) p_{k-2}, differentiated
/// term by term for the derivatives.
LegendreValue legendre_eval(int k, double x);

/// Fills out[0..n] with P_0..P_n at x in one pass of the recursion.
void legendre_sequence(double x, std::span<LegendreValue> out);

enum class TestFamily { Sine, LegendreComposite };

std::string_view to_string(TestFamily family);
TestFamily test_family_from_string(std::string_view name);

/// Largest admissible test index; beyond it the recursion is not trusted.
inline constexpr int kMaxTestIndex = 200;

/// Test-function family with K members v_1..v_K.
///   Sine:              v_k = sin(k pi x)
///   LegendreComposite: v_k = P_{k+1} - P_{k-1}, vanishing at x = +-1
struct TestBasis {
    TestFamily family = TestFamily::Sine;
    int count = 1;

    /// Throws ConfigError unless 1 <= count <= kMaxTestIndex.
    void validate() const;
};

/// Tensor-product basis v(x,y) = phi_kx(x) * phi_ky(y).
struct TestBasis2D {
    TestBasis x;
    TestBasis y;

    void validate() const;
    int size() const { return x.count * y.count; }
};

struct TestValue {
    double v = 0.0;
    double dv = 0.0;
    double d2v = 0.0;
};

struct TestValue2D {
    double v = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    double dxx = 0.0;
    double dyy = 0.0;
};

TestValue test_fn(const TestBasis& basis, int k, double x);

TestValue2D test_fn_2d(const TestBasis2D& basis, int kx, int ky, double x, double y);

/// All K test functions tabulated at a set of points; row k-1 holds v_k.
struct TestTable {
    Eigen::MatrixXd v;
    Eigen::MatrixXd dv;
    Eigen::MatrixXd d2v;
};

TestTable tabulate(const TestBasis& basis, std::span<const double> points);

}  // namespace vpinn
