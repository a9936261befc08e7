#include "vecmath.hpp"

#include <algorithm>

#if VPINN_USE_LIBMVEC
// Redeclared with the SIMD attribute so GCC emits calls to the libmvec variants
// (_ZGV*_sin etc.) without -ffast-math. Needs -fno-math-errno on this file.
extern "C" {
__attribute__((simd("notinbranch"))) double sin(double) noexcept;
__attribute__((simd("notinbranch"))) double cos(double) noexcept;
__attribute__((simd("notinbranch"))) double expm1(double) noexcept;
}
#define VPINN_SIN sin
#define VPINN_COS cos
#define VPINN_EXPM1 expm1
#else
#include <cmath>
#define VPINN_SIN std::sin
#define VPINN_COS std::cos
#define VPINN_EXPM1 std::expm1
#endif

namespace vpinn::detail {

namespace {

// Every element goes through the same fixed-size block, tail included. The vector
// and scalar kernels can differ in the last ulp, and a result that depends on the
// element's position breaks exact odd symmetry (sin(-a) == -sin(a)), which Adam
// then amplifies into a full-size step on parameters whose gradient should be 0.
constexpr std::size_t kBlock = 8;

struct SinOp {
    static double apply(double v) { return VPINN_SIN(v); }
};
struct CosOp {
    static double apply(double v) { return VPINN_COS(v); }
};
// tanh|x| = -m / (m + 2) with m = expm1(-2|x|); exact to a few ulp including near 0.
// |x| is clamped at 20 where tanh is 1 to double precision. NaN passes through.
struct TanhOp {
    static double apply(double v) {
        double ax = v < 0.0 ? -v : v;
        ax = ax < 20.0 ? ax : 20.0;
        if (v != v) ax = v;
        const double m = VPINN_EXPM1(-2.0 * ax);
        const double t = -m / (m + 2.0);
        return v < 0.0 ? -t : t;
    }
};

template <class Op>
__attribute__((noinline)) void block(const double* __restrict x, double* __restrict out) {
    for (std::size_t i = 0; i < kBlock; ++i) out[i] = Op::apply(x[i]);
}

template <class Op>
void run(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kBlock <= n; i += kBlock) block<Op>(x + i, out + i);
    if (i < n) {
        double in_buf[kBlock] = {};
        double out_buf[kBlock];
        std::copy(x + i, x + n, in_buf);
        block<Op>(in_buf, out_buf);
        std::copy(out_buf, out_buf + (n - i), out + i);
    }
}

}  // namespace

void sin_array(const double* x, double* out, std::size_t n) { run<SinOp>(x, out, n); }
void cos_array(const double* x, double* out, std::size_t n) { run<CosOp>(x, out, n); }
void tanh_array(const double* x, double* out, std::size_t n) { run<TanhOp>(x, out, n); }

}  // namespace vpinn::detail
