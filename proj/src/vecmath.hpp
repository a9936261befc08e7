#pragma once

#include <cstddef>

// Elementwise transcendental kernels over contiguous arrays. With VPINN_USE_LIBMVEC the
// loops vectorize through glibc's SIMD math variants; otherwise they call <cmath>.
namespace vpinn::detail {

void sin_array(const double* x, double* out, std::size_t n);
void cos_array(const double* x, double* out, std::size_t n);
void tanh_array(const double* x, double* out, std::size_t n);

}  // namespace vpinn::detail
