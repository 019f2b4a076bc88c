#pragma once

#include <complex>
#include <cstddef>

// Inner loops with a scalar reference and an AVX2+FMA variant. The variant is
// picked once per process from cpuid; TBG_SIMD=scalar|avx2 overrides.
// 2x2 matrices are passed column-major (Eigen layout).

namespace tbg::kernels {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2 };

Isa active_isa();
const char* isa_name(Isa isa);
bool avx2_available();
// for tests; returns the previous selection
Isa force_isa(Isa isa);

// out[i] = |k + D (mx[i], my[i])|^2
void kinetic_diag(const double* mx, const double* my, std::size_t n, double kx, double ky,
                  const double* D, double* out);

// sum conj(x[i]) * y[i]
cplx cdot(const cplx* x, const cplx* y, std::size_t n);

// sum conj(x[i]) * w[i] * y[i]
cplx cdot_weighted(const cplx* x, const double* w, const cplx* y, std::size_t n);

// y = A x, A column-major n x n
void matvec(const cplx* A, std::size_t n, const cplx* x, cplx* y);

// out[i] = |q - L round(Linv q)|
void lattice_residual(const double* qx, const double* qy, std::size_t n, const double* L,
                      const double* Linv, double* out);

namespace scalar {
void kinetic_diag(const double* mx, const double* my, std::size_t n, double kx, double ky,
                  const double* D, double* out);
cplx cdot(const cplx* x, const cplx* y, std::size_t n);
cplx cdot_weighted(const cplx* x, const double* w, const cplx* y, std::size_t n);
void matvec(const cplx* A, std::size_t n, const cplx* x, cplx* y);
void lattice_residual(const double* qx, const double* qy, std::size_t n, const double* L,
                      const double* Linv, double* out);
}  // namespace scalar

namespace avx2 {
void kinetic_diag(const double* mx, const double* my, std::size_t n, double kx, double ky,
                  const double* D, double* out);
cplx cdot(const cplx* x, const cplx* y, std::size_t n);
cplx cdot_weighted(const cplx* x, const double* w, const cplx* y, std::size_t n);
void matvec(const cplx* A, std::size_t n, const cplx* x, cplx* y);
void lattice_residual(const double* qx, const double* qy, std::size_t n, const double* L,
                      const double* Linv, double* out);
}  // namespace avx2

}  // namespace tbg::kernels
