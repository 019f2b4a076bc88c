#include <atomic>
#include <cstdlib>
#include <cstring>

#include "tbg/kernels.hpp"

namespace tbg::kernels {

namespace {

Isa detect() {
    const bool hw = avx2_available();
    if (const char* env = std::getenv("TBG_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
        if (std::strcmp(env, "avx2") == 0 && hw) return Isa::Avx2;
    }
    return hw ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& selected() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

bool avx2_available() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

Isa force_isa(Isa isa) {
    if (isa == Isa::Avx2 && !avx2_available()) isa = Isa::Scalar;
    return selected().exchange(isa);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void kinetic_diag(const double* mx, const double* my, std::size_t n, double kx, double ky,
                  const double* D, double* out) {
    if (active_isa() == Isa::Avx2)
        avx2::kinetic_diag(mx, my, n, kx, ky, D, out);
    else
        scalar::kinetic_diag(mx, my, n, kx, ky, D, out);
}

cplx cdot(const cplx* x, const cplx* y, std::size_t n) {
    return active_isa() == Isa::Avx2 ? avx2::cdot(x, y, n) : scalar::cdot(x, y, n);
}

cplx cdot_weighted(const cplx* x, const double* w, const cplx* y, std::size_t n) {
    return active_isa() == Isa::Avx2 ? avx2::cdot_weighted(x, w, y, n)
                                     : scalar::cdot_weighted(x, w, y, n);
}

void matvec(const cplx* A, std::size_t n, const cplx* x, cplx* y) {
    if (active_isa() == Isa::Avx2)
        avx2::matvec(A, n, x, y);
    else
        scalar::matvec(A, n, x, y);
}

void lattice_residual(const double* qx, const double* qy, std::size_t n, const double* L,
                      const double* Linv, double* out) {
    if (active_isa() == Isa::Avx2)
        avx2::lattice_residual(qx, qy, n, L, Linv, out);
    else
        scalar::lattice_residual(qx, qy, n, L, Linv, out);
}

}  // namespace tbg::kernels
