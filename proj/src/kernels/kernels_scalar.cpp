#include <cmath>

#include "tbg/kernels.hpp"

namespace tbg::kernels::scalar {

void kinetic_diag(const double* mx, const double* my, std::size_t n, double kx, double ky,
                  const double* D, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double gx = kx + D[0] * mx[i] + D[2] * my[i];
        const double gy = ky + D[1] * mx[i] + D[3] * my[i];
        out[i] = gx * gx + gy * gy;
    }
}

cplx cdot(const cplx* x, const cplx* y, std::size_t n) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

cplx cdot_weighted(const cplx* x, const double* w, const cplx* y, std::size_t n) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
        re += w[i] * (x[i].real() * y[i].real() + x[i].imag() * y[i].imag());
        im += w[i] * (x[i].real() * y[i].imag() - x[i].imag() * y[i].real());
    }
    return {re, im};
}

void matvec(const cplx* A, std::size_t n, const cplx* x, cplx* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const cplx xj = x[j];
        const cplx* col = A + j * n;
        for (std::size_t i = 0; i < n; ++i) y[i] += col[i] * xj;
    }
}

void lattice_residual(const double* qx, const double* qy, std::size_t n, const double* L,
                      const double* Linv, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double c0 = std::nearbyint(Linv[0] * qx[i] + Linv[2] * qy[i]);
        const double c1 = std::nearbyint(Linv[1] * qx[i] + Linv[3] * qy[i]);
        const double dx = qx[i] - (L[0] * c0 + L[2] * c1);
        const double dy = qy[i] - (L[1] * c0 + L[3] * c1);
        out[i] = std::sqrt(dx * dx + dy * dy);
    }
}

}  // namespace tbg::kernels::scalar
