#include <immintrin.h>

#include <cmath>

#include "tbg/kernels.hpp"

#define TBG_AVX2 __attribute__((target("avx2,fma")))

namespace tbg::kernels::avx2 {

namespace {

TBG_AVX2 inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// lanes (re0, im0, re1, im1) -> sum of re lanes, sum of im lanes
TBG_AVX2 inline void hsum_pairs(__m256d v, double& even, double& odd) {
    __m128d s = _mm_add_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
    even = _mm_cvtsd_f64(s);
    odd = _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

}  // namespace

TBG_AVX2 void kinetic_diag(const double* mx, const double* my, std::size_t n, double kx,
                           double ky, const double* D, double* out) {
    const __m256d d0 = _mm256_set1_pd(D[0]), d1 = _mm256_set1_pd(D[1]);
    const __m256d d2 = _mm256_set1_pd(D[2]), d3 = _mm256_set1_pd(D[3]);
    const __m256d vkx = _mm256_set1_pd(kx), vky = _mm256_set1_pd(ky);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(mx + i);
        const __m256d y = _mm256_loadu_pd(my + i);
        __m256d gx = _mm256_fmadd_pd(d0, x, vkx);
        gx = _mm256_fmadd_pd(d2, y, gx);
        __m256d gy = _mm256_fmadd_pd(d1, x, vky);
        gy = _mm256_fmadd_pd(d3, y, gy);
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(gx, gx, _mm256_mul_pd(gy, gy)));
    }
    scalar::kinetic_diag(mx + i, my + i, n - i, kx, ky, D, out + i);
}

TBG_AVX2 cplx cdot(const cplx* x, const cplx* y, std::size_t n) {
    const double* px = reinterpret_cast<const double*>(x);
    const double* py = reinterpret_cast<const double*>(y);
    __m256d acc_re = _mm256_setzero_pd();  // xr*yr, xi*yi
    __m256d acc_im = _mm256_setzero_pd();  // xr*yi, xi*yr
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d a = _mm256_loadu_pd(px + 2 * i);
        const __m256d b = _mm256_loadu_pd(py + 2 * i);
        acc_re = _mm256_fmadd_pd(a, b, acc_re);
        acc_im = _mm256_fmadd_pd(a, _mm256_permute_pd(b, 0b0101), acc_im);
    }
    double re = hsum(acc_re);
    double im_even, im_odd;
    hsum_pairs(acc_im, im_even, im_odd);
    cplx tail = scalar::cdot(x + i, y + i, n - i);
    return {re + tail.real(), im_even - im_odd + tail.imag()};
}

TBG_AVX2 cplx cdot_weighted(const cplx* x, const double* w, const cplx* y, std::size_t n) {
    const double* px = reinterpret_cast<const double*>(x);
    const double* py = reinterpret_cast<const double*>(y);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        // (w0, w0, w1, w1)
        const __m256d ww = _mm256_set_pd(w[i + 1], w[i + 1], w[i], w[i]);
        const __m256d a = _mm256_mul_pd(_mm256_loadu_pd(px + 2 * i), ww);
        const __m256d b = _mm256_loadu_pd(py + 2 * i);
        acc_re = _mm256_fmadd_pd(a, b, acc_re);
        acc_im = _mm256_fmadd_pd(a, _mm256_permute_pd(b, 0b0101), acc_im);
    }
    double re = hsum(acc_re);
    double im_even, im_odd;
    hsum_pairs(acc_im, im_even, im_odd);
    cplx tail = scalar::cdot_weighted(x + i, w + i, y + i, n - i);
    return {re + tail.real(), im_even - im_odd + tail.imag()};
}

TBG_AVX2 void matvec(const cplx* A, std::size_t n, const cplx* x, cplx* y) {
    double* py = reinterpret_cast<double*>(y);
    for (std::size_t i = 0; i < n; ++i) y[i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double* col = reinterpret_cast<const double*>(A + j * n);
        const __m256d xr = _mm256_set1_pd(x[j].real());
        const __m256d xi = _mm256_set1_pd(x[j].imag());
        std::size_t i = 0;
        for (; i + 2 <= n; i += 2) {
            const __m256d a = _mm256_loadu_pd(col + 2 * i);
            // (ai*xi, ar*xi) then fmaddsub gives (ar*xr - ai*xi, ai*xr + ar*xi)
            const __m256d t = _mm256_mul_pd(_mm256_permute_pd(a, 0b0101), xi);
            const __m256d prod = _mm256_fmaddsub_pd(a, xr, t);
            _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), prod));
        }
        for (; i < n; ++i) y[i] += A[j * n + i] * x[j];
    }
}

TBG_AVX2 void lattice_residual(const double* qx, const double* qy, std::size_t n,
                               const double* L, const double* Linv, double* out) {
    const __m256d l0 = _mm256_set1_pd(L[0]), l1 = _mm256_set1_pd(L[1]);
    const __m256d l2 = _mm256_set1_pd(L[2]), l3 = _mm256_set1_pd(L[3]);
    const __m256d i0 = _mm256_set1_pd(Linv[0]), i1 = _mm256_set1_pd(Linv[1]);
    const __m256d i2 = _mm256_set1_pd(Linv[2]), i3 = _mm256_set1_pd(Linv[3]);
    constexpr int rnd = _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(qx + i);
        const __m256d y = _mm256_loadu_pd(qy + i);
        const __m256d c0 = _mm256_round_pd(_mm256_fmadd_pd(i2, y, _mm256_mul_pd(i0, x)), rnd);
        const __m256d c1 = _mm256_round_pd(_mm256_fmadd_pd(i3, y, _mm256_mul_pd(i1, x)), rnd);
        const __m256d dx = _mm256_sub_pd(x, _mm256_fmadd_pd(l2, c1, _mm256_mul_pd(l0, c0)));
        const __m256d dy = _mm256_sub_pd(y, _mm256_fmadd_pd(l3, c1, _mm256_mul_pd(l1, c0)));
        _mm256_storeu_pd(out + i, _mm256_sqrt_pd(_mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy))));
    }
    scalar::lattice_residual(qx + i, qy + i, n - i, L, Linv, out + i);
}

}  // namespace tbg::kernels::avx2
