#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "ksl/kernels.hpp"

// AVX2 variants of the grid kernels. Built only in this translation unit so
// the rest of the library carries no AVX2 code paths; selection is at runtime.

namespace ksl::kernels {

namespace {

void chemotaxis_flux_avx2(int n, const double* u, const double* v, double inv_h,
                          double chi, double* F) {
    F[0] = 0.0;
    F[n] = 0.0;
    const __m256d vih = _mm256_set1_pd(inv_h);
    const __m256d vchi = _mm256_set1_pd(chi);
    const __m256d zero = _mm256_setzero_pd();
    int i = 1;
    for (; i + 3 < n; i += 4) {
        const __m256d vr = _mm256_loadu_pd(v + i);
        const __m256d vl = _mm256_loadu_pd(v + i - 1);
        const __m256d s = _mm256_mul_pd(_mm256_sub_pd(vr, vl), vih);
        const __m256d ul = _mm256_loadu_pd(u + i - 1);
        const __m256d ur = _mm256_loadu_pd(u + i);
        const __m256d mask = _mm256_cmp_pd(s, zero, _CMP_GT_OQ);
        const __m256d up = _mm256_blendv_pd(ur, ul, mask);
        _mm256_storeu_pd(F + i, _mm256_mul_pd(_mm256_mul_pd(vchi, up), s));
    }
    for (; i < n; ++i) {
        const double s = (v[i] - v[i - 1]) * inv_h;
        F[i] = chi * (s > 0.0 ? u[i - 1] : u[i]) * s;
    }
}

void explicit_rhs_avx2(int n, const double* u, const double* F, double inv_h,
                       double mu, double ubar, double* rhs) {
    const __m256d vih = _mm256_set1_pd(inv_h);
    const __m256d vmu = _mm256_set1_pd(mu);
    const __m256d vub = _mm256_set1_pd(ubar);
    int i = 0;
    for (; i + 3 < n; i += 4) {
        const __m256d fr = _mm256_loadu_pd(F + i + 1);
        const __m256d fl = _mm256_loadu_pd(F + i);
        const __m256d div = _mm256_mul_pd(_mm256_sub_pd(fr, fl), vih);
        const __m256d ui = _mm256_loadu_pd(u + i);
        const __m256d logi =
            _mm256_mul_pd(_mm256_mul_pd(vmu, ui), _mm256_sub_pd(vub, ui));
        _mm256_storeu_pd(rhs + i, _mm256_sub_pd(logi, div));
    }
    for (; i < n; ++i)
        rhs[i] = -(F[i + 1] - F[i]) * inv_h + mu * u[i] * (ubar - u[i]);
}

void axpy_avx2(int n, const double* x, double a, const double* y, double* out) {
    const __m256d va = _mm256_set1_pd(a);
    int i = 0;
    for (; i + 3 < n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d yv = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(out + i, _mm256_add_pd(xv, _mm256_mul_pd(va, yv)));
    }
    for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

double hmin(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_min_pd(lo, hi);
    return std::min(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

double hmax(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return std::max(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

double min_avx2(int n, const double* a) {
    int i = 0;
    double m = a[0];
    if (n >= 4) {
        __m256d acc = _mm256_loadu_pd(a);
        for (i = 4; i + 3 < n; i += 4)
            acc = _mm256_min_pd(acc, _mm256_loadu_pd(a + i));
        m = hmin(acc);
    }
    for (; i < n; ++i) m = std::min(m, a[i]);
    return m;
}

double max_avx2(int n, const double* a) {
    int i = 0;
    double m = a[0];
    if (n >= 4) {
        __m256d acc = _mm256_loadu_pd(a);
        for (i = 4; i + 3 < n; i += 4)
            acc = _mm256_max_pd(acc, _mm256_loadu_pd(a + i));
        m = hmax(acc);
    }
    for (; i < n; ++i) m = std::max(m, a[i]);
    return m;
}

double max_abs_diff_avx2(int n, const double* a, const double* b) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i + 3 < n; i += 4) {
        const __m256d d =
            _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_max_pd(acc, _mm256_andnot_pd(signmask, d));
    }
    double m = (i > 0) ? hmax(acc) : 0.0;
    for (; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double sum_avx2(int n, const double* a) {
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i + 3 < n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = (i > 0) ? hsum(acc) : 0.0;
    for (; i < n; ++i) s += a[i];
    return s;
}

double sum_logistic_avx2(int n, const double* u, double ubar) {
    const __m256d vub = _mm256_set1_pd(ubar);
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i + 3 < n; i += 4) {
        const __m256d ui = _mm256_loadu_pd(u + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(ui, _mm256_sub_pd(vub, ui)));
    }
    double s = (i > 0) ? hsum(acc) : 0.0;
    for (; i < n; ++i) s += u[i] * (ubar - u[i]);
    return s;
}

double max_face_speed_avx2(int n, const double* v, double inv_h) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    const __m256d vih = _mm256_set1_pd(inv_h);
    __m256d acc = _mm256_setzero_pd();
    int i = 1;
    for (; i + 3 < n; i += 4) {
        const __m256d d =
            _mm256_sub_pd(_mm256_loadu_pd(v + i), _mm256_loadu_pd(v + i - 1));
        acc = _mm256_max_pd(acc, _mm256_andnot_pd(signmask, _mm256_mul_pd(d, vih)));
    }
    double m = (i > 1) ? hmax(acc) : 0.0;
    for (; i < n; ++i) m = std::max(m, std::abs(v[i] - v[i - 1]) * inv_h);
    return m;
}

void laplacian_avx2(int n, const double* u, double inv_h2, double* out) {
    out[0] = (u[1] - u[0]) * inv_h2;
    const __m256d vih = _mm256_set1_pd(inv_h2);
    const __m256d two = _mm256_set1_pd(2.0);
    int i = 1;
    for (; i + 4 < n; i += 4) {
        const __m256d um = _mm256_loadu_pd(u + i - 1);
        const __m256d uc = _mm256_loadu_pd(u + i);
        const __m256d up = _mm256_loadu_pd(u + i + 1);
        const __m256d lap =
            _mm256_sub_pd(_mm256_add_pd(um, up), _mm256_mul_pd(two, uc));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(lap, vih));
    }
    for (; i + 1 < n; ++i)
        out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
    out[n - 1] = (u[n - 2] - u[n - 1]) * inv_h2;
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops table{chemotaxis_flux_avx2, explicit_rhs_avx2,
                           axpy_avx2,            min_avx2,
                           max_avx2,             max_abs_diff_avx2,
                           sum_avx2,             sum_logistic_avx2,
                           max_face_speed_avx2,  laplacian_avx2};
    return table;
}

}  // namespace ksl::kernels
