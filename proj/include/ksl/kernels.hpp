#pragma once

#include <cstddef>

namespace ksl::kernels {

// Grid kernels of the finite-volume stepper. Scalar reference implementations
// and an AVX2 variant share this table; the active backend is picked once at
// startup (KSL_SIMD=scalar|avx2 overrides the cpuid choice). Elementwise maps
// produce bit-identical results across backends; reductions may differ in the
// last bits through reassociation.
struct Ops {
    // chemotaxis face flux with upwinding by the sign of the face gradient:
    // F[0] = F[n] = 0, F[i] = chi * (s > 0 ? u[i-1] : u[i]) * s,
    // s = (v[i] - v[i-1]) * inv_h, for i = 1..n-1
    void (*chemotaxis_flux)(int n, const double* u, const double* v, double inv_h,
                            double chi, double* F);
    // rhs[i] = -(F[i+1] - F[i]) * inv_h + mu u[i] (ubar - u[i])
    void (*explicit_rhs)(int n, const double* u, const double* F, double inv_h,
                         double mu, double ubar, double* rhs);
    // out[i] = x[i] + a y[i]
    void (*axpy)(int n, const double* x, double a, const double* y, double* out);
    double (*min_val)(int n, const double* a);
    double (*max_val)(int n, const double* a);
    double (*max_abs_diff)(int n, const double* a, const double* b);
    double (*sum)(int n, const double* a);
    // sum of u (ubar - u), the discrete logistic production
    double (*sum_logistic)(int n, const double* u, double ubar);
    // max over interior faces of |v[i] - v[i-1]| * inv_h
    double (*max_face_speed)(int n, const double* v, double inv_h);
    // out[i] = (u[i-1] - 2 u[i] + u[i+1]) * inv_h2 with reflecting walls
    void (*laplacian)(int n, const double* u, double inv_h2, double* out);
};

const Ops& scalar_ops();
#ifdef KSL_BUILD_AVX2
const Ops& avx2_ops();
#endif

// runtime-selected backend and its name ("scalar" or "avx2")
const Ops& ops();
const char* backend_name();

}  // namespace ksl::kernels
