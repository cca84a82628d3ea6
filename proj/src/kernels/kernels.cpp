#include "ksl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace ksl::kernels {

namespace {

void chemotaxis_flux_scalar(int n, const double* u, const double* v,
                            double inv_h, double chi, double* F) {
    F[0] = 0.0;
    F[n] = 0.0;
    for (int i = 1; i < n; ++i) {
        const double s = (v[i] - v[i - 1]) * inv_h;
        const double up = s > 0.0 ? u[i - 1] : u[i];
        F[i] = chi * up * s;
    }
}

void explicit_rhs_scalar(int n, const double* u, const double* F, double inv_h,
                         double mu, double ubar, double* rhs) {
    for (int i = 0; i < n; ++i)
        rhs[i] = -(F[i + 1] - F[i]) * inv_h + mu * u[i] * (ubar - u[i]);
}

void axpy_scalar(int n, const double* x, double a, const double* y, double* out) {
    for (int i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
}

double min_scalar(int n, const double* a) {
    double m = a[0];
    for (int i = 1; i < n; ++i) m = std::min(m, a[i]);
    return m;
}

double max_scalar(int n, const double* a) {
    double m = a[0];
    for (int i = 1; i < n; ++i) m = std::max(m, a[i]);
    return m;
}

double max_abs_diff_scalar(int n, const double* a, const double* b) {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double sum_scalar(int n, const double* a) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i];
    return s;
}

double sum_logistic_scalar(int n, const double* u, double ubar) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += u[i] * (ubar - u[i]);
    return s;
}

double max_face_speed_scalar(int n, const double* v, double inv_h) {
    double m = 0.0;
    for (int i = 1; i < n; ++i)
        m = std::max(m, std::abs(v[i] - v[i - 1]) * inv_h);
    return m;
}

void laplacian_scalar(int n, const double* u, double inv_h2, double* out) {
    out[0] = (u[1] - u[0]) * inv_h2;
    for (int i = 1; i + 1 < n; ++i)
        out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
    out[n - 1] = (u[n - 2] - u[n - 1]) * inv_h2;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops table{chemotaxis_flux_scalar, explicit_rhs_scalar,
                           axpy_scalar,            min_scalar,
                           max_scalar,             max_abs_diff_scalar,
                           sum_scalar,             sum_logistic_scalar,
                           max_face_speed_scalar,  laplacian_scalar};
    return table;
}

namespace {

struct Selection {
    const Ops* table;
    const char* name;
};

Selection select_backend() {
    const char* env = std::getenv("KSL_SIMD");
#ifdef KSL_BUILD_AVX2
    const bool have_avx2 = __builtin_cpu_supports("avx2");
    if (env != nullptr) {
        if (std::strcmp(env, "avx2") == 0 && have_avx2)
            return {&avx2_ops(), "avx2"};
        return {&scalar_ops(), "scalar"};
    }
    if (have_avx2) return {&avx2_ops(), "avx2"};
#else
    (void)env;
#endif
    return {&scalar_ops(), "scalar"};
}

const Selection& selection() {
    static const Selection s = select_backend();
    return s;
}

}  // namespace

const Ops& ops() { return *selection().table; }

const char* backend_name() { return selection().name; }

}  // namespace ksl::kernels
