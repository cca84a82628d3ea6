#pragma once

#include <cmath>
#include <complex>
#include <queue>
#include <stdexcept>
#include <vector>

namespace ksl {

// Adaptive Gauss-Kronrod 15(7) on a finite interval. Works for double and
// std::complex<double> integrands; the error estimate uses the 15-point vs
// 7-point difference and intervals are refined worst-first.

namespace gk {

inline constexpr double xk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0};

inline constexpr double wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

}  // namespace gk

template <typename T, typename F>
void gk15(F&& f, double a, double b, T& integral, double& err) {
    const double c = 0.5 * (a + b);
    const double hl = 0.5 * (b - a);
    T fc = f(c);
    T resk = gk::wk[7] * fc;
    T resg = gk::wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = hl * gk::xk[i];
        T fsum = f(c - dx) + f(c + dx);
        resk += gk::wk[i] * fsum;
        if (i % 2 == 1) resg += gk::wg[i / 2] * fsum;
    }
    integral = resk * hl;
    err = std::abs((resk - resg) * hl);
}

struct QuadResult {
    double err = 0.0;
    int intervals = 0;
    bool converged = false;
};

template <typename T, typename F>
T integrate(F&& f, double a, double b, double rel_tol = 1e-12,
            double abs_tol = 1e-300, int max_intervals = 4000,
            QuadResult* diag = nullptr) {
    struct Seg {
        double a, b, err;
        T val;
        bool operator<(const Seg& o) const { return err < o.err; }
    };
    std::priority_queue<Seg> heap;
    T total;
    double toterr;
    gk15(f, a, b, total, toterr);
    heap.push({a, b, toterr, total});
    int n = 1;
    while (toterr > std::max(abs_tol, rel_tol * std::abs(total)) &&
           n < max_intervals) {
        Seg s = heap.top();
        heap.pop();
        const double m = 0.5 * (s.a + s.b);
        T v1, v2;
        double e1, e2;
        gk15(f, s.a, m, v1, e1);
        gk15(f, m, s.b, v2, e2);
        total += (v1 + v2) - s.val;
        toterr += (e1 + e2) - s.err;
        heap.push({s.a, m, e1, v1});
        heap.push({m, s.b, e2, v2});
        ++n;
    }
    if (diag) {
        diag->err = toterr;
        diag->intervals = n;
        diag->converged = toterr <= std::max(abs_tol, rel_tol * std::abs(total));
    }
    return total;
}

// Throwing variant for callers that treat quadrature failure as an error.
template <typename T, typename F>
T integrate_checked(F&& f, double a, double b, double rel_tol = 1e-12,
                    double abs_tol = 1e-300, int max_intervals = 4000) {
    QuadResult diag;
    T v = integrate<T>(f, a, b, rel_tol, abs_tol, max_intervals, &diag);
    if (!diag.converged)
        throw std::runtime_error("quadrature failed: residual estimate " +
                                 std::to_string(diag.err));
    return v;
}

}  // namespace ksl
