#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace ksl {

// Brent's method on a sign-changing bracket.
template <typename F>
double brent(F&& f, double a, double b, double tol = 1e-14, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0)
        throw std::invalid_argument("brent: no sign change on [" +
                                    std::to_string(a) + "," + std::to_string(b) + "]");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) {
            c = a; fc = fa; d = b - a; e = d;
        }
    }
    return b;
}

// Newton iteration safeguarded by a sign-changing bracket; falls back to
// bisection whenever the Newton step leaves the bracket or stalls.
template <typename F, typename DF>
double newton_bracketed(F&& f, DF&& df, double a, double b, double tol = 1e-14,
                        int max_iter = 100) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0)
        throw std::invalid_argument("newton_bracketed: no sign change");
    double x = 0.5 * (a + b);
    for (int it = 0; it < max_iter; ++it) {
        double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0) == (fa > 0)) {
            a = x; fa = fx;
        } else {
            b = x; fb = fx;
        }
        double dfx = df(x);
        double step = (dfx != 0.0) ? fx / dfx : 0.0;
        double xn = x - step;
        if (!(xn > a && xn < b) || dfx == 0.0) xn = 0.5 * (a + b);
        if (std::abs(xn - x) < tol * (1.0 + std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

// Scan [lo,hi] in n steps for the first sign change of f. Returns false if
// none is found; used to locate brackets before polishing.
template <typename F>
bool find_bracket(F&& f, double lo, double hi, int n, double& a, double& b) {
    double x0 = lo, f0 = f(lo);
    for (int i = 1; i <= n; ++i) {
        const double x1 = lo + (hi - lo) * i / n;
        const double f1 = f(x1);
        if (f0 == 0.0 || f0 * f1 < 0.0) {
            a = x0; b = x1;
            return true;
        }
        x0 = x1;
        f0 = f1;
    }
    return false;
}

}  // namespace ksl
