#include "ksl/specialfn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ksl/quadrature.hpp"

namespace ksl {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_nonpositive_integer(cplx z, double tol = 1e-12) {
    if (std::abs(z.imag()) > tol) return false;
    const double r = z.real();
    return r < 0.5 && std::abs(r - std::round(r)) < tol;
}

// Lanczos coefficients, g = 7.
constexpr double kLanczos[9] = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

}  // namespace

cplx gamma_fn(cplx z) {
    if (is_nonpositive_integer(z))
        throw std::domain_error("gamma_fn: pole at non-positive integer");
    if (z.real() < 0.5) {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return kPi / (std::sin(kPi * z) * gamma_fn(1.0 - z));
    }
    z -= 1.0;
    cplx x = kLanczos[0];
    for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + double(i));
    const cplx t = z + 7.5;
    return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

HypergeomSpec::HypergeomSpec(std::vector<cplx> up, std::vector<cplx> low, cplx arg)
    : upper(std::move(up)), lower(std::move(low)), z(arg) {
    for (const cplx& b : lower)
        if (is_nonpositive_integer(b))
            throw std::invalid_argument(
                "pfq: lower parameter equals a non-positive integer");
    if (std::abs(z) > 1.0 + 1e-14)
        throw std::invalid_argument("pfq: |z| <= 1 required");
    if (std::abs(z - 1.0) < 1e-14 && upper.size() == lower.size() + 1) {
        cplx s{0.0};
        for (const cplx& b : lower) s += b;
        for (const cplx& a : upper) s -= a;
        if (!(s.real() > 0.0))
            throw std::invalid_argument(
                "pfq: divergent at z=1, needs Re(sum lower - sum upper) > 0");
    }
}

namespace {

// Tail of the Hurwitz zeta function, sum_{n>=M} n^{-a}, via Euler-Maclaurin.
cplx zeta_tail(cplx a, double M) {
    const cplx Mma = std::exp(-a * std::log(M));  // M^{-a}
    cplx sum = Mma * M / (a - 1.0) + 0.5 * Mma;
    sum += (1.0 / 12.0) * a * Mma / M;
    sum -= (1.0 / 720.0) * a * (a + 1.0) * (a + 2.0) * Mma / (M * M * M);
    sum += (1.0 / 30240.0) * a * (a + 1.0) * (a + 2.0) * (a + 3.0) * (a + 4.0) *
           Mma / (M * M * M * M * M);
    return sum;
}

}  // namespace

PfqResult pfq(const HypergeomSpec& spec) {
    PfqResult res;
    cplx term{1.0, 0.0};
    cplx sum{0.0, 0.0};
    cplx comp{0.0, 0.0};  // Kahan compensation
    auto accumulate = [&](cplx t) {
        const cplx y = t - comp;
        const cplx u = sum + y;
        comp = (u - sum) - y;
        sum = u;
    };

    const bool at_unit = std::abs(spec.z - 1.0) < 1e-14;
    const long checkpoint_hi = spec.max_terms - 1;
    const long checkpoint_mid = spec.max_terms - 1 - spec.max_terms / 8;
    const long checkpoint_lo = spec.max_terms - 1 - spec.max_terms / 4;
    cplx t_lo{0.0}, t_mid{0.0}, t_hi{0.0};

    long n = 0;
    int small_streak = 0;
    for (; n < spec.max_terms; ++n) {
        accumulate(term);
        if (n == checkpoint_lo) t_lo = term;
        if (n == checkpoint_mid) t_mid = term;
        if (n == checkpoint_hi) t_hi = term;
        // next term
        cplx ratio{1.0, 0.0};
        for (const cplx& a : spec.upper) ratio *= (a + double(n));
        for (const cplx& b : spec.lower) ratio /= (b + double(n));
        ratio *= spec.z / double(n + 1);
        term *= ratio;
        if (term == cplx(0.0, 0.0)) {  // a terminating series
            res.value = sum;
            res.terms = n + 1;
            return res;
        }
        if (std::abs(term) <= spec.tol * std::abs(sum)) {
            if (++small_streak >= 3) {
                res.value = sum;
                res.terms = n + 1;
                return res;
            }
        } else {
            small_streak = 0;
        }
    }

    if (at_unit && spec.unit_tail && spec.upper.size() == spec.lower.size() + 1) {
        // Fit term_n ~ n^{-1-s} (C0 + C1/n + C2/n^2) at three checkpoints and
        // complete the sum with Hurwitz zeta tails.
        cplx s{0.0};
        for (const cplx& b : spec.lower) s += b;
        for (const cplx& a : spec.upper) s -= a;
        const double n1 = double(checkpoint_lo), n2 = double(checkpoint_mid),
                     n3 = double(checkpoint_hi);
        auto scaled = [&](cplx t, double nn) {
            return t * std::exp((1.0 + s) * std::log(nn));
        };
        const cplx u1 = scaled(t_lo, n1), u2 = scaled(t_mid, n2), u3 = scaled(t_hi, n3);
        // solve the 3x3 Vandermonde in powers of 1/n
        const double x1 = 1.0 / n1, x2 = 1.0 / n2, x3 = 1.0 / n3;
        const cplx c2 = ((u1 - u3) / (x1 - x3) - (u2 - u3) / (x2 - x3)) / (x1 - x2);
        const cplx c1 = (u1 - u3) / (x1 - x3) - c2 * (x1 + x3);
        const cplx c0 = u3 - c1 * x3 - c2 * x3 * x3;
        const double M = double(spec.max_terms);
        const cplx tail = c0 * zeta_tail(1.0 + s, M) + c1 * zeta_tail(2.0 + s, M) +
                          c2 * zeta_tail(3.0 + s, M);
        res.value = sum + tail;
        res.terms = n;
        res.tail_estimate = std::abs(tail);
        return res;
    }

    throw NonConvergence("pfq: term cap " + std::to_string(spec.max_terms) +
                         " reached at |z|=" + std::to_string(std::abs(spec.z)));
}

cplx pfq_value(std::vector<cplx> upper, std::vector<cplx> lower, cplx z,
               double tol, long max_terms) {
    HypergeomSpec spec(std::move(upper), std::move(lower), z);
    spec.tol = tol;
    spec.max_terms = max_terms;
    return pfq(spec).value;
}

cplx euler_integral_lift(const HypergeomSpec& inner, cplx a_extra, cplx b_extra,
                         double* err_estimate) {
    if (!(b_extra.real() > a_extra.real() && a_extra.real() > 0.0))
        throw std::invalid_argument(
            "euler_integral_lift: Re(b_extra) > Re(a_extra) > 0 required");
    const cplx alpha = a_extra - 1.0;           // t^alpha weight
    const cplx beta = b_extra - a_extra - 1.0;  // (1-t)^beta weight

    // Quadrature nodes can land at t = 1 - O(1e-6) where the inner series,
    // though geometric, decays on a ~1/(1-t) term scale; give it headroom.
    auto inner_at = [&](double t) {
        HypergeomSpec s = inner;
        s.z = inner.z * t;
        s.max_terms = std::max<long>(s.max_terms, 50000000);
        return pfq(s).value;
    };

    // Substitute t = w^2 on [0,1/2] and 1 - t = w^2 on [1/2,1] so the
    // endpoint weights stay integrable in w even for small exponents.
    auto left = [&](double w) -> cplx {
        const double t = w * w;
        return 2.0 * w * std::pow(cplx(t), alpha) * std::pow(cplx(1.0 - t), beta) *
               inner_at(t);
    };
    auto right = [&](double w) -> cplx {
        const double t = 1.0 - w * w;
        return 2.0 * w * std::pow(cplx(t), alpha) * std::pow(cplx(w * w), beta) *
               inner_at(t);
    };

    QuadResult d1, d2;
    const cplx i1 = integrate<cplx>(left, 0.0, std::sqrt(0.5), 1e-10, 1e-13, 3000, &d1);
    const cplx i2 = integrate<cplx>(right, 0.0, std::sqrt(0.5), 1e-10, 1e-13, 3000, &d2);
    if (err_estimate) *err_estimate = d1.err + d2.err;
    if (!d1.converged || !d2.converged)
        throw std::runtime_error("euler_integral_lift: quadrature residual " +
                                 std::to_string(d1.err + d2.err));
    const cplx pref =
        gamma_fn(b_extra) / (gamma_fn(a_extra) * gamma_fn(b_extra - a_extra));
    return pref * (i1 + i2);
}

}  // namespace ksl
