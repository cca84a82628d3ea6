#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace ksl {

using cplx = std::complex<double>;

// Gamma function for complex arguments (Lanczos approximation, reflection for
// Re z < 1/2). Accurate to ~1e-13 relative on the strip used here. Throws
// std::domain_error at the poles z = 0, -1, -2, ...
cplx gamma_fn(cplx z);

// Raised when a series hits its term cap without meeting the tolerance; kept
// distinct from std::invalid_argument so callers can tell a convergence
// failure from a parameter-domain violation.
struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Generalized hypergeometric series pFq(upper; lower; z) for |z| <= 1.
struct HypergeomSpec {
    std::vector<cplx> upper;
    std::vector<cplx> lower;
    cplx z{1.0, 0.0};
    double tol = 1e-14;       // relative term cutoff
    long max_terms = 200000;  // cap before tail completion / failure
    // At z == 1 the terms decay only algebraically (like n^{-1-s} with
    // s = sum(lower) - sum(upper)); when enabled, the partial sum is
    // completed with a fitted algebraic tail instead of requiring an
    // impractically large cap.
    bool unit_tail = true;

    HypergeomSpec(std::vector<cplx> up, std::vector<cplx> low, cplx arg);
};

struct PfqResult {
    cplx value{0.0};
    long terms = 0;              // number of summed terms
    double tail_estimate = 0.0;  // magnitude of any appended tail
};

PfqResult pfq(const HypergeomSpec& spec);

// Convenience wrapper returning only the value.
cplx pfq_value(std::vector<cplx> upper, std::vector<cplx> lower, cplx z,
               double tol = 1e-14, long max_terms = 200000);

// Evaluates (p+1)F(q+1) with the extra parameter pair (a_extra upper,
// b_extra lower) through the Gamma-weighted integral of the inner pFq.
// Independent of the series route; used as its oracle. Requires
// Re(b_extra) > Re(a_extra) > 0.
cplx euler_integral_lift(const HypergeomSpec& inner, cplx a_extra, cplx b_extra,
                         double* err_estimate = nullptr);

}  // namespace ksl
