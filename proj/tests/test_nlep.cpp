#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "ksl/equilibria.hpp"
#include "ksl/nlep.hpp"
#include "ksl/roots.hpp"

using namespace ksl;
using namespace std::complex_literals;

namespace {
ModelParams sweep_params(int N = 1) {
    ModelParams p;
    p.d1 = 1.0;
    p.chi = 1.0;
    p.d2 = 0.0004;
    p.mu = 1.0;
    p.ubar = 2.0;
    p.N = N;
    return p;
}
}  // namespace

TEST_CASE("competition thresholds reproduce the published values") {
    auto p = sweep_params();
    const double d1c2 = competition_threshold(p, 2);
    const double d1c3 = competition_threshold(p, 3);
    const double d1c4 = competition_threshold(p, 4);
    CHECK(std::abs(d1c2 - 2.36) / 2.36 < 0.05);
    CHECK(std::abs(d1c3 - 0.74) / 0.74 < 0.05);
    CHECK(std::abs(d1c4 - 0.39) / 0.39 < 0.05);
    // frozen values of this implementation
    CHECK(d1c2 == doctest::Approx(2.36897).epsilon(1e-4));
    CHECK(d1c3 == doctest::Approx(0.74091).epsilon(1e-4));
    CHECK(d1c4 == doctest::Approx(0.39098).epsilon(1e-4));

    const double s2 = competition_threshold_jacobian(p, 2);
    const double s3 = competition_threshold_jacobian(p, 3);
    const double s4 = competition_threshold_jacobian(p, 4);
    CHECK(std::abs(s2 - 2.91) / 2.91 < 0.05);
    CHECK(std::abs(s3 - 0.97) / 0.97 < 0.05);
    CHECK(std::abs(s4 - 0.54) / 0.54 < 0.05);
}

TEST_CASE("a single spike has no finite competition threshold") {
    auto p = sweep_params();
    CHECK(std::isinf(competition_threshold(p, 1)));
    CHECK(std::isinf(competition_threshold_jacobian(p, 1)));
}

TEST_CASE("d1cN* coincides with the Jacobian zero crossing") {
    auto p = sweep_params(2);
    auto f = [&](double d1) {
        ModelParams q = p;
        q.d1 = d1;
        q.chi = d1;
        auto eq = solve_symmetric(q, 2);
        return quasi_jacobian(eq, q).eig_closed_form(1);
    };
    const double dstar = brent(f, 2.5, 3.3, 1e-10);
    CHECK(dstar == doctest::Approx(competition_threshold_jacobian(p, 2)).epsilon(1e-6));
}

TEST_CASE("a and a1 differ by 1/6 so the two thresholds approach each other") {
    auto p = sweep_params();
    double prev_ratio_gap = 1e9;
    for (double d2 : {1e-4, 1e-6, 1e-8}) {
        p.d2 = d2;
        const double ratio = competition_threshold_jacobian(p, 2) /
                             competition_threshold(p, 2);
        const double gap = std::abs(ratio - 1.0);
        CHECK(gap < prev_ratio_gap);
        prev_ratio_gap = gap;
    }
    CHECK(prev_ratio_gap < 0.08);
}

TEST_CASE("large-N scaling approaches the eta_inf limit form") {
    auto p = sweep_params();
    p.d2 = 1e-6;
    double prev = 1e9;
    for (int N : {8, 16, 32}) {
        const double d1c = competition_threshold(p, N);
        ModelParams q = p;
        q.d1 = d1c;
        q.chi = d1c;
        const double v = symmetric_amplitude(q, N);
        const double a = q.chibar() * v / 3.0 - 0.5;
        const double lim = 4.0 * p.mu * p.ubar /
                           std::pow(std::acos((1.0 - a) / (1.0 + a)), 2);
        const double rgap = std::abs(d1c * N * N / lim - 1.0);
        CHECK(rgap < prev);
        prev = rgap;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("NLEP multiplier algebra") {
    CHECK(std::abs(nlep_multiplier(1.0, 0.0) - cplx(4.0 / 3.0)) < 1e-15);
    CHECK(std::abs(nlep_multiplier(0.7 + 0.3i, 4.0)) < 1e-15);
    CHECK_THROWS_AS(nlep_multiplier(-2.0, 1.0), std::invalid_argument);

    // tau = 0, N = 1: alpha = 2 and kappa = (4 - Lambda)/2
    auto p = sweep_params();
    p.tau = 0.0;
    const cplx alpha0 = nlep_alpha(p, 1, 1, 0.0);
    CHECK(std::abs(alpha0 - 2.0) < 1e-12);
    CHECK(std::abs(nlep_multiplier(alpha0, 0.7) - cplx((4.0 - 0.7) / 2.0)) < 1e-12);

    // the Green's-route alpha reproduces the tangent-ratio closed form
    p.tau = 0.9;
    const cplx lam0 = 0.4 + 1.1i;
    const cplx alpha = nlep_alpha(p, 1, 1, lam0);
    const double theta = p.theta();
    const cplx S = std::sqrt(1.0 - p.tau * lam0 / (p.mu * p.ubar));
    const cplx kappa_closed =
        4.0 * (1.0 - 0.25 * 0.3) /
        (3.0 - S * std::tan(theta * S) / std::tan(theta));
    CHECK(std::abs(nlep_multiplier(alpha, 0.3) - kappa_closed) < 1e-10);
}

TEST_CASE("B-matrix eigenvalues match 2 sigma_j/(2 sigma_j - sigma_1)") {
    for (int N : {2, 4, 8}) {
        ModelParams p = sweep_params(N);
        p.d1 = (N == 8) ? 0.15 : 0.5;
        p.chi = p.d1;
        if (!classify_d1(p).in_admissible_set) continue;
        p.tau = 0.6;
        const cplx lam0 = 0.2 + 0.5i;
        auto set = assemble_matrices(p, equilibrium_locations(N), lam0);
        Eigen::MatrixXcd B = nlep_B_matrix(set);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(B);
        std::vector<cplx> dense(es.eigenvalues().data(), es.eigenvalues().data() + N);
        std::vector<cplx> closed;
        for (int j = 0; j < N; ++j)
            closed.push_back(2.0 * set.sigma(j) / (2.0 * set.sigma(j) - cplx(set.a_g)));
        auto key = [](const cplx& z) { return std::make_pair(z.real(), z.imag()); };
        std::sort(dense.begin(), dense.end(),
                  [&](auto a, auto b) { return key(a) < key(b); });
        std::sort(closed.begin(), closed.end(),
                  [&](auto a, auto b) { return key(a) < key(b); });
        for (int j = 0; j < N; ++j)
            CHECK(std::abs(dense[j] - closed[j]) < 1e-10 * (1.0 + std::abs(closed[j])));
    }
}

TEST_CASE("refined threshold gamma_c") {
    CHECK(nlep_threshold_refined(3.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(nlep_threshold_refined(1e9, 1.0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(nlep_threshold_refined(1.5, 1.0), std::invalid_argument);
}

TEST_CASE("threshold equation: kappa_bar = 1 at delta1 = 0 and 1 - delta1 beyond") {
    const cplx rhs0 = nlep_threshold_rhs(0.0);
    CHECK(std::abs(3.0 / rhs0 - 1.0) < 1e-12);
    for (double d : {0.02, 0.05, 0.1}) {
        const cplx kbar = 3.0 / nlep_threshold_rhs(d);
        CHECK(std::abs(kbar - (1.0 - d)) < d * d);
    }
    // frozen high-precision reference at delta1 = 0.05
    CHECK(std::abs(3.0 / nlep_threshold_rhs(0.05) - 0.9490683280211273) < 1e-10);
}

TEST_CASE("Hopf: threshold solves the system and the oracle agrees") {
    auto p = sweep_params();
    auto h = hopf_solve(p, 2.0);
    CHECK(h.lambda_H > 0.0);
    CHECK(h.residual < 1e-10);
    CHECK(hopf_residual_oracle(p, h) < 1e-8);
    // robustness: series tolerance change must not move the residual
    ModelParams q = p;
    q.d1 = 2.0;
    q.chi = 2.0;
    const double v = symmetric_amplitude(q, 1);
    const cplx lam0(0.0, h.lambda_H);
    const cplx Lambda = 4.0 * (lam0 + 1.0) / (v * v);
    const cplx d1a = nlep_threshold_rhs(0.5 * std::sqrt(Lambda), false, 1e-14);
    const cplx d1b = nlep_threshold_rhs(0.5 * std::sqrt(Lambda), false, 1e-12);
    CHECK(std::abs(d1a - d1b) < 1e-6 * std::abs(d1a));
}

TEST_CASE("Hopf: tau_c decreases in d1 and the crossing is transversal") {
    auto p = sweep_params();
    double prev = 1e300;
    for (double d1 : {1.0, 1.5, 2.0, 2.5, 3.0}) {
        auto h = hopf_solve(p, d1);
        CHECK(h.tau_c < prev);
        prev = h.tau_c;
    }
    auto h = hopf_solve(p, 2.0);
    const cplx lam = hopf_eigenvalue_at_tau(p, 2.0, 1.05 * h.tau_c,
                                            cplx(0.0, h.lambda_H));
    CHECK(lam.real() > 0.0);
    // just below the threshold the eigenvalue retreats into the stable half
    const cplx lam_lo = hopf_eigenvalue_at_tau(p, 2.0, 0.95 * h.tau_c,
                                               cplx(0.0, h.lambda_H));
    CHECK(lam_lo.real() < 0.0);
}
