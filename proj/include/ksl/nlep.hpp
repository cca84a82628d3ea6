#pragma once

#include <complex>
#include <vector>

#include "ksl/greens.hpp"
#include "ksl/model.hpp"

namespace ksl {

// Large-eigenvalue (competition / Hopf) stability machinery. All thresholds
// are computed at the fixed drift ratio chibar = chi/d1 implied by the input
// parameters; chi is scaled along with d1 inside the fixed-point iterations.

struct CompetitionThresholds {
    double d1cN = 0.0;       // zero-crossing threshold of the reduced spectral problem
    double d1cN_star = 0.0;  // Jacobian-singularity threshold
    double eta_N = 0.0;      // cosine argument at the converged d1cN
    double gamma_c = 0.0;    // refined multiplier threshold 1 - 3/(2 chibar v)
};

// d1cN: the implicit equation d1 = 4 mu ubar / (N arccos(eta_N))^2 with
// eta_N = (1 - a cos(pi/N))/(a + 1), a = chibar v_max0/3 - 1/2, iterated with
// damping 0.5 until |d d1| < 1e-10 relative. Returns +infinity for N = 1.
double competition_threshold(const ModelParams& p, int N);

// Same fixed point with a1 = chibar v_max0/3 - 2/3 (the value of d1 at which
// the quasi-equilibrium Jacobian goes singular for mode N).
double competition_threshold_jacobian(const ModelParams& p, int N);

CompetitionThresholds competition_report(const ModelParams& p, int N);

// kappa = alpha (4 - Lambda) / (2 + alpha); pole at alpha = -2.
cplx nlep_multiplier(cplx alpha, cplx Lambda);

// tau-dependent spectral multiplier entry for mode j at eigenvalue lambda0:
// alpha_j = 2 sigma_j(lambda0) / (2 sigma_j(lambda0) - a_g).
cplx nlep_alpha(const ModelParams& p, int N, int j, cplx lambda0);

// The matrix B = (2/a_g)(2 G_lambda/a_g - I)^{-1} G_lambda.
Eigen::MatrixXcd nlep_B_matrix(const GreensMatrixSet& set);

// gamma_c = 1 - 3/(2 chibar v_max0); requires v_max0 > 2/chibar.
double nlep_threshold_refined(double v_max0, double chibar);

// Right-hand side of the hypergeometric threshold equation (equals 4/kappa at
// a root; 3 at delta1 = 0). Shared by the zero-eigenvalue threshold and the
// Hopf system. use_quadrature_oracle replaces the series evaluations with the
// Euler-integral lift.
cplx nlep_threshold_rhs(cplx delta1, bool use_quadrature_oracle = false,
                        double series_tol = 1e-14);

struct HopfResult {
    double tau_c = 0.0;
    double lambda_H = 0.0;
    double d1 = 0.0;
    double residual = 0.0;       // |F| of the complex algebraic system
    int newton_iterations = 0;
};

// Hopf point of a one-spike steady state at the given d1: solves
// 4/kappa(tau, i lambda_H) = RHS(delta1(lambda_H)) for (tau_c, lambda_H) by a
// damped Newton in (log tau, lambda_H).
HopfResult hopf_solve(const ModelParams& p, double d1,
                      double tau_guess = 1.0, double lambda_guess = 1.0);

// residual of the Hopf system evaluated with the quadrature-based oracle
double hopf_residual_oracle(const ModelParams& p, const HopfResult& h);

// Complex eigenvalue lambda0 of the same algebraic system at fixed tau
// (eigenvalue path tracing above the Hopf point); seeded near i lambda_H.
cplx hopf_eigenvalue_at_tau(const ModelParams& p, double d1, double tau,
                            cplx lambda_seed);

// Continuation of the Hopf curve over [d1_lo, d1_hi] with the given step.
std::vector<HopfResult> hopf_curve(const ModelParams& p, double d1_lo,
                                   double d1_hi, double step = 0.05);

}  // namespace ksl
