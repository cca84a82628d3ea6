#pragma once

#include <Eigen/Dense>

#include "ksl/equilibria.hpp"
#include "ksl/greens.hpp"
#include "ksl/model.hpp"

namespace ksl {

// Translation ("small") eigenvalues lambda_j = -(2 eps^3 beta0 / 3) chibar
// v_max0^3 h_j together with the mode functions h_j and the stability
// thresholds derived from their sign structure.
struct SmallEigenReport {
    Eigen::VectorXd lambda;  // j = 1..N
    Eigen::VectorXd h;
    double beta0 = 0.0;      // asymptotic 2/v_max0 used in lambda
    double theta_sN = 0.0;   // simultaneous zero crossing of h_2..h_N
    double theta_cN = 0.0;   // first vertical asymptote (mode N)
    double d1sN = 0.0;       // d1 at theta_sN
    Eigen::MatrixXd mode_eigenvectors;  // columns of Q_g
};

// Singularity-free mode function h_j(theta) at a given a1 = (chibar v - 2)/3.
double small_eig_h(int j, int N, double theta, double a1, double ubar);

SmallEigenReport small_eigs_explicit(const ModelParams& p, const SpikeEquilibrium& eq);

// Independent compositional route through (xi_j, omega_j, a_g); has removable
// singularities at theta = m pi/2 and rejects inputs within 1e-4 of them.
Eigen::VectorXd small_eigs_compositional(const ModelParams& p,
                                         const SpikeEquilibrium& eq);

struct MatrixM {
    Eigen::MatrixXd M;        // tridiagonal-route assembly
    Eigen::MatrixXd M_tilde;  // entrywise Green's-derivative assembly
    Eigen::VectorXd eig_M;    // ascending dense spectrum of M
    Eigen::VectorXd eig_M_tilde;
};

// Both assembly routes of the small-eigenvalue matrix; throws when
// I + 3 zeta0 G / (chibar a_g v_max0) is numerically singular (the
// bifurcation point where the small eigenvalues cease to exist).
MatrixM build_matrix_M(const ModelParams& p, const SpikeEquilibrium& eq,
                       const GreensMatrixSet& greens);

// Theta at which asymmetric steady-state branches bifurcate from the
// symmetric branch: the self-consistent root of
// cos(2 theta / N) = (1 - a1)/(1 + a1) with the single-cell dominant-balance
// amplitude on a cell of width 2/N.
double asymmetric_bifurcation_point(const ModelParams& p, int N);

// Single-cell amplitude v(l) and the branch function B(l) = v(l)^3/sin(theta l)
// whose critical point at l = 1/N marks the bifurcation; exposed for
// finite-difference oracles.
double cell_amplitude(const ModelParams& p, double ell);
double branch_function(const ModelParams& p, double ell);

struct Beta0Result {
    double numeric = 0.0;     // -int y V0' dy / int (V0')^2 dy by quadrature
    double asymptotic = 0.0;  // 2 / v_max0
};
Beta0Result beta0(const SpikeEquilibrium& eq, const SpikeProfile& prof);

// Speed coefficient of spike k from the nested quadrature
// -int U0 V0' (int_0^y du/U0) dy / int (V0')^2 dy.
double beta_speed(const SpikeProfile& prof, int k);

}  // namespace ksl
