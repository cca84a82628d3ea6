#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "ksl/model.hpp"

namespace ksl {

using cplx = std::complex<double>;

// Scalar building blocks shared by the structured matrices. theta_lambda is
// the principal branch of sqrt((mu/d1)(ubar - tau*lambda0/mu)); at
// tau*lambda0 = 0 it reduces to theta. The tridiagonal entries satisfy
// d = e + f and d_g = e_g - f_g.
struct GreensScalars {
    double theta = 0.0;
    cplx theta_lambda{0.0, 0.0};
    cplx d{0.0}, e{0.0}, f{0.0};   // entries of the Helmholtz tridiagonal
    double d_g = 0.0, e_g = 0.0, f_g = 0.0;  // entries of the dipole tridiagonal
};

// All structured matrices built on the equally spaced steady-state locations,
// together with their closed-form spectra and eigenvector bases.
struct GreensMatrixSet {
    int N = 0;
    cplx lambda0{0.0};
    GreensScalars scalars;

    Eigen::MatrixXd G;    // Helmholtz Green's matrix at lambda0 = 0
    Eigen::MatrixXcd Glam;  // eigenvalue-dependent Green's matrix
    Eigen::MatrixXd P;    // <G_x> averages (derivative in first argument)
    Eigen::MatrixXd Pg;   // dipole values / averages
    Eigen::MatrixXd Gg;   // dipole derivative matrix
    Eigen::MatrixXcd D;   // tridiagonal inverse of Glam (up to the scalar factor)
    Eigen::MatrixXd Dg;   // tridiagonal inverse of Gg (up to mu*theta/d1)
    Eigen::MatrixXd C;    // signed tridiagonal coupling matrix

    Eigen::VectorXcd sigma;  // spectrum of Glam
    Eigen::VectorXcd kappa;  // spectrum of D
    Eigen::VectorXd xi;      // spectrum of Dg
    Eigen::MatrixXd Q;       // orthonormal eigenvectors of D (theta-independent)
    Eigen::MatrixXd Qg;      // orthonormal eigenvectors of Dg
    double a_g = 0.0;        // common row sum of G
};

// Closed-form Helmholtz Green's function G(x; xk) solving
// (d1/mu) G_xx + ubar G = delta(x - xk), G_x(+-1) = 0. Throws on resonant d1.
double helmholtz_green(double x, double xk, const ModelParams& p);

// One-sided derivative d/dx G(x; xk); at x == xk returns the average of the
// two one-sided values, which equals R_x(xk; xk) of the regular part.
double helmholtz_green_x(double x, double xk, const ModelParams& p);

// R_x(xk; xk), the derivative of the regular part at the source.
double green_regular_x(double xk, const ModelParams& p);

// Dipole Green's function g(x; xk): (d1/mu) g_xx + ubar g = delta'(x - xk)
// with [d1/mu g] = 1 and continuous derivative across the source. At x == xk
// the average of the two one-sided values is returned.
double dipole_green(double x, double xk, const ModelParams& p);

// g_x(x; xk); continuous across x == xk.
double dipole_green_x(double x, double xk, const ModelParams& p);

// Complex Green's function with ubar replaced by ubar - tau*lambda0/mu.
cplx helmholtz_green_lambda(double x, double xk, const ModelParams& p, cplx lambda0);

// Common row sum of the Green's matrix at equally spaced locations:
// (1/2) sqrt(mu/(d1 ubar)) cot(theta/N); positive iff d1 > d1pN.
double a_g(const ModelParams& p, int N);

// Entrywise matrices at arbitrary sorted interior locations. grad_green has
// G_x(x_j; x_k) off the diagonal and R_x(x_j; x_j) on it; the dipole versions
// mirror the matrices used by the translation-eigenvalue analysis.
Eigen::MatrixXd grad_green_matrix(const ModelParams& p, const std::vector<double>& x);
Eigen::MatrixXd dipole_value_matrix(const ModelParams& p, const std::vector<double>& x);
Eigen::MatrixXd dipole_deriv_matrix(const ModelParams& p, const std::vector<double>& x);
Eigen::MatrixXd green_matrix(const ModelParams& p, const std::vector<double>& x);

// Full structured set at the equally spaced steady-state locations; throws if
// the locations are not x_j^0, if d1 is inadmissible, or if the shifted
// tridiagonal is singular (the offending mode index is reported).
GreensMatrixSet assemble_matrices(const ModelParams& p,
                                  const std::vector<double>& locations,
                                  cplx lambda0 = cplx(0.0, 0.0));

}  // namespace ksl
