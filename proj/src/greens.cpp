#include "ksl/greens.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ksl {

namespace {

constexpr double kPi = std::numbers::pi;

// Full-domain resonance check: theta may not sit on any m*pi/2, i.e. d1 may
// not sit in the relative band around any 4 mu ubar/(m^2 pi^2).
void reject_resonant(const ModelParams& p) {
    const double theta = p.theta();
    const int mmax = int(2.0 * theta / kPi) + 1;
    for (int m = 1; m <= mmax; ++m) {
        const double d1T = 4.0 * p.mu * p.ubar / (double(m) * m * kPi * kPi);
        if (std::abs(p.d1 - d1T) / d1T < kResonanceBand)
            throw std::invalid_argument("resonant d1: within band of d1T" +
                                        std::to_string(m));
    }
}

void check_domain(double x, double xk) {
    if (!(x >= -1.0 && x <= 1.0 && xk >= -1.0 && xk <= 1.0))
        throw std::invalid_argument("green: x and xk must lie in [-1,1]");
}

}  // namespace

// G(x;xk) = c cos(theta(1+x_<)) cos(theta(1-x_>)) / sin(2 theta),
// c = sqrt(mu/(ubar d1)). The jump of (d1/mu) G_x across the source is 1.
double helmholtz_green(double x, double xk, const ModelParams& p) {
    reject_resonant(p);
    check_domain(x, xk);
    const double th = p.theta();
    const double c = std::sqrt(p.mu / (p.ubar * p.d1));
    const double lo = std::min(x, xk), hi = std::max(x, xk);
    return c * std::cos(th * (1.0 + lo)) * std::cos(th * (1.0 - hi)) /
           std::sin(2.0 * th);
}

double helmholtz_green_x(double x, double xk, const ModelParams& p) {
    reject_resonant(p);
    check_domain(x, xk);
    const double th = p.theta();
    const double c = std::sqrt(p.mu / (p.ubar * p.d1));
    const double s2 = std::sin(2.0 * th);
    if (x > xk)
        return c * th * std::sin(th * (1.0 - x)) * std::cos(th * (1.0 + xk)) / s2;
    if (x < xk)
        return -c * th * std::sin(th * (1.0 + x)) * std::cos(th * (1.0 - xk)) / s2;
    return green_regular_x(xk, p);
}

double green_regular_x(double xk, const ModelParams& p) {
    reject_resonant(p);
    const double th = p.theta();
    return -0.5 * (p.mu / p.d1) * std::sin(2.0 * th * xk) / std::sin(2.0 * th);
}

// g = -dG/dxk; carries the unit jump in (d1/mu) g and a continuous derivative.
double dipole_green(double x, double xk, const ModelParams& p) {
    reject_resonant(p);
    check_domain(x, xk);
    const double th = p.theta();
    const double c = std::sqrt(p.mu / (p.ubar * p.d1));
    const double s2 = std::sin(2.0 * th);
    if (x < xk)
        return -c * th * std::cos(th * (1.0 + x)) * std::sin(th * (1.0 - xk)) / s2;
    if (x > xk)
        return c * th * std::cos(th * (1.0 - x)) * std::sin(th * (1.0 + xk)) / s2;
    // average across the jump: (mu/(2 d1)) sin(2 theta xk)/sin(2 theta)
    return 0.5 * (p.mu / p.d1) * std::sin(2.0 * th * xk) / s2;
}

double dipole_green_x(double x, double xk, const ModelParams& p) {
    reject_resonant(p);
    check_domain(x, xk);
    const double th = p.theta();
    const double c = std::sqrt(p.mu / (p.ubar * p.d1));
    const double s2 = std::sin(2.0 * th);
    if (x < xk)
        return c * th * th * std::sin(th * (1.0 + x)) * std::sin(th * (1.0 - xk)) / s2;
    return c * th * th * std::sin(th * (1.0 - x)) * std::sin(th * (1.0 + xk)) / s2;
}

cplx helmholtz_green_lambda(double x, double xk, const ModelParams& p, cplx lambda0) {
    check_domain(x, xk);
    const cplx uhat = p.ubar - p.tau * lambda0 / p.mu;
    const cplx thl = std::sqrt((p.mu / p.d1) * uhat);
    const cplx c = (p.mu / p.d1) / thl;  // sqrt(mu/(d1 uhat)), principal branch
    const double lo = std::min(x, xk), hi = std::max(x, xk);
    const cplx s2 = std::sin(2.0 * thl);
    if (std::abs(s2) < 1e-13)
        throw std::invalid_argument("resonant shifted problem: sin(2 theta_lambda) ~ 0");
    return c * std::cos(thl * (1.0 + lo)) * std::cos(thl * (1.0 - hi)) / s2;
}

double a_g(const ModelParams& p, int N) {
    reject_resonant(p);
    const double th = p.theta();
    return 0.5 * std::sqrt(p.mu / (p.d1 * p.ubar)) / std::tan(th / N);
}

Eigen::MatrixXd green_matrix(const ModelParams& p, const std::vector<double>& x) {
    const int n = int(x.size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = helmholtz_green(x[i], x[j], p);
    return m;
}

Eigen::MatrixXd grad_green_matrix(const ModelParams& p, const std::vector<double>& x) {
    const int n = int(x.size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = (i == j) ? green_regular_x(x[i], p)
                               : helmholtz_green_x(x[i], x[j], p);
    return m;
}

Eigen::MatrixXd dipole_value_matrix(const ModelParams& p, const std::vector<double>& x) {
    const int n = int(x.size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = dipole_green(x[i], x[j], p);
    return m;
}

Eigen::MatrixXd dipole_deriv_matrix(const ModelParams& p, const std::vector<double>& x) {
    const int n = int(x.size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = dipole_green_x(x[i], x[j], p);
    return m;
}

namespace {

Eigen::MatrixXcd tridiag(int n, cplx dcorner, cplx e, cplx f) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = (i == 0 || i == n - 1) ? dcorner : e;
        if (i + 1 < n) {
            m(i, i + 1) = f;
            m(i + 1, i) = f;
        }
    }
    if (n == 1) m(0, 0) = dcorner;
    return m;
}

}  // namespace

GreensMatrixSet assemble_matrices(const ModelParams& p,
                                  const std::vector<double>& locations,
                                  cplx lambda0) {
    p.validate();
    const int N = int(locations.size());
    if (N < 1) throw std::invalid_argument("assemble_matrices: empty locations");
    const auto x0 = equilibrium_locations(N);
    for (int j = 0; j < N; ++j)
        if (std::abs(locations[j] - x0[j]) > 1e-12)
            throw std::invalid_argument(
                "assemble_matrices: locations must be the equally spaced x_j^0");
    const auto rep = [&] {
        ModelParams q = p;
        q.N = N;
        return classify_d1(q);
    }();
    if (!rep.in_admissible_set)
        throw std::invalid_argument("assemble_matrices: d1 not in the admissible set");

    GreensMatrixSet s;
    s.N = N;
    s.lambda0 = lambda0;

    const double th = p.theta();
    const cplx uhat = p.ubar - p.tau * lambda0 / p.mu;
    const cplx thl = std::sqrt((p.mu / p.d1) * uhat);

    s.scalars.theta = th;
    s.scalars.theta_lambda = thl;
    const cplx phi_l = thl / double(N);
    s.scalars.d = std::tan(phi_l) - 1.0 / std::tan(2.0 * phi_l);
    s.scalars.e = -2.0 / std::tan(2.0 * phi_l);
    s.scalars.f = 1.0 / std::sin(2.0 * phi_l);
    const double phi = th / N;
    s.scalars.d_g = 1.0 / std::tan(2.0 * phi) + 1.0 / std::tan(phi);
    s.scalars.e_g = 2.0 / std::tan(2.0 * phi);
    s.scalars.f_g = -1.0 / std::sin(2.0 * phi);

    // entrywise closed forms
    s.G = green_matrix(p, locations);
    s.Glam.resize(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            s.Glam(i, j) = helmholtz_green_lambda(locations[i], locations[j], p, lambda0);
    s.P = grad_green_matrix(p, locations);
    s.Pg = dipole_value_matrix(p, locations);
    s.Gg = dipole_deriv_matrix(p, locations);

    // tridiagonal companions; a single spike sees cos-type solutions on both
    // sides, so its sole entry is e + 2f (resp. e_g - 2f_g) rather than the
    // corner value d.
    if (N == 1) {
        s.D = tridiag(1, 2.0 * std::tan(phi_l), s.scalars.e, s.scalars.f);
        s.Dg = tridiag(1, cplx(2.0 / std::tan(phi)), 0.0, 0.0).real();
        s.C = Eigen::MatrixXd::Zero(1, 1);
    } else {
        s.D = tridiag(N, s.scalars.d, s.scalars.e, s.scalars.f);
        s.Dg = tridiag(N, cplx(s.scalars.d_g), cplx(s.scalars.e_g),
                       cplx(s.scalars.f_g))
                   .real();
        s.C = Eigen::MatrixXd::Zero(N, N);
        for (int i = 0; i < N; ++i) {
            if (i > 0) s.C(i, i - 1) = -1.0;
            if (i + 1 < N) s.C(i, i + 1) = 1.0;
        }
        s.C(0, 0) = 1.0;
        s.C(N - 1, N - 1) = -1.0;
    }

    // closed-form spectra
    s.kappa.resize(N);
    s.sigma.resize(N);
    s.xi.resize(N);
    const cplx clam = (p.mu / p.d1) / thl;  // sqrt(mu/(d1 uhat))
    double kappa_min = std::numeric_limits<double>::infinity();
    int kappa_argmin = 0;
    for (int j = 1; j <= N; ++j) {
        const cplx kj = s.scalars.e + 2.0 * s.scalars.f * std::cos(kPi * (j - 1) / N);
        s.kappa(j - 1) = kj;
        if (std::abs(kj) < kappa_min) {
            kappa_min = std::abs(kj);
            kappa_argmin = j;
        }
        s.sigma(j - 1) = clam / kj;
    }
    if (kappa_min < 1e-10)
        throw std::invalid_argument(
            "assemble_matrices: singular shifted tridiagonal at mode " +
            std::to_string(kappa_argmin));
    s.xi(0) = 2.0 / std::tan(phi);
    for (int j = 2; j <= N; ++j)
        s.xi(j - 1) = s.scalars.e_g + 2.0 * s.scalars.f_g * std::cos(kPi * (j - 1) / N);
    for (int j = 0; j < N; ++j)
        if (std::abs(s.xi(j)) < 1e-10)
            throw std::invalid_argument(
                "assemble_matrices: singular dipole tridiagonal at mode " +
                std::to_string(j + 1));

    // theta-independent eigenvector bases
    s.Q.resize(N, N);
    s.Qg.resize(N, N);
    for (int l = 1; l <= N; ++l) {
        s.Q(l - 1, 0) = 1.0 / std::sqrt(double(N));
        s.Qg(l - 1, 0) = ((l % 2 == 1) ? 1.0 : -1.0) / std::sqrt(double(N));
        for (int j = 2; j <= N; ++j) {
            const double arg = kPi * (j - 1) / N * (l - 0.5);
            s.Q(l - 1, j - 1) = std::sqrt(2.0 / N) * std::cos(arg);
            s.Qg(l - 1, j - 1) = std::sqrt(2.0 / N) * std::sin(arg);
        }
    }

    s.a_g = a_g(p, N);
    return s;
}

}  // namespace ksl
