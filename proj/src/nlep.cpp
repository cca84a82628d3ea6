#include "ksl/nlep.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ksl/equilibria.hpp"
#include "ksl/specialfn.hpp"

namespace ksl {

namespace {

constexpr double kPi = std::numbers::pi;

// Damped fixed point d1 -> threshold formula(v_max0(d1)); v_max0 depends only
// logarithmically on d1, so the map contracts strongly.
double threshold_fixed_point(const ModelParams& p, int N, double a_shift) {
    if (N < 2)
        return std::numeric_limits<double>::infinity();
    const double chibar = p.chibar();
    ModelParams q = p;
    q.N = N;
    double d1 = 2.0 * classify_d1(q).d1pN;
    std::ostringstream history;
    for (int it = 0; it < 400; ++it) {
        q.d1 = d1;
        q.chi = chibar * d1;
        const double v = symmetric_amplitude(q, N);
        const double a = chibar * v / 3.0 + a_shift;
        const double eta = (1.0 - a * std::cos(kPi / N)) / (a + 1.0);
        if (!(eta > -1.0 && eta < 1.0))
            throw std::runtime_error("threshold fixed point: arccos argument out of range");
        const double d1_new =
            4.0 * p.mu * p.ubar / (N * N * std::pow(std::acos(eta), 2));
        const double next = 0.5 * d1 + 0.5 * d1_new;
        history << d1 << " ";
        if (std::abs(next - d1) < 1e-10 * d1) return next;
        d1 = next;
    }
    throw std::runtime_error("threshold fixed point: no convergence, iterates: " +
                             history.str());
}

}  // namespace

double competition_threshold(const ModelParams& p, int N) {
    return threshold_fixed_point(p, N, -0.5);
}

double competition_threshold_jacobian(const ModelParams& p, int N) {
    return threshold_fixed_point(p, N, -2.0 / 3.0);
}

CompetitionThresholds competition_report(const ModelParams& p, int N) {
    CompetitionThresholds t;
    t.d1cN = competition_threshold(p, N);
    t.d1cN_star = competition_threshold_jacobian(p, N);
    if (N >= 2) {
        ModelParams q = p;
        q.d1 = t.d1cN;
        q.chi = p.chibar() * t.d1cN;
        const double v = symmetric_amplitude(q, N);
        const double a = q.chibar() * v / 3.0 - 0.5;
        t.eta_N = (1.0 - a * std::cos(kPi / N)) / (a + 1.0);
        t.gamma_c = nlep_threshold_refined(v, q.chibar());
    }
    return t;
}

cplx nlep_multiplier(cplx alpha, cplx Lambda) {
    if (std::abs(alpha + 2.0) < 1e-14)
        throw std::invalid_argument("nlep_multiplier: pole at alpha = -2");
    return alpha * (4.0 - Lambda) / (2.0 + alpha);
}

cplx nlep_alpha(const ModelParams& p, int N, int j, cplx lambda0) {
    if (j < 1 || j > N) throw std::invalid_argument("nlep_alpha: bad mode index");
    auto set = assemble_matrices(p, equilibrium_locations(N), lambda0);
    const cplx sigma_j = set.sigma(j - 1);
    return 2.0 * sigma_j / (2.0 * sigma_j - set.a_g);
}

Eigen::MatrixXcd nlep_B_matrix(const GreensMatrixSet& set) {
    const int N = set.N;
    Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(N, N);
    Eigen::MatrixXcd core = 2.0 / set.a_g * set.Glam - I;
    return 2.0 / set.a_g * core.inverse() * set.Glam;
}

double nlep_threshold_refined(double v_max0, double chibar) {
    if (!(chibar * v_max0 > 2.0))
        throw std::invalid_argument("nlep_threshold_refined: needs v_max0 > 2/chibar");
    return 1.0 - 3.0 / (2.0 * chibar * v_max0);
}

cplx nlep_threshold_rhs(cplx delta1, bool use_quadrature_oracle, double series_tol) {
    const cplx half{0.5, 0.0};
    const cplx A = std::pow(cplx(1.5), 1.0 - delta1) * gamma_fn(1.0 + delta1) *
                   gamma_fn(0.5 + delta1) /
                   ((0.5 - delta1) * gamma_fn(1.0 + 2.0 * delta1) * gamma_fn(half));
    cplx f43, f32;
    if (use_quadrature_oracle) {
        HypergeomSpec inner43({1.0, 0.5, 2.0}, {2.0 - delta1, 2.0 + delta1}, 1.0);
        f43 = euler_integral_lift(inner43, 2.0, 2.5);
        HypergeomSpec inner32({1.0 + delta1, delta1 - 0.5},
                              {2.0 * delta1 + 1.0}, 1.0);
        f32 = euler_integral_lift(inner32, 1.0 + delta1, 1.5 + delta1);
    } else {
        // the fitted algebraic tail leaves ~1e-15 truncation error already at
        // this cap, and the Hopf Newton loop calls this often
        const long cap = 60000;
        f43 = pfq_value({1.0, 0.5, 2.0, 2.0}, {2.0 - delta1, 2.0 + delta1, 2.5},
                        1.0, series_tol, cap);
        f32 = pfq_value({1.0 + delta1, delta1 - 0.5, 1.0 + delta1},
                        {2.0 * delta1 + 1.0, 1.5 + delta1}, 1.0, series_tol, cap);
    }
    return f43 / (1.0 - delta1 * delta1) +
           A / 3.0 * std::pow(cplx(1.5), 1.0 + delta1) * gamma_fn(1.0 + delta1) *
               gamma_fn(half) / gamma_fn(1.5 + delta1) * f32;
}

namespace {

// complex residual of the Hopf algebraic system at lambda0 (tau given)
cplx hopf_F(const ModelParams& p, double d1, double v_max0, double tau,
            cplx lambda0, bool oracle = false) {
    const double chibar = p.chibar();
    const double theta = std::sqrt(p.mu * p.ubar / d1);
    const cplx Lambda = 4.0 * (lambda0 + 1.0) / (chibar * chibar * v_max0 * v_max0);
    const cplx delta1 = 0.5 * std::sqrt(Lambda);
    const cplx S = std::sqrt(1.0 - tau * lambda0 / (p.mu * p.ubar));
    const cplx kappa = 4.0 * (1.0 - Lambda / 4.0) /
                       (3.0 - S * std::tan(theta * S) / std::tan(theta));
    return 4.0 / kappa - nlep_threshold_rhs(delta1, oracle);
}

}  // namespace

namespace {

HopfResult hopf_solve_seeded(const ModelParams& q, double d1, double v,
                             double tau_guess, double lambda_guess);

}  // namespace

HopfResult hopf_solve(const ModelParams& p, double d1, double tau_guess,
                      double lambda_guess) {
    ModelParams q = p;
    q.d1 = d1;
    q.chi = p.chibar() * d1;
    q.N = 1;
    const double v = symmetric_amplitude(q, 1);
    try {
        return hopf_solve_seeded(q, d1, v, tau_guess, lambda_guess);
    } catch (const std::runtime_error&) {
        // sweep a coarse seed grid; tau_c varies over orders of magnitude
        for (double tg : {0.03, 0.3, 3.0, 30.0, 300.0, 3000.0})
            for (double lg : {0.3, 1.0, 3.0, 10.0}) {
                try {
                    return hopf_solve_seeded(q, d1, v, tg, lg);
                } catch (const std::runtime_error&) {
                }
            }
        throw;
    }
}

namespace {

HopfResult hopf_solve_seeded(const ModelParams& q, double d1, double v,
                             double tau_guess, double lambda_guess) {
    double lt = std::log(tau_guess), lh = lambda_guess;
    auto F = [&](double logtau, double lamH) {
        return hopf_F(q, d1, v, std::exp(logtau), cplx(0.0, lamH));
    };
    HopfResult out;
    out.d1 = d1;
    cplx f = F(lt, lh);
    int it = 0;
    for (; it < 80; ++it) {
        if (std::abs(f) < 1e-11) break;
        const double h1 = 1e-7, h2 = 1e-7;
        const cplx dF_dlt = (F(lt + h1, lh) - F(lt - h1, lh)) / (2.0 * h1);
        const cplx dF_dlh = (F(lt, lh + h2) - F(lt, lh - h2)) / (2.0 * h2);
        // 2x2 real system
        const double a11 = dF_dlt.real(), a12 = dF_dlh.real();
        const double a21 = dF_dlt.imag(), a22 = dF_dlh.imag();
        const double det = a11 * a22 - a12 * a21;
        if (std::abs(det) < 1e-30)
            throw std::runtime_error("hopf_solve: singular Newton system");
        const double dlt = (-f.real() * a22 + f.imag() * a12) / det;
        const double dlh = (-a11 * f.imag() + a21 * f.real()) / det;
        double alpha = 1.0;
        for (int back = 0; back < 14; ++back) {
            const cplx fn = F(lt + alpha * dlt, lh + alpha * dlh);
            if (std::abs(fn) < std::abs(f) || back == 13) {
                lt += alpha * dlt;
                lh += alpha * dlh;
                f = fn;
                break;
            }
            alpha *= 0.5;
        }
    }
    if (std::abs(f) >= 1e-9)
        throw std::runtime_error("hopf_solve: Newton failed, |F| = " +
                                 std::to_string(std::abs(f)));
    if (!(lh > 0.0))
        throw std::runtime_error("hopf_solve: spurious root with lambda_H <= 0");
    out.tau_c = std::exp(lt);
    out.lambda_H = lh;
    out.residual = std::abs(f);
    out.newton_iterations = it;
    return out;
}

}  // namespace

double hopf_residual_oracle(const ModelParams& p, const HopfResult& h) {
    ModelParams q = p;
    q.d1 = h.d1;
    q.chi = p.chibar() * h.d1;
    const double v = symmetric_amplitude(q, 1);
    return std::abs(
        hopf_F(q, h.d1, v, h.tau_c, cplx(0.0, h.lambda_H), /*oracle=*/true));
}

cplx hopf_eigenvalue_at_tau(const ModelParams& p, double d1, double tau,
                            cplx lambda_seed) {
    ModelParams q = p;
    q.d1 = d1;
    q.chi = p.chibar() * d1;
    const double v = symmetric_amplitude(q, 1);
    cplx lam = lambda_seed;
    cplx f = hopf_F(q, d1, v, tau, lam);
    for (int it = 0; it < 80; ++it) {
        if (std::abs(f) < 1e-11) break;
        const double h = 1e-7;
        const cplx dre = (hopf_F(q, d1, v, tau, lam + h) - hopf_F(q, d1, v, tau, lam - h)) /
                         (2.0 * h);
        const cplx dim =
            (hopf_F(q, d1, v, tau, lam + cplx(0.0, h)) -
             hopf_F(q, d1, v, tau, lam - cplx(0.0, h))) /
            (2.0 * h);
        const double a11 = dre.real(), a12 = dim.real();
        const double a21 = dre.imag(), a22 = dim.imag();
        const double det = a11 * a22 - a12 * a21;
        if (std::abs(det) < 1e-30) break;
        const double dx = (-f.real() * a22 + f.imag() * a12) / det;
        const double dy = (-a11 * f.imag() + a21 * f.real()) / det;
        lam += cplx(dx, dy);
        f = hopf_F(q, d1, v, tau, lam);
    }
    if (std::abs(f) >= 1e-9)
        throw std::runtime_error("hopf_eigenvalue_at_tau: no convergence");
    return lam;
}

std::vector<HopfResult> hopf_curve(const ModelParams& p, double d1_lo,
                                   double d1_hi, double step) {
    std::vector<HopfResult> curve;
    double tau = 1.0, lamH = 1.0;
    for (double d1 = d1_lo; d1 <= d1_hi + 1e-12; d1 += step) {
        HopfResult h = hopf_solve(p, d1, tau, lamH);
        tau = h.tau_c;
        lamH = h.lambda_H;
        curve.push_back(h);
    }
    return curve;
}

}  // namespace ksl
