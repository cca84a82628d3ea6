#include "ksl/equilibria.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ksl/greens.hpp"
#include "ksl/quadrature.hpp"
#include "ksl/roots.hpp"

namespace ksl {

namespace {

// Residual and derivative of the scalar amplitude equation in v, with
// s0 = chibar B v^3 and B = (2/3) a_g eps.
struct AmplitudeEq {
    double chibar, B;
    AmplitudeRoute route;

    double operator()(double v) const {
        const double v3 = v * v * v;
        const double T = B * v3;  // s0 / chibar
        const double expo = std::exp(chibar * v - chibar * chibar * T);
        if (route == AmplitudeRoute::dominant_balance)
            return -0.5 * v * v + T * expo;
        return -0.5 * v * v + 0.5 * chibar * chibar * T * T + T * expo - T;
    }
    double deriv(double v) const {
        const double v2 = v * v, v3 = v2 * v;
        const double T = B * v3, dT = 3.0 * B * v2;
        const double g = chibar * v - chibar * chibar * T;
        const double dg = chibar - chibar * chibar * dT;
        const double expo = std::exp(g);
        if (route == AmplitudeRoute::dominant_balance)
            return -v + (dT + T * dg) * expo;
        return -v + chibar * chibar * T * dT + (dT + T * dg) * expo - dT;
    }
};

double dominant_balance_seed(double a_g, double eps, double chibar) {
    double v = std::max(1.2, std::abs(std::log(eps)) / chibar);
    for (int i = 0; i < 80; ++i) {
        const double arg = 3.0 / (4.0 * a_g * v * eps);
        if (arg <= 1.5) break;
        v = std::log(arg) / chibar;
    }
    return v;
}

double solve_amplitude(double a_g, const ModelParams& p, AmplitudeRoute route) {
    const double eps = p.eps();
    const double chibar = p.chibar();
    AmplitudeEq f{chibar, 2.0 / 3.0 * a_g * eps, route};

    // The equation has a spurious small root near the background level (below
    // v = 1) and, for the reduced route, another spurious root far above the
    // physical one where the cubic kills the exponent. Scanning upward from 1
    // brackets the physical root first.
    const double lo = 1.0, hi = 20.0 * std::max(1.0, std::abs(std::log(eps)));
    const int nscan = 2000;
    double a = lo, fa = f(a), b = 0.0;
    if (!(fa < 0.0)) {
        std::ostringstream msg;
        msg << "solve_symmetric: amplitude residual not negative at v=1 "
            << "(eps=" << eps << " too large?)";
        throw std::runtime_error(msg.str());
    }
    bool bracketed = false;
    for (int i = 1; i <= nscan; ++i) {
        b = lo + (hi - lo) * i / nscan;
        const double fb = f(b);
        if (fb == 0.0) return b;
        if (fa * fb < 0.0) {
            bracketed = true;
            break;
        }
        a = b;
        fa = fb;
    }
    if (!bracketed) {
        std::ostringstream msg;
        msg << "solve_symmetric: no bracketing interval for v_max0 on [" << lo
            << "," << hi << "] (eps=" << eps << " too large?)";
        throw std::runtime_error(msg.str());
    }
    return newton_bracketed([&](double v) { return f(v); },
                            [&](double v) { return f.deriv(v); }, a, b, 1e-15);
}

}  // namespace

double symmetric_amplitude(const ModelParams& p, int N, AmplitudeRoute route) {
    ModelParams q = p;
    q.N = N;
    q.validate();
    if (!(p.d1 > classify_d1(q).d1pN))
        throw std::invalid_argument("symmetric_amplitude: d1 below d1pN");
    const double th = p.theta();
    const double ag = 0.5 * std::sqrt(p.mu / (p.d1 * p.ubar)) / std::tan(th / N);
    return solve_amplitude(ag, p, route);
}

SpikeEquilibrium solve_symmetric(const ModelParams& p, int N, AmplitudeRoute route) {
    ModelParams q = p;
    q.N = N;
    q.validate();
    auto adm = classify_d1(q);
    if (!adm.in_admissible_set)
        throw std::invalid_argument("solve_symmetric: d1 not in the admissible set");

    SpikeEquilibrium eq;
    eq.chibar = p.chibar();
    eq.a_g = a_g(p, N);
    eq.locations = equilibrium_locations(N);
    eq.v_max0 = solve_amplitude(eq.a_g, p, route);
    eq.s0 = 2.0 / 3.0 * eq.chibar * eq.a_g * std::pow(eq.v_max0, 3) * p.eps();
    eq.C0 = eq.s0 * std::exp(-eq.chibar * eq.s0);
    eq.residual = (route == AmplitudeRoute::full_equation)
                      ? vmax_amplitude_eq_check(eq.v_max0, eq.s0, eq.C0, eq.chibar)
                      : AmplitudeEq{eq.chibar, 2.0 / 3.0 * eq.a_g * p.eps(), route}(eq.v_max0);
    if (!(eq.v_max0 > eq.s0 && eq.s0 > 0.0))
        throw std::runtime_error("solve_symmetric: amplitude ordering violated");
    if (!(eq.chibar * eq.v_max0 > 2.0))
        throw std::runtime_error(
            "solve_symmetric: chibar v_max0 <= 2, outside the spike regime");
    return eq;
}

double vmax_amplitude_eq_check(double v_max, double s, double C, double chibar) {
    return -0.5 * v_max * v_max + 0.5 * s * s +
           (C / chibar) * std::exp(chibar * v_max) - s / chibar;
}

double solve_vmax_given_s(double s, double chibar) {
    const double C = s * std::exp(-chibar * s);
    auto f = [&](double v) { return vmax_amplitude_eq_check(v, s, C, chibar); };
    const double hi = 40.0 / chibar + 4.0 * std::abs(std::log(s));
    double b = hi, fb = f(b), a = 0.0;
    const int nscan = 4000;
    bool ok = false;
    for (int i = 1; i <= nscan; ++i) {
        a = hi * (1.0 - double(i) / nscan) + 2.0 * s * double(i) / nscan;
        const double fa = f(a);
        if (fa * fb < 0.0) {
            ok = true;
            break;
        }
        b = a;
        fb = fa;
    }
    if (!ok) throw std::runtime_error("solve_vmax_given_s: no bracket");
    return brent(f, a, b, 1e-15);
}

QuasiEquilibrium solve_quasi(const ModelParams& p, const std::vector<double>& locations,
                             const QuasiEquilibrium* warm) {
    p.validate();
    const int N = int(locations.size());
    if (N < 1) throw std::invalid_argument("solve_quasi: no locations");
    const double thresh = qe_positivity_threshold(p, locations);
    if (!(p.d1 > thresh))
        throw std::invalid_argument(
            "solve_quasi: positivity condition violated, needs d1 > " +
            std::to_string(thresh));

    const double chibar = p.chibar();
    const double eps = p.eps();
    const Eigen::MatrixXd G = green_matrix(p, locations);

    // unknowns X = (v_1..v_N, s_1..s_N, C_1..C_N)
    Eigen::VectorXd X(3 * N);
    if (warm) {
        for (int j = 0; j < N; ++j) {
            X(j) = warm->v_max[j];
            X(N + j) = warm->s[j];
            X(2 * N + j) = warm->C[j];
        }
    } else {
        // seed with the dominant balance at the mean Green's row sum
        double ag_eff = G.rowwise().sum().mean();
        ag_eff = std::max(ag_eff, 1e-8);
        const double v0 = dominant_balance_seed(ag_eff, eps, chibar);
        for (int j = 0; j < N; ++j) {
            const double s0 = 2.0 / 3.0 * chibar * ag_eff * v0 * v0 * v0 * eps;
            X(j) = v0;
            X(N + j) = s0;
            X(2 * N + j) = s0 * std::exp(-chibar * s0);
        }
    }

    auto residual = [&](const Eigen::VectorXd& Y) {
        Eigen::VectorXd F(3 * N);
        for (int j = 0; j < N; ++j) {
            const double v = Y(j), s = Y(N + j), C = Y(2 * N + j);
            F(j) = C * std::exp(chibar * s) - s;
            F(N + j) = vmax_amplitude_eq_check(v, s, C, chibar);
            double match = 0.0;
            for (int k = 0; k < N; ++k)
                match += std::pow(Y(k), 3) * G(j, k);
            F(2 * N + j) = s - 2.0 / 3.0 * chibar * eps * match;
        }
        return F;
    };

    Eigen::VectorXd F = residual(X);
    std::ostringstream history;
    int it = 0;
    for (; it < 80; ++it) {
        const double fn = F.cwiseAbs().maxCoeff();
        history << fn << " ";
        if (fn < 1e-12) break;

        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3 * N, 3 * N);
        for (int j = 0; j < N; ++j) {
            const double v = X(j), s = X(N + j), C = X(2 * N + j);
            J(j, N + j) = chibar * C * std::exp(chibar * s) - 1.0;
            J(j, 2 * N + j) = std::exp(chibar * s);
            J(N + j, j) = -v + C * std::exp(chibar * v);
            J(N + j, N + j) = s - 1.0 / chibar;
            J(N + j, 2 * N + j) = std::exp(chibar * v) / chibar;
            J(2 * N + j, N + j) = 1.0;
            for (int k = 0; k < N; ++k)
                J(2 * N + j, k) = -2.0 * chibar * eps * X(k) * X(k) * G(j, k);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible())
            throw std::runtime_error(
                "solve_quasi: singular Jacobian (bifurcation proximity near d1cN*)");
        const Eigen::VectorXd dx = lu.solve(-F);
        double alpha = 1.0;
        for (int back = 0; back < 12; ++back) {
            Eigen::VectorXd Xn = X + alpha * dx;
            Eigen::VectorXd Fn = residual(Xn);
            if (Fn.cwiseAbs().maxCoeff() < fn || back == 11) {
                X = Xn;
                F = Fn;
                break;
            }
            alpha *= 0.5;
        }
    }
    if (F.cwiseAbs().maxCoeff() >= 1e-12)
        throw std::runtime_error("solve_quasi: Newton failed, residual history: " +
                                 history.str());

    QuasiEquilibrium qe;
    qe.locations = locations;
    qe.v_max.resize(N);
    qe.s.resize(N);
    qe.C.resize(N);
    qe.zeta_max.resize(N);
    for (int j = 0; j < N; ++j) {
        qe.v_max[j] = X(j);
        qe.s[j] = X(N + j);
        qe.C[j] = X(2 * N + j);
        qe.zeta_max[j] = 1.0 / (1.0 - 2.0 / (chibar * X(j)));
    }
    qe.residual_norm = F.cwiseAbs().maxCoeff();
    qe.newton_iterations = it;
    return qe;
}

QuasiJacobianReport quasi_jacobian(const SpikeEquilibrium& eq, const ModelParams& p) {
    const int N = int(eq.locations.size());
    auto set = assemble_matrices(p, eq.locations);
    QuasiJacobianReport rep;
    const double coef = 3.0 / (2.0 - eq.chibar * eq.v_max0);
    rep.J = Eigen::MatrixXd::Identity(N, N) - coef * set.G / set.a_g;
    rep.eig_closed_form.resize(N);
    for (int j = 0; j < N; ++j) {
        const double sigma_ratio = set.sigma(j).real() / set.sigma(0).real();
        rep.eig_closed_form(j) = 1.0 - coef * sigma_ratio;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(rep.J);
    rep.eig_dense = es.eigenvalues().real();
    std::sort(rep.eig_dense.data(), rep.eig_dense.data() + N);
    return rep;
}

// ---------------------------------------------------------------------------
// composite profile

SpikeProfile::SpikeProfile(const ModelParams& p, std::vector<double> locations,
                           std::vector<double> v_max, std::vector<double> s,
                           std::vector<double> C)
    : p_(p),
      eps_(p.eps()),
      chibar_(p.chibar()),
      xk_(std::move(locations)),
      vmax_(std::move(v_max)),
      s_(std::move(s)),
      C_(std::move(C)) {
    q0_.resize(xk_.size());
    for (size_t k = 0; k < xk_.size(); ++k) {
        // Q(v_max) = -v + C e^{chibar v}, curvature of the orbit at the peak
        q0_[k] = -vmax_[k] + C_[k] * std::exp(chibar_ * vmax_[k]);
        if (!(q0_[k] > 0.0))
            throw std::invalid_argument("SpikeProfile: non-positive peak curvature");
    }
    build_tables();
}

// Handoff where the sech^2 core argument reaches 0.15. The explicit core
// formula is exact at the peak but degrades like (argument)^2/v_max (it even
// turns negative near argument 1.7 at realistic amplitudes), while the
// implicit inner solution is uniformly accurate; a small window keeps the
// dispatch seam below ~1%.
double SpikeProfile::sub_inner_halfwidth(int k) const {
    return eps_ * 0.3 / (chibar_ * vmax_[k]);
}

double SpikeProfile::inner_halfwidth(int k) const {
    double room = std::min(xk_[k] + 1.0, 1.0 - xk_[k]);
    if (k > 0) room = std::min(room, 0.5 * (xk_[k] - xk_[k - 1]));
    if (k + 1 < int(xk_.size())) room = std::min(room, 0.5 * (xk_[k + 1] - xk_[k]));
    return std::min(10.0 * eps_, 0.8 * room);
}

double SpikeProfile::first_integral(int k, double V, double Vprime) const {
    const double K = 0.5 * (s_[k] * s_[k] - V * V) +
                     (C_[k] / chibar_) * (std::exp(chibar_ * V) - std::exp(chibar_ * s_[k]));
    return 0.5 * Vprime * Vprime + K;
}

// -2K(xi) along the orbit, anchored at whichever turning point is closer so
// the double zeros at xi = s and xi = vmax are hit without cancellation.
double SpikeProfile::minus2K(int k, double xi) const {
    const double vm = vmax_[k], s = s_[k], C = C_[k];
    if (xi >= 0.5 * (vm + s)) {
        const double h = vm - xi;
        return (2.0 * C / chibar_) * std::exp(chibar_ * vm) *
                   (-std::expm1(-chibar_ * h)) -
               h * (2.0 * vm - h);
    }
    const double g = xi - s;
    return g * (xi + s) -
           (2.0 * C / chibar_) * std::exp(chibar_ * s) * std::expm1(chibar_ * g);
}

// -2K expressed in the peak offset h = vmax - xi, so tiny offsets are not
// destroyed by forming xi first.
double SpikeProfile::minus2K_peak(int k, double h) const {
    const double vm = vmax_[k], C = C_[k];
    if (h >= 0.5 * (vm - s_[k])) return minus2K(k, vm - h);
    return (2.0 * C / chibar_) * std::exp(chibar_ * vm) *
               (-std::expm1(-chibar_ * h)) -
           h * (2.0 * vm - h);
}

// y over a segment [Vb, Va] of the descending orbit, Va > Vb. When Va is the
// peak itself the square-root turning point is absorbed by Va - xi = w^2.
double SpikeProfile::segment_time(int k, double Va, double Vb) const {
    const double vm = vmax_[k];
    if (Va >= vm) {
        const double wmax = std::sqrt(std::max(vm - Vb, 0.0));
        auto f = [&](double w) {
            return 2.0 * w / std::sqrt(std::max(minus2K_peak(k, w * w), 1e-300));
        };
        return integrate<double>(f, 0.0, wmax, 1e-12, 1e-15, 2000);
    }
    auto f = [&](double xi) {
        return 1.0 / std::sqrt(std::max(minus2K(k, xi), 1e-300));
    };
    return integrate<double>(f, Vb, Va, 1e-12, 1e-15, 2000);
}

double SpikeProfile::travel_time(int k, double V) const {
    return segment_time(k, vmax_[k], V);
}

void SpikeProfile::build_tables() {
    tables_.resize(xk_.size());
    for (size_t k = 0; k < xk_.size(); ++k) {
        const double vm = vmax_[k], s = s_[k];
        const double span = vm - s;
        std::vector<double> V{vm};
        // geometric ladder of peak offsets, then of background gaps
        for (double h = span * 1e-13; h < 0.45 * span; h *= 1.7)
            V.push_back(vm - h);
        std::vector<double> tailside;
        for (double g = span * 1e-8; g < 0.45 * span; g *= 1.7)
            tailside.push_back(s + g);
        for (auto it = tailside.rbegin(); it != tailside.rend(); ++it)
            V.push_back(*it);
        auto& tab = tables_[int(k)];
        tab.V = V;
        tab.y.assign(V.size(), 0.0);
        for (size_t i = 1; i < V.size(); ++i)
            tab.y[i] = tab.y[i - 1] + segment_time(int(k), V[i - 1], V[i]);
    }
}

double SpikeProfile::inner_V0(int k, double y) const {
    const auto& tab = tables_[k];
    if (y <= 0.0) return vmax_[k];
    if (y >= tab.y.back())
        throw std::runtime_error("inner_V0: y beyond the tabulated inner range");
    // locate the bracketing table segment, then refine on the local integral
    size_t i = size_t(std::lower_bound(tab.y.begin(), tab.y.end(), y) -
                      tab.y.begin());
    // now y[i-1] <= y < y[i], orbit descends from V[i-1] to V[i]
    const double Va = tab.V[i - 1], Vb = tab.V[i];
    const double ybase = tab.y[i - 1];
    auto f = [&](double V) { return ybase + segment_time(k, Va, V) - y; };
    return brent(f, Vb, Va, 1e-13);
}

double SpikeProfile::outer(double x) const {
    double w = 0.0;
    for (size_t k = 0; k < xk_.size(); ++k)
        w += std::pow(vmax_[k], 3) * helmholtz_green(x, xk_[k], p_);
    return 2.0 / 3.0 * chibar_ * eps_ * w;
}

void SpikeProfile::uv(double x, double& u_out, double& v_out) const {
    // nearest spike
    int k = 0;
    double dist = std::abs(x - xk_[0]);
    for (size_t j = 1; j < xk_.size(); ++j) {
        const double d = std::abs(x - xk_[j]);
        if (d < dist) {
            dist = d;
            k = int(j);
        }
    }
    if (dist <= sub_inner_halfwidth(k)) {
        const double arg = 0.5 * chibar_ * vmax_[k] * (x - xk_[k]) / eps_;
        const double sech = 1.0 / std::cosh(arg);
        u_out = 0.5 * chibar_ * vmax_[k] * vmax_[k] * sech * sech;
        v_out = vmax_[k] + (1.0 / chibar_) * std::log(sech * sech);
        return;
    }
    if (dist <= inner_halfwidth(k)) {
        const double V = inner_V0(k, dist / eps_);
        v_out = V;
        u_out = C_[k] * std::exp(chibar_ * V);
        return;
    }
    u_out = v_out = outer(x);
}

double SpikeProfile::u(double x) const {
    double uu, vv;
    uv(x, uu, vv);
    return uu;
}

double SpikeProfile::v(double x) const {
    double uu, vv;
    uv(x, uu, vv);
    return vv;
}

SpikeProfile build_profile(const SpikeEquilibrium& eq, const ModelParams& p) {
    const int N = int(eq.locations.size());
    return SpikeProfile(p, eq.locations, std::vector<double>(N, eq.v_max0),
                        std::vector<double>(N, eq.s0), std::vector<double>(N, eq.C0));
}

SpikeProfile build_profile(const QuasiEquilibrium& eq, const ModelParams& p) {
    return SpikeProfile(p, eq.locations, eq.v_max, eq.s, eq.C);
}

double global_balance_residual(const SpikeProfile& prof, const ModelParams& p) {
    std::vector<double> cuts{-1.0};
    for (int k = 0; k < prof.spikes(); ++k) {
        const double xk = prof.locations()[k];
        for (double off : {-prof.inner_halfwidth(k), -prof.sub_inner_halfwidth(k), 0.0,
                           prof.sub_inner_halfwidth(k), prof.inner_halfwidth(k)}) {
            const double c = xk + off;
            if (c > -1.0 && c < 1.0) cuts.push_back(c);
        }
    }
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    auto f = [&](double x) {
        const double uu = prof.u(x);
        return uu * (p.ubar - uu);
    };
    double total = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] - cuts[i] > 1e-14)
            total += integrate<double>(f, cuts[i], cuts[i + 1], 1e-9, 1e-12, 3000);
    return total;
}

}  // namespace ksl
