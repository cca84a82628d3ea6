#include "ksl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ksl/greens.hpp"
#include "ksl/smalleig.hpp"

namespace ksl {

std::vector<double> dae_rhs(const ModelParams& p, const QuasiEquilibrium& qe,
                            const std::vector<double>& beta) {
    const int N = int(qe.locations.size());
    if (int(beta.size()) != N) throw std::invalid_argument("dae_rhs: beta size");
    const double chibar = p.chibar();
    const double eps3 = std::pow(p.eps(), 3);
    std::vector<double> vel(N);
    for (int j = 0; j < N; ++j) {
        double force = std::pow(qe.v_max[j], 3) *
                       green_regular_x(qe.locations[j], p);
        for (int k = 0; k < N; ++k)
            if (k != j)
                force += std::pow(qe.v_max[k], 3) *
                         helmholtz_green_x(qe.locations[j], qe.locations[k], p);
        vel[j] = 2.0 / 3.0 * chibar * eps3 * beta[j] * force;
    }
    return vel;
}

std::vector<double> dae_betas(const ModelParams& p, const QuasiEquilibrium& qe) {
    SpikeProfile prof = build_profile(qe, p);
    std::vector<double> beta(qe.locations.size());
    for (int k = 0; k < int(beta.size()); ++k) beta[k] = beta_speed(prof, k);
    return beta;
}

namespace {

QuasiEquilibrium algebraic_solve(const ModelParams& p,
                                 const std::vector<double>& x,
                                 const QuasiEquilibrium* warm) {
    try {
        return solve_quasi(p, x, warm);
    } catch (const std::runtime_error&) {
        // retry from the symmetric seed before giving up
        return solve_quasi(p, x, nullptr);
    }
}

}  // namespace

Trajectory integrate(const ModelParams& p, std::vector<double> x0, double t_end,
                     const IntegrateOptions& opt) {
    const int N = int(x0.size());
    const double eps = p.eps();
    Trajectory tr;

    QuasiEquilibrium qe = solve_quasi(p, x0);
    std::vector<double> beta = dae_betas(p, qe);

    auto guard = [&](const std::vector<double>& x) {
        double gap = std::min(x.front() + 1.0, 1.0 - x.back());
        for (int j = 0; j + 1 < N; ++j) gap = std::min(gap, x[j + 1] - x[j]);
        if (gap < opt.collision_eps_multiple * eps)
            throw std::runtime_error(
                "integrate: spikes within " +
                std::to_string(opt.collision_eps_multiple) + " eps of collision");
    };
    guard(x0);

    auto f = [&](const std::vector<double>& x, QuasiEquilibrium& scratch) {
        scratch = algebraic_solve(p, x, &qe);
        return dae_rhs(p, scratch, beta);
    };

    auto record = [&](double t, const std::vector<double>& x,
                      const QuasiEquilibrium& state) {
        tr.t.push_back(t);
        tr.x.push_back(x);
        tr.v_max.push_back(state.v_max);
    };

    double t = 0.0, dt = opt.initial_dt;
    record(t, x0, qe);
    QuasiEquilibrium s1, s2, s3;
    std::vector<double> k1 = f(x0, s1);
    auto axpy = [N](const std::vector<double>& x, double a,
                    const std::vector<double>& k) {
        std::vector<double> y(N);
        for (int j = 0; j < N; ++j) y[j] = x[j] + a * k[j];
        return y;
    };

    while (t < t_end) {
        dt = std::min({dt, opt.max_dt, t_end - t});
        bool accepted = false;
        for (int tries = 0; tries < 60 && !accepted; ++tries) {
            std::vector<double> x2, x3, xn, k2, k3, k4;
            try {
                x2 = axpy(x0, 0.5 * dt, k1);
                k2 = f(x2, s1);
                x3 = axpy(x0, 0.75 * dt, k2);
                k3 = f(x3, s2);
                xn.resize(N);
                for (int j = 0; j < N; ++j)
                    xn[j] = x0[j] + dt * (2.0 / 9.0 * k1[j] + 1.0 / 3.0 * k2[j] +
                                          4.0 / 9.0 * k3[j]);
                guard(xn);
                QuasiEquilibrium qen;
                k4 = f(xn, qen);
                double err = 0.0;
                for (int j = 0; j < N; ++j) {
                    const double e = dt * (-5.0 / 72.0 * k1[j] + 1.0 / 12.0 * k2[j] +
                                           1.0 / 9.0 * k3[j] - 1.0 / 8.0 * k4[j]);
                    const double sc = opt.abs_tol + opt.rel_tol * std::abs(xn[j]);
                    err = std::max(err, std::abs(e) / sc);
                }
                if (err <= 1.0) {
                    t += dt;
                    x0 = xn;
                    qe = qen;
                    k1 = k4;  // FSAL
                    beta = dae_betas(p, qe);
                    record(t, x0, qe);
                    ++tr.steps_accepted;
                    accepted = true;
                } else {
                    ++tr.steps_rejected;
                }
                const double fac =
                    std::clamp(0.9 * std::pow(1.0 / std::max(err, 1e-12), 1.0 / 3.0),
                               0.2, 5.0);
                dt *= fac;
            } catch (const std::runtime_error& e) {
                // algebraic failure or collision at a trial state: shrink
                if (std::string(e.what()).find("collision") != std::string::npos &&
                    dt < 16.0 * eps)
                    throw;
                dt *= 0.25;
                ++tr.steps_rejected;
                if (dt < 1e-12)
                    throw std::runtime_error(
                        "integrate: step-size collapse (algebraic Jacobian "
                        "degenerating near d1cN*)");
            }
        }
        if (!accepted)
            throw std::runtime_error("integrate: no accepted step after retries");
    }
    return tr;
}

std::vector<double> trajectory_at(const Trajectory& tr, double t) {
    if (tr.t.empty()) throw std::invalid_argument("trajectory_at: empty trajectory");
    if (t <= tr.t.front()) return tr.x.front();
    if (t >= tr.t.back()) return tr.x.back();
    const auto it = std::lower_bound(tr.t.begin(), tr.t.end(), t);
    const size_t i = size_t(it - tr.t.begin());
    const double t0 = tr.t[i - 1], t1 = tr.t[i];
    const double w = (t - t0) / (t1 - t0);
    std::vector<double> x(tr.x[i].size());
    for (size_t j = 0; j < x.size(); ++j)
        x[j] = (1.0 - w) * tr.x[i - 1][j] + w * tr.x[i][j];
    return x;
}

Eigen::MatrixXd linearize_at_equilibrium(const ModelParams& p,
                                         const SpikeEquilibrium& eq) {
    auto g = assemble_matrices(p, eq.locations);
    return build_matrix_M(p, eq, g).M_tilde;
}

}  // namespace ksl
