#include "ksl/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ksl/kernels.hpp"

namespace ksl {

PDEGrid PDEGrid::make(int n) {
    if (n < 8) throw std::invalid_argument("PDEGrid: need at least 8 cells");
    PDEGrid g;
    g.n_cells = n;
    g.h = 2.0 / n;
    g.centers.resize(n);
    for (int i = 0; i < n; ++i) g.centers[i] = -1.0 + (i + 0.5) * g.h;
    return g;
}

int PDEGrid::default_cells(const ModelParams& p) {
    return std::max(2048, int(std::ceil(40.0 / p.eps())));
}

PDEState flat_state(const ModelParams& p, const PDEGrid& grid) {
    PDEState s;
    s.u.assign(grid.n_cells, p.ubar);
    s.v.assign(grid.n_cells, p.ubar);
    return s;
}

PDEState state_from_profile(const SpikeProfile& prof, const PDEGrid& grid) {
    PDEState s;
    s.u.resize(grid.n_cells);
    s.v.resize(grid.n_cells);
    for (int i = 0; i < grid.n_cells; ++i)
        prof.uv(grid.centers[i], s.u[i], s.v[i]);
    return s;
}

PDESolver::PDESolver(const ModelParams& p, const PDEGrid& grid)
    : p_(p), grid_(grid) {
    p_.validate();
    if (!(p_.tau > 0.0))
        throw std::invalid_argument("PDESolver: stepping needs tau > 0");
    const int n = grid_.n_cells;
    cu_.resize(n);
    cv_.resize(n);
    du_.resize(n);
    dv_.resize(n);
    flux_.resize(n + 1);
    rhs_.resize(n);
    bu_.resize(n);
    bv_.resize(n);
    scratch_.resize(n);
}

void PDESolver::set_d1(double d1, bool chi_tracks) {
    if (chi_tracks) p_.chi = p_.chi / p_.d1 * d1;
    p_.d1 = d1;
}

// Thomas factorization for (a I - b L) with Neumann ends: interior rows
// (-b, a + 2b, -b), wall rows (a + b, -b). Stores the forward-eliminated
// diagonal; the constant off-diagonal is -b.
namespace {

void factor_tridiag(int n, double a, double b, std::vector<double>& diag) {
    diag[0] = a + b;
    for (int i = 1; i < n; ++i) {
        const double m = b * b / diag[i - 1];
        diag[i] = a + ((i == n - 1) ? b : 2.0 * b) - m;
    }
}

void solve_tridiag(int n, double b, const std::vector<double>& diag,
                   std::vector<double>& x) {
    // forward sweep (rhs stored in x)
    for (int i = 1; i < n; ++i) x[i] += b * x[i - 1] / diag[i - 1];
    x[n - 1] /= diag[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (x[i] + b * x[i + 1]) / diag[i];
}

}  // namespace

void PDESolver::factor_u(double dt) {
    const double b = dt * p_.d1 / (p_.tau * grid_.h * grid_.h);
    factor_tridiag(grid_.n_cells, 1.0, b, du_);
    fact_dt_u_ = dt;
    fact_d1_ = p_.d1;
    cu_[0] = b;
}

void PDESolver::factor_v(double dt) {
    const double b = dt * p_.d2 / (grid_.h * grid_.h);
    factor_tridiag(grid_.n_cells, 1.0 + dt, b, dv_);
    fact_dt_v_ = dt;
    cv_[0] = b;
}

// One IMEX step in increment form: A (u^{n+1} - u^n) = full residual of the
// old state. Constant states then remain bitwise fixed points because their
// residual vanishes exactly in floating point.
void PDESolver::step(PDEState& s, double dt) {
    const int n = grid_.n_cells;
    const double inv_h = 1.0 / grid_.h;
    const double inv_h2 = inv_h * inv_h;
    const auto& k = kernels::ops();

    if (dt != fact_dt_u_ || p_.d1 != fact_d1_) factor_u(dt);
    if (dt != fact_dt_v_) factor_v(dt);

    // residual of u: chemotaxis + logistic + diffusion of the old state
    k.chemotaxis_flux(n, s.u.data(), s.v.data(), inv_h, p_.chi, flux_.data());
    k.explicit_rhs(n, s.u.data(), flux_.data(), inv_h, p_.mu, p_.ubar,
                   rhs_.data());
    k.laplacian(n, s.u.data(), inv_h2, scratch_.data());
    k.axpy(n, rhs_.data(), p_.d1, scratch_.data(), bu_.data());
    for (int i = 0; i < n; ++i) bu_[i] *= dt / p_.tau;
    solve_tridiag(n, cu_[0], du_, bu_);  // bu_ now holds the u increment
    k.axpy(n, s.u.data(), 1.0, bu_.data(), bu_.data());
    if (k.min_val(n, bu_.data()) < 0.0)
        throw std::runtime_error("positivity violation in u");

    // residual of v: production from the updated u, decay and diffusion of
    // the old state
    k.laplacian(n, s.v.data(), inv_h2, scratch_.data());
    for (int i = 0; i < n; ++i)
        bv_[i] = dt * (bu_[i] - s.v[i] + p_.d2 * scratch_[i]);
    solve_tridiag(n, cv_[0], dv_, bv_);
    k.axpy(n, s.v.data(), 1.0, bv_.data(), bv_.data());
    if (k.min_val(n, bv_.data()) < 0.0)
        throw std::runtime_error("positivity violation in v");

    s.u.swap(bu_);
    s.v.swap(bv_);
    s.t += dt;
    ++stats_.steps;
    stats_.dt_last = dt;
}

double PDESolver::cfl_dt(const PDEState& s) const {
    const auto& k = kernels::ops();
    const double speed =
        p_.chi * k.max_face_speed(grid_.n_cells, s.v.data(), 1.0 / grid_.h);
    if (speed <= 0.0) return dt_max;
    // explicit terms enter scaled by dt/tau, so the advective limit does too
    return std::min(dt_max, cfl_safety * p_.tau * grid_.h / speed);
}

void PDESolver::advance(PDEState& s, double span) {
    const double t_stop = s.t + span;
    if (dt_next_ <= 0.0) dt_next_ = std::min(cfl_dt(s), 1e-4);
    while (s.t < t_stop - 1e-13) {
        double dt = std::min({dt_next_, cfl_dt(s), t_stop - s.t});
        for (;;) {
            try {
                step(s, dt);
                break;
            } catch (const std::runtime_error&) {
                ++stats_.positivity_rejects;
                dt *= 0.5;
                if (dt < dt_min)
                    throw std::runtime_error("PDESolver: dt underflow");
            }
        }
        dt_next_ = 1.25 * dt;
    }
}

SpikeInfo detect_spikes(const PDEState& s, const PDEGrid& grid,
                        const ModelParams& p, double prominence_factor) {
    SpikeInfo info;
    const int n = grid.n_cells;
    const double threshold = prominence_factor * p.ubar;
    for (int i = 1; i + 1 < n; ++i) {
        if (s.u[i] > threshold && s.u[i] >= s.u[i - 1] && s.u[i] > s.u[i + 1]) {
            const double denom = s.u[i - 1] - 2.0 * s.u[i] + s.u[i + 1];
            double xref = grid.centers[i];
            double uref = s.u[i];
            if (denom < 0.0) {
                const double delta =
                    0.5 * (s.u[i - 1] - s.u[i + 1]) / denom;
                xref += delta * grid.h;
                uref = s.u[i] - 0.25 * (s.u[i - 1] - s.u[i + 1]) * delta;
            }
            info.locations.push_back(xref);
            info.amplitudes.push_back(uref);
        }
    }
    // merge maxima belonging to the same spike (seeded profiles carry small
    // dispatch seams, marching states carry grid-level wiggles)
    const double merge_dist = 5.0 * p.eps();
    std::vector<double> mloc, mamp;
    for (size_t i = 0; i < info.locations.size(); ++i) {
        if (!mloc.empty() && info.locations[i] - mloc.back() < merge_dist) {
            if (info.amplitudes[i] > mamp.back()) {
                mloc.back() = info.locations[i];
                mamp.back() = info.amplitudes[i];
            }
        } else {
            mloc.push_back(info.locations[i]);
            mamp.push_back(info.amplitudes[i]);
        }
    }
    info.locations.swap(mloc);
    info.amplitudes.swap(mamp);
    // second-order wall extrapolation consistent with the no-flux walls
    auto wall = [&](double c0, double c1) { return (9.0 * c0 - c1) / 8.0; };
    info.u_left = wall(s.u[0], s.u[1]);
    info.u_right = wall(s.u[n - 1], s.u[n - 2]);
    info.v_left = wall(s.v[0], s.v[1]);
    info.v_right = wall(s.v[n - 1], s.v[n - 2]);
    return info;
}

SteadyResult run_to_steady(const ModelParams& p, const PDEGrid& grid,
                           PDEState initial, double tol, double t_max,
                           double check_interval) {
    PDESolver solver(p, grid);
    SteadyResult out;
    out.state = std::move(initial);
    std::vector<double> u_prev = out.state.u;
    const auto& k = kernels::ops();
    while (out.state.t < t_max) {
        solver.advance(out.state, check_interval);
        const double change =
            k.max_abs_diff(grid.n_cells, out.state.u.data(), u_prev.data());
        const double scale =
            std::max(1e-30, k.max_val(grid.n_cells, out.state.u.data()));
        out.residual = change / (check_interval * scale);
        u_prev = out.state.u;
        if (out.residual < tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

namespace {

// 2x2 block-tridiagonal LU (Thomas) for the interleaved (u_i, v_i) Newton
// systems of the pseudo-transient steady solver.
struct Block {
    double a00, a01, a10, a11;
};

Block inv2(const Block& b) {
    const double det = b.a00 * b.a11 - b.a01 * b.a10;
    return {b.a11 / det, -b.a01 / det, -b.a10 / det, b.a00 / det};
}

Block mul(const Block& x, const Block& y) {
    return {x.a00 * y.a00 + x.a01 * y.a10, x.a00 * y.a01 + x.a01 * y.a11,
            x.a10 * y.a00 + x.a11 * y.a10, x.a10 * y.a01 + x.a11 * y.a11};
}

Block sub(const Block& x, const Block& y) {
    return {x.a00 - y.a00, x.a01 - y.a01, x.a10 - y.a10, x.a11 - y.a11};
}

void block_thomas(std::vector<Block>& lower, std::vector<Block>& diag,
                  std::vector<Block>& upper, std::vector<double>& rhs) {
    const int n = int(diag.size());
    std::vector<Block> dinv(n);
    dinv[0] = inv2(diag[0]);
    for (int i = 1; i < n; ++i) {
        const Block m = mul(lower[i], dinv[i - 1]);
        diag[i] = sub(diag[i], mul(m, upper[i - 1]));
        rhs[2 * i] -= m.a00 * rhs[2 * i - 2] + m.a01 * rhs[2 * i - 1];
        rhs[2 * i + 1] -= m.a10 * rhs[2 * i - 2] + m.a11 * rhs[2 * i - 1];
        dinv[i] = inv2(diag[i]);
    }
    // back substitution
    double x0 = rhs[2 * (n - 1)], x1 = rhs[2 * (n - 1) + 1];
    rhs[2 * (n - 1)] = dinv[n - 1].a00 * x0 + dinv[n - 1].a01 * x1;
    rhs[2 * (n - 1) + 1] = dinv[n - 1].a10 * x0 + dinv[n - 1].a11 * x1;
    for (int i = n - 2; i >= 0; --i) {
        x0 = rhs[2 * i] - (upper[i].a00 * rhs[2 * i + 2] + upper[i].a01 * rhs[2 * i + 3]);
        x1 = rhs[2 * i + 1] -
             (upper[i].a10 * rhs[2 * i + 2] + upper[i].a11 * rhs[2 * i + 3]);
        rhs[2 * i] = dinv[i].a00 * x0 + dinv[i].a01 * x1;
        rhs[2 * i + 1] = dinv[i].a10 * x0 + dinv[i].a11 * x1;
    }
}

// steady residual of the discretization shared with the IMEX stepper
void steady_residual(const ModelParams& p, const PDEGrid& g,
                     const std::vector<double>& u, const std::vector<double>& v,
                     std::vector<double>& flux, std::vector<double>& lap,
                     std::vector<double>& Ru, std::vector<double>& Rv) {
    const int n = g.n_cells;
    const double inv_h = 1.0 / g.h;
    const double inv_h2 = inv_h * inv_h;
    const auto& k = kernels::ops();
    k.chemotaxis_flux(n, u.data(), v.data(), inv_h, p.chi, flux.data());
    k.explicit_rhs(n, u.data(), flux.data(), inv_h, p.mu, p.ubar, Ru.data());
    k.laplacian(n, u.data(), inv_h2, lap.data());
    k.axpy(n, Ru.data(), p.d1, lap.data(), Ru.data());
    k.laplacian(n, v.data(), inv_h2, lap.data());
    for (int i = 0; i < n; ++i) Rv[i] = p.d2 * lap[i] - v[i] + u[i];
}

}  // namespace

SteadyResult steady_newton(const ModelParams& p, const PDEGrid& grid,
                           PDEState initial, double tol, int max_outer) {
    const int n = grid.n_cells;
    const double inv_h = 1.0 / grid.h;
    const double inv_h2 = inv_h * inv_h;
    SteadyResult out;
    out.state = std::move(initial);
    auto& u = out.state.u;
    auto& v = out.state.v;

    std::vector<double> flux(n + 1), lap(n), Ru(n), Rv(n), rhs(2 * n);
    std::vector<Block> lower(n), diag(n), upper(n);
    const auto& k = kernels::ops();

    auto res_norm = [&] {
        steady_residual(p, grid, u, v, flux, lap, Ru, Rv);
        double m = 0.0;
        for (int i = 0; i < n; ++i)
            m = std::max({m, std::abs(Ru[i]), std::abs(Rv[i])});
        return m;
    };

    double dt = 1e-3;
    double rn = res_norm();
    const double rn0 = rn;
    const double rscale = inv_h2 * std::max(1.0, k.max_val(n, u.data()));
    // deep in the basin the infinity-norm need not fall monotonically along
    // full Newton steps; switch to an undamped polish phase there
    bool polish = false;
    std::vector<double> best_u, best_v;
    double best_rn = rn;
    int since_best = 0;
    for (int outer = 0; outer < max_outer; ++outer) {
        if (rn < tol * rscale) {
            out.converged = true;
            break;
        }
        if (!polish && rn < std::max(1e-4 * rn0, 10.0 * tol * rscale)) {
            polish = true;
            dt = 1e12;
            best_u = u;
            best_v = v;
            best_rn = rn;
            since_best = 0;
        }
        // assemble (I/dt - J)
        steady_residual(p, grid, u, v, flux, lap, Ru, Rv);
        for (int i = 0; i < n; ++i) {
            const double sl = (v[i] - (i > 0 ? v[i - 1] : v[i])) * inv_h;
            const double sr = ((i + 1 < n ? v[i + 1] : v[i]) - v[i]) * inv_h;
            const double ul_up = (i > 0) ? (sl > 0.0 ? u[i - 1] : u[i]) : 0.0;
            const double ur_up = (i + 1 < n) ? (sr > 0.0 ? u[i] : u[i + 1]) : 0.0;
            const double dldiff = (i > 0 ? 1.0 : 0.0);
            const double drdiff = (i + 1 < n ? 1.0 : 0.0);
            // u-row of J
            double Juu_l = p.d1 * inv_h2 * dldiff;
            double Juu_r = p.d1 * inv_h2 * drdiff;
            double Juu_c = -p.d1 * inv_h2 * (dldiff + drdiff) +
                           p.mu * (p.ubar - 2.0 * u[i]);
            if (i > 0 && sl > 0.0) Juu_l += p.chi * sl * inv_h;
            if (i > 0 && sl <= 0.0) Juu_c += p.chi * sl * inv_h;
            if (i + 1 < n && sr > 0.0) Juu_c -= p.chi * sr * inv_h;
            if (i + 1 < n && sr <= 0.0) Juu_r -= p.chi * sr * inv_h;
            double Juv_l = -p.chi * ul_up * inv_h2 * dldiff;
            double Juv_c = p.chi * (ul_up + ur_up) * inv_h2;
            double Juv_r = -p.chi * ur_up * inv_h2 * drdiff;
            // v-row of J
            const double Jvv_l = p.d2 * inv_h2 * dldiff;
            const double Jvv_r = p.d2 * inv_h2 * drdiff;
            const double Jvv_c = -p.d2 * inv_h2 * (dldiff + drdiff) - 1.0;

            const double ptc = 1.0 / dt;
            lower[i] = {-Juu_l, -Juv_l, 0.0, -Jvv_l};
            diag[i] = {ptc - Juu_c, -Juv_c, -1.0, ptc - Jvv_c};
            upper[i] = {-Juu_r, -Juv_r, 0.0, -Jvv_r};
            rhs[2 * i] = Ru[i];
            rhs[2 * i + 1] = Rv[i];
        }
        block_thomas(lower, diag, upper, rhs);

        // accept any positivity-preserving step; the pseudo time step follows
        // switched evolution relaxation (grows as the residual falls, shrinks
        // when it rises), so the iteration tracks the damped dynamics into
        // the attracting basin instead of requiring monotone descent
        double alpha = 1.0;
        bool accepted = false;
        for (int back = 0; back < 30; ++back) {
            std::vector<double> un(n), vn(n);
            bool pos = true;
            for (int i = 0; i < n; ++i) {
                un[i] = u[i] + alpha * rhs[2 * i];
                vn[i] = v[i] + alpha * rhs[2 * i + 1];
                pos = pos && un[i] >= 0.0 && vn[i] >= 0.0;
            }
            if (pos) {
                std::swap(u, un);
                std::swap(v, vn);
                const double rn_new = res_norm();
                if (!polish)
                    dt = std::min(dt * std::clamp(rn / std::max(rn_new, 1e-300),
                                                  0.3, 2.0),
                                  1e8);
                rn = rn_new;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (polish && accepted) {
            if (rn < best_rn) {
                best_rn = rn;
                best_u = u;
                best_v = v;
                since_best = 0;
            } else if (++since_best > 6) {
                break;
            }
        }
        if (!accepted) {
            if (polish) break;
            dt *= 0.2;
            if (dt < 1e-12) break;
        }
    }
    if (polish && best_rn < rn) {
        u = best_u;
        v = best_v;
        rn = best_rn;
    }
    if (rn < tol * rscale) out.converged = true;
    out.residual = rn / rscale;
    return out;
}

RampResult ramp_experiment(const ModelParams& p, const PDEGrid& grid,
                           PDEState initial, const RampSchedule& schedule) {
    PDESolver solver(p, grid);
    RampResult out;
    out.final_state = std::move(initial);
    auto d1_at = [&](double t) {
        if (t >= schedule.t_ramp) return schedule.d1_end;
        return schedule.d1_begin +
               (schedule.d1_end - schedule.d1_begin) * t / schedule.t_ramp;
    };
    int last_count = -1;
    double first_event_t = -1.0;
    for (double t = 0.0; t < schedule.t_end - 1e-12;
         t += schedule.check_interval) {
        solver.set_d1(d1_at(out.final_state.t), schedule.chi_tracks_d1);
        solver.advance(out.final_state, schedule.check_interval);
        auto spikes = detect_spikes(out.final_state, grid, solver.params());
        const int count = int(spikes.locations.size());
        if (count != last_count) {
            out.events.push_back({out.final_state.t, d1_at(out.final_state.t),
                                  count, spikes.locations});
            if (last_count >= 0 && first_event_t < 0.0)
                first_event_t = out.final_state.t;
            last_count = count;
        }
        if (schedule.stop_after_event > 0.0 && first_event_t > 0.0 &&
            out.final_state.t > first_event_t + schedule.stop_after_event)
            break;
    }
    return out;
}

}  // namespace ksl
