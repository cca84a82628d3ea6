#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ksl/equilibria.hpp"
#include "ksl/model.hpp"

namespace ksl {

// Finite-volume IMEX solver for the full evolution problem: implicit
// diffusion, conservative upwinded chemotaxis flux and explicit logistic
// kinetics, no-flux walls. Serves as the independent oracle for the
// asymptotic formulas.

struct PDEGrid {
    int n_cells = 0;
    double h = 0.0;
    std::vector<double> centers;

    static PDEGrid make(int n);
    // max(2048, ceil(40/eps)) so the sech^2 core keeps >= 8 cells
    static int default_cells(const ModelParams& p);
};

struct PDEState {
    std::vector<double> u, v;
    double t = 0.0;
};

PDEState flat_state(const ModelParams& p, const PDEGrid& grid);
PDEState state_from_profile(const SpikeProfile& prof, const PDEGrid& grid);

struct StepStats {
    long steps = 0;
    long positivity_rejects = 0;
    double dt_last = 0.0;
};

class PDESolver {
  public:
    PDESolver(const ModelParams& p, const PDEGrid& grid);

    // advance by exactly one IMEX step of size dt; throws std::runtime_error
    // on a positivity violation (caller decides how to shrink dt)
    void step(PDEState& s, double dt);

    // advance to s.t + span with the adaptive controller
    void advance(PDEState& s, double span);

    // time-varying coefficients (used by ramp experiments)
    void set_d1(double d1, bool chi_tracks);

    double cfl_dt(const PDEState& s) const;
    const StepStats& stats() const { return stats_; }
    const ModelParams& params() const { return p_; }

    double cfl_safety = 0.45;
    double dt_max = 0.05;
    double dt_min = 1e-14;

  private:
    void factor_u(double dt);
    void factor_v(double dt);

    ModelParams p_;
    PDEGrid grid_;
    StepStats stats_;
    double dt_next_ = 0.0;
    // cached Thomas factorizations (refreshed when dt or d1 changes)
    double fact_dt_u_ = -1.0, fact_dt_v_ = -1.0, fact_d1_ = -1.0;
    std::vector<double> cu_, cv_;            // factored upper diagonals
    std::vector<double> du_, dv_;            // factored main diagonals
    std::vector<double> flux_, rhs_, bu_, bv_, scratch_;
};

struct SpikeInfo {
    std::vector<double> locations;
    std::vector<double> amplitudes;   // u at the refined maxima
    double u_left = 0.0, u_right = 0.0;
    double v_left = 0.0, v_right = 0.0;
};

// local maxima of u above prominence_factor * ubar with parabolic sub-cell
// refinement; boundary values extrapolated to the walls from the wall cells
SpikeInfo detect_spikes(const PDEState& s, const PDEGrid& grid,
                        const ModelParams& p, double prominence_factor = 1.25);

struct SteadyResult {
    PDEState state;
    double residual = 0.0;  // relative change per unit time at exit
    bool converged = false;
};

// marches until the relative change per unit time drops below tol (checked
// every check_interval time units) or t exceeds t_max
// True-dynamics marching; reports non-convergence (itself informative: an
// instability of the state) instead of throwing.
SteadyResult run_to_steady(const ModelParams& p, const PDEGrid& grid,
                           PDEState initial, double tol = 1e-7,
                           double t_max = 400.0, double check_interval = 1.0);

// Steady states by pseudo-transient continuation: backward-Euler Newton steps
// on the same spatial discretization with a growing pseudo time step. Finds
// the steady solution regardless of the finite-tau (Hopf) dynamics that can
// keep explicit marching oscillating forever; use run_to_steady when the
// point is to observe the dynamics.
SteadyResult steady_newton(const ModelParams& p, const PDEGrid& grid,
                           PDEState initial, double tol = 1e-8,
                           int max_outer = 400);

struct RampEvent {
    double t = 0.0;
    double d1 = 0.0;
    int spike_count = 0;
    std::vector<double> locations;
};

struct RampSchedule {
    double d1_begin = 1.0;
    double d1_end = 3.0;
    double t_ramp = 400.0;    // linear ramp duration
    double t_end = 400.0;     // run until here (>= t_ramp)
    bool chi_tracks_d1 = true;  // keep chibar fixed while d1 moves
    double check_interval = 1.0;
    // stop this long after the first spike-count change (0: run to t_end)
    double stop_after_event = 0.0;
};

struct RampResult {
    std::vector<RampEvent> events;  // logged whenever the count changes
    PDEState final_state;
};

RampResult ramp_experiment(const ModelParams& p, const PDEGrid& grid,
                           PDEState initial, const RampSchedule& schedule);

}  // namespace ksl
