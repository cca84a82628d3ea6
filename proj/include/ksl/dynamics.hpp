#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ksl/equilibria.hpp"
#include "ksl/model.hpp"

namespace ksl {

// Slow spike motion: ODEs for the centers coupled to the per-step
// quasi-equilibrium algebraic solve. Time is the original t of the evolution
// problem; the eps^3 scale sits inside the vector field.

struct DAEState {
    double t = 0.0;
    std::vector<double> locations;
    QuasiEquilibrium qe;          // converged algebraic state at `locations`
    std::vector<double> velocities;
};

// Velocities for a converged quasi-equilibrium; beta holds the per-spike speed
// coefficients (quadrature route). Throws on unsorted locations.
std::vector<double> dae_rhs(const ModelParams& p, const QuasiEquilibrium& qe,
                            const std::vector<double>& beta);

// Quadrature beta_j for every spike of the given state.
std::vector<double> dae_betas(const ModelParams& p, const QuasiEquilibrium& qe);

struct Trajectory {
    std::vector<double> t;
    std::vector<std::vector<double>> x;      // per sample: locations
    std::vector<std::vector<double>> v_max;  // per sample: amplitudes
    int steps_accepted = 0;
    int steps_rejected = 0;
};

struct IntegrateOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double initial_dt = 1.0;
    double max_dt = 1e30;
    double collision_eps_multiple = 5.0;  // halt when spikes come this close (in eps)
};

// Adaptive embedded-pair integration (Bogacki-Shampine 3(2)) with per-step
// algebraic re-solve warm-started from the previous step; samples at every
// accepted step.
Trajectory integrate(const ModelParams& p, std::vector<double> x0, double t_end,
                     const IntegrateOptions& opt = {});

// Linear interpolation of a trajectory at arbitrary times within its range.
std::vector<double> trajectory_at(const Trajectory& tr, double t);

// M-tilde of the DAE linearization about the symmetric steady state
// (identical to the small-eigenvalue matrix).
Eigen::MatrixXd linearize_at_equilibrium(const ModelParams& p,
                                         const SpikeEquilibrium& eq);

}  // namespace ksl
