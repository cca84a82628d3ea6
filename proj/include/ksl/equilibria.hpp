#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "ksl/model.hpp"

namespace ksl {

// Which scalar amplitude equation defines v_max0. The full equation is the
// module contract and feeds every stability/dynamics computation. The
// dominant-balance variant v^2/2 = (s0/chibar) e^{chibar (v - s0)} is the
// route the published reference tables follow; it is kept selectable so those
// tables can be reproduced verbatim.
enum class AmplitudeRoute { full_equation, dominant_balance };

struct SpikeEquilibrium {
    double v_max0 = 0.0;
    double s0 = 0.0;
    double C0 = 0.0;
    double a_g = 0.0;
    double chibar = 0.0;
    double residual = 0.0;  // amplitude-equation residual at the root
    std::vector<double> locations;

    double zeta0() const { return 1.0 / (1.0 - 2.0 / (chibar * v_max0)); }
    double a1() const { return (chibar * v_max0 - 2.0) / 3.0; }
    double a_coef() const { return chibar * v_max0 / 3.0 - 0.5; }
    double u_max() const { return 0.5 * chibar * v_max0 * v_max0; }
};

struct QuasiEquilibrium {
    std::vector<double> locations;
    std::vector<double> v_max, s, C, zeta_max;
    double residual_norm = 0.0;
    int newton_iterations = 0;
};

// Symmetric N-spike steady state at the equally spaced locations.
SpikeEquilibrium solve_symmetric(const ModelParams& p, int N,
                                 AmplitudeRoute route = AmplitudeRoute::full_equation);

// Amplitude alone, gated only by the positivity threshold d1 > d1pN (not by
// the resonance band): threshold fixed-point iterations may legitimately step
// across resonant d1 values where the amplitude is still well defined.
double symmetric_amplitude(const ModelParams& p, int N,
                           AmplitudeRoute route = AmplitudeRoute::full_equation);

// General quasi-equilibrium at sorted interior locations: Newton on the 3N
// coupled equations, warm-started from the symmetric solution (or an explicit
// warm start). Residual below 1e-12 on success.
QuasiEquilibrium solve_quasi(const ModelParams& p, const std::vector<double>& locations,
                             const QuasiEquilibrium* warm = nullptr);

// Residual of the spike-amplitude relation
// -v^2/2 + s^2/2 + (C/chibar) e^{chibar v} - s/chibar.
double vmax_amplitude_eq_check(double v_max, double s, double C, double chibar);

// Solves the amplitude relation for v_max at a prescribed background level s
// (with C = s e^{-chibar s}); used for sensitivity checks.
double solve_vmax_given_s(double s, double chibar);

struct QuasiJacobianReport {
    Eigen::MatrixXd J;                // I - 3/(2 - chibar v) G / a_g
    Eigen::VectorXd eig_closed_form;  // mode order j = 1..N
    Eigen::VectorXd eig_dense;        // ascending, from a dense solver
};
QuasiJacobianReport quasi_jacobian(const SpikeEquilibrium& eq, const ModelParams& p);

// Composite spatial profile: explicit sech^2 sub-inner core, implicit inner
// layer inverted by quadrature, Green's-superposition outer field.
class SpikeProfile {
  public:
    SpikeProfile(const ModelParams& p, std::vector<double> locations,
                 std::vector<double> v_max, std::vector<double> s,
                 std::vector<double> C);

    double u(double x) const;
    double v(double x) const;
    void uv(double x, double& u_out, double& v_out) const;

    int spikes() const { return int(xk_.size()); }
    const std::vector<double>& backgrounds() const { return s_; }
    const std::vector<double>& core_constants() const { return C_; }
    double chibar() const { return chibar_; }
    double sub_inner_halfwidth(int k) const;  // in x units
    // 10 eps, capped so the inner expansion never swallows a wall or a
    // neighboring spike (the no-flux walls live in the outer representation)
    double inner_halfwidth(int k) const;
    const std::vector<double>& locations() const { return xk_; }
    const std::vector<double>& amplitudes() const { return vmax_; }

    // Inner solution V0 at inner coordinate y >= 0 for spike k.
    double inner_V0(int k, double y) const;
    // first-integral value along the inner orbit (diagnostic; ~0)
    double first_integral(int k, double V, double Vprime) const;
    // -2K(xi) along the inner orbit of spike k, cancellation-free at both ends
    double minus2K(int k, double xi) const;
    // same quantity in terms of the peak offset h = v_max - xi, which stays
    // meaningful when h is far below the rounding scale of v_max
    double minus2K_peak(int k, double h) const;

  private:
    double outer(double x) const;
    double segment_time(int k, double Va, double Vb) const;
    double travel_time(int k, double V) const;  // y(V) by quadrature
    void build_tables();

    struct InnerTable {
        std::vector<double> V;  // descending from v_max toward s
        std::vector<double> y;  // cumulative travel time
    };

    ModelParams p_;
    double eps_, chibar_;
    std::vector<double> xk_, vmax_, s_, C_, q0_;
    std::vector<InnerTable> tables_;  // built eagerly; immutable afterwards
};

SpikeProfile build_profile(const SpikeEquilibrium& eq, const ModelParams& p);
SpikeProfile build_profile(const QuasiEquilibrium& eq, const ModelParams& p);

// Adaptive quadrature of u(ubar - u) across the composite profile.
double global_balance_residual(const SpikeProfile& prof, const ModelParams& p);

}  // namespace ksl
