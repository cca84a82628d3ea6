#pragma once

#include <cmath>
#include <vector>

namespace ksl {

// Physical and numerical parameters of the 1D chemotaxis-logistic system
//   tau u_t = d1 u_xx - chi (u v_x)_x + mu u (ubar - u)
//       v_t = d2 v_xx - v + u
// on |x| < 1 with no-flux walls. d2 = eps^2 is the small chemical
// diffusivity; derived scalars are computed, never stored.
struct ModelParams {
    double d1 = 1.0;      // cellular diffusivity
    double d2 = 0.0004;   // chemical diffusivity, = eps^2
    double chi = 1.0;     // chemotactic drift
    double mu = 1.0;      // logistic rate
    double ubar = 2.0;    // carrying capacity
    double tau = 1.0;     // reaction time constant (>= 0)
    int N = 1;            // spike count

    double eps() const { return std::sqrt(d2); }
    double chibar() const { return chi / d1; }
    double theta() const { return std::sqrt(mu * ubar / d1); }

    // Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

struct AdmissibilityReport {
    double d1pN = 0.0;                 // positivity threshold 4 mu ubar / (N^2 pi^2)
    std::vector<double> d1Tm_list;     // resonances, m = 1..N-1, strictly decreasing
    bool in_admissible_set = false;
    double nearest_resonance_distance = 0.0;  // min over m of |d1-d1Tm|/d1Tm
};

// Relative half-width of the band around each resonance d1Tm inside which d1
// is treated as resonant (exact equality is excluded analytically; floating
// point needs a band).
inline constexpr double kResonanceBand = 1e-6;

AdmissibilityReport classify_d1(const ModelParams& p);

// Zero-eigenvalue crossing of the flat state u=v=0 on an interval of length L
// for mode m: d1 = mu ubar L^2 / (m^2 pi^2).
double turing_threshold(const ModelParams& p, double L, int m);

// Smallest d1 for which the outer solution of a quasi-equilibrium with the
// given (sorted, interior) spike locations stays positive:
// L_max^2 mu ubar / pi^2 with L_max the largest of the wall and gap distances.
double qe_positivity_threshold(const ModelParams& p,
                               const std::vector<double>& locations);

// Equally spaced steady-state locations x_j = -1 + (2j-1)/N, j = 1..N.
std::vector<double> equilibrium_locations(int N);

}  // namespace ksl
