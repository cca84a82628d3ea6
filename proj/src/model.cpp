#include "ksl/model.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ksl {

void ModelParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0))
            throw std::invalid_argument(std::string(name) + " must be > 0");
    };
    positive(d1, "d1");
    positive(d2, "d2");
    positive(chi, "chi");
    positive(mu, "mu");
    positive(ubar, "ubar");
    if (!(tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
    if (N < 1) throw std::invalid_argument("N must be >= 1");
}

AdmissibilityReport classify_d1(const ModelParams& p) {
    p.validate();
    const double pi2 = std::numbers::pi * std::numbers::pi;
    AdmissibilityReport r;
    r.d1pN = 4.0 * p.mu * p.ubar / (double(p.N) * p.N * pi2);
    for (int m = 1; m <= p.N - 1; ++m)
        r.d1Tm_list.push_back(4.0 * p.mu * p.ubar / (double(m) * m * pi2));
    r.nearest_resonance_distance = std::numeric_limits<double>::infinity();
    for (double d1T : r.d1Tm_list)
        r.nearest_resonance_distance =
            std::min(r.nearest_resonance_distance, std::abs(p.d1 - d1T) / d1T);
    r.in_admissible_set = p.d1 > r.d1pN &&
                          r.nearest_resonance_distance > kResonanceBand;
    return r;
}

double turing_threshold(const ModelParams& p, double L, int m) {
    p.validate();
    if (!(L > 0.0)) throw std::invalid_argument("L must be > 0");
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    const double pi = std::numbers::pi;
    return p.mu * p.ubar * L * L / (double(m) * m * pi * pi);
}

double qe_positivity_threshold(const ModelParams& p,
                               const std::vector<double>& locations) {
    p.validate();
    if (locations.empty())
        throw std::invalid_argument("qe_positivity_threshold: no locations");
    double lmax = std::abs(locations.front() + 1.0);
    lmax = std::max(lmax, std::abs(locations.back() - 1.0));
    for (size_t j = 0; j + 1 < locations.size(); ++j) {
        if (!(locations[j] < locations[j + 1]))
            throw std::invalid_argument("locations must be strictly increasing");
        lmax = std::max(lmax, locations[j + 1] - locations[j]);
    }
    if (!(locations.front() > -1.0 && locations.back() < 1.0))
        throw std::invalid_argument("locations must lie inside (-1,1)");
    const double pi = std::numbers::pi;
    return lmax * lmax * p.mu * p.ubar / (pi * pi);
}

std::vector<double> equilibrium_locations(int N) {
    std::vector<double> x(N);
    for (int j = 1; j <= N; ++j) x[j - 1] = -1.0 + (2.0 * j - 1.0) / N;
    return x;
}

}  // namespace ksl
