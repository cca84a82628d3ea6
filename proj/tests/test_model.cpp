#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "ksl/model.hpp"

using namespace ksl;
namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("positivity threshold and resonances, N=2") {
    ModelParams p;
    p.mu = 1.0;
    p.ubar = 2.0;
    p.N = 2;
    p.d1 = 0.5;
    auto r = classify_d1(p);
    CHECK(r.d1pN == doctest::Approx(8.0 / (4.0 * kPi * kPi)).epsilon(1e-14));
    CHECK(r.d1pN == doctest::Approx(0.2026).epsilon(1e-3));
    REQUIRE(r.d1Tm_list.size() == 1);
    CHECK(r.d1Tm_list[0] == doctest::Approx(8.0 / (kPi * kPi)).epsilon(1e-14));
}

TEST_CASE("N=1 has an empty resonance list") {
    ModelParams p;
    p.mu = 1.0;
    p.ubar = 2.0;
    p.N = 1;
    p.d1 = 1.0;
    auto r = classify_d1(p);
    CHECK(r.d1pN == doctest::Approx(8.0 / (kPi * kPi)).epsilon(1e-14));
    CHECK(r.d1pN == doctest::Approx(0.8106).epsilon(1e-3));
    CHECK(r.d1Tm_list.empty());
    CHECK(r.in_admissible_set);
}

TEST_CASE("admissibility for N=3, d1=0.5") {
    ModelParams p;
    p.mu = 1.0;
    p.ubar = 2.0;
    p.N = 3;
    p.d1 = 0.5;
    auto r = classify_d1(p);
    CHECK(r.in_admissible_set);
    CHECK(r.d1pN == doctest::Approx(8.0 / (9.0 * kPi * kPi)).epsilon(1e-14));
    CHECK(r.d1pN == doctest::Approx(0.0901).epsilon(2e-3));
    REQUIRE(r.d1Tm_list.size() == 2);
    CHECK(r.d1Tm_list[0] == doctest::Approx(0.8106).epsilon(1e-3));
    CHECK(r.d1Tm_list[1] == doctest::Approx(0.2026).epsilon(1e-3));
}

TEST_CASE("d1 sitting on a resonance is rejected") {
    ModelParams p;
    p.mu = 1.0;
    p.ubar = 2.0;
    p.N = 2;
    p.d1 = 8.0 / (kPi * kPi) * (1.0 + 1e-8);
    auto r = classify_d1(p);
    CHECK(!r.in_admissible_set);
    CHECK(r.nearest_resonance_distance < kResonanceBand);
}

TEST_CASE("turing threshold closed form") {
    ModelParams p;
    p.mu = 1.0;
    p.ubar = 2.0;
    CHECK(turing_threshold(p, 2.0, 1) == doctest::Approx(8.0 / (kPi * kPi)).epsilon(1e-14));
    // L = 2/N coincides with d1pN
    p.N = 3;
    CHECK(turing_threshold(p, 2.0 / 3.0, 1) ==
          doctest::Approx(classify_d1(p).d1pN).epsilon(1e-14));
    ModelParams q;
    q.mu = 0.25;
    q.ubar = 2.0;
    CHECK(turing_threshold(q, 1.0, 2) == doctest::Approx(0.5 / (4.0 * kPi * kPi)).epsilon(1e-14));
    CHECK(turing_threshold(q, 1.0, 2) == doctest::Approx(0.01267).epsilon(1e-3));
}

TEST_CASE("quasi-equilibrium positivity threshold from gaps") {
    ModelParams p;
    p.mu = 1.0;
    p.ubar = 2.0;
    CHECK(qe_positivity_threshold(p, {-0.5, 0.5}) ==
          doctest::Approx(2.0 / (kPi * kPi)).epsilon(1e-14));
    CHECK(qe_positivity_threshold(p, {-0.6, 0.6}) ==
          doctest::Approx(1.44 * 2.0 / (kPi * kPi)).epsilon(1e-14));
    CHECK(qe_positivity_threshold(p, {0.0}) ==
          doctest::Approx(2.0 / (kPi * kPi)).epsilon(1e-14));
    CHECK_THROWS_AS(qe_positivity_threshold(p, {}), std::invalid_argument);
}

TEST_CASE("threshold chain d1pN < d1T(N-1) < ... < d1T1 up to N=50") {
    ModelParams p;
    p.mu = 0.7;
    p.ubar = 3.1;
    for (int N = 2; N <= 50; ++N) {
        p.N = N;
        auto r = classify_d1(p);
        double prev = r.d1pN;
        for (auto it = r.d1Tm_list.rbegin(); it != r.d1Tm_list.rend(); ++it) {
            CHECK(prev < *it);
            prev = *it;
        }
    }
}

TEST_CASE("thresholds depend only on the product mu*ubar") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        ModelParams a, b;
        a.mu = u(rng);
        a.ubar = u(rng);
        a.N = 4;
        a.d1 = u(rng);
        const double scale = u(rng);
        b = a;
        b.mu = a.mu * scale;
        b.ubar = a.ubar / scale;
        auto ra = classify_d1(a), rb = classify_d1(b);
        CHECK(ra.d1pN == doctest::Approx(rb.d1pN).epsilon(1e-12));
        for (size_t m = 0; m < ra.d1Tm_list.size(); ++m)
            CHECK(ra.d1Tm_list[m] == doctest::Approx(rb.d1Tm_list[m]).epsilon(1e-12));
    }
}

TEST_CASE("derived scalars stay consistent") {
    ModelParams p;
    p.d1 = 2.5;
    p.chi = 1.7;
    p.d2 = 0.004;
    p.mu = 0.25;
    p.ubar = 2.0;
    CHECK(p.chibar() * p.d1 == doctest::Approx(p.chi).epsilon(1e-15));
    CHECK(p.eps() * p.eps() == doctest::Approx(p.d2).epsilon(1e-15));
    CHECK(p.theta() * p.theta() * p.d1 == doctest::Approx(p.mu * p.ubar).epsilon(1e-14));
}

TEST_CASE("invalid parameters are rejected") {
    ModelParams p;
    p.d1 = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.d1 = 1.0;
    p.tau = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.tau = 0.0;
    p.N = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
