#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "ksl/kernels.hpp"

using namespace ksl::kernels;

namespace {

std::vector<double> random_field(int n, unsigned seed, double lo = 0.0,
                                 double hi = 3.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> x(n);
    for (auto& v : x) v = u(rng);
    return x;
}

}  // namespace

TEST_CASE("scalar flux kernel: upwinding and wall fluxes") {
    const int n = 6;
    std::vector<double> u{1, 2, 3, 4, 5, 6}, v{0, 1, 0.5, 2, 2, 1};
    std::vector<double> F(n + 1, -1.0);
    scalar_ops().chemotaxis_flux(n, u.data(), v.data(), 2.0, 1.5, F.data());
    CHECK(F[0] == 0.0);
    CHECK(F[n] == 0.0);
    // face 1: s = (1-0)*2 = 2 > 0, upwind u[0] = 1 -> F = 1.5*1*2
    CHECK(F[1] == doctest::Approx(3.0));
    // face 2: s = (0.5-1)*2 = -1 < 0, upwind u[2] = 3 -> F = 1.5*3*(-1)
    CHECK(F[2] == doctest::Approx(-4.5));
    // face 4: s = 0 -> upwind right cell, F = 0
    CHECK(F[4] == 0.0);
}

TEST_CASE("backend availability and selection") {
    CHECK((std::strcmp(backend_name(), "scalar") == 0 ||
           std::strcmp(backend_name(), "avx2") == 0));
    // the dispatched table is one of the two known tables
#ifdef KSL_BUILD_AVX2
    CHECK((&ops() == &scalar_ops() || &ops() == &avx2_ops()));
#else
    CHECK(&ops() == &scalar_ops());
#endif
}

#ifdef KSL_BUILD_AVX2
TEST_CASE("AVX2 kernels agree with the scalar reference") {
    if (!__builtin_cpu_supports("avx2")) return;
    const auto& s = scalar_ops();
    const auto& a = avx2_ops();
    for (int n : {1, 2, 3, 4, 5, 7, 8, 64, 257, 2048}) {
        auto u = random_field(n, 11 + n);
        auto v = random_field(n, 23 + n);
        std::vector<double> Fs(n + 1), Fa(n + 1), rs(n), ra(n), os(n), oa(n);
        s.chemotaxis_flux(n, u.data(), v.data(), 1024.0, 1.7, Fs.data());
        a.chemotaxis_flux(n, u.data(), v.data(), 1024.0, 1.7, Fa.data());
        // elementwise maps must be bit-identical
        for (int i = 0; i <= n; ++i) CHECK(Fs[i] == Fa[i]);
        s.explicit_rhs(n, u.data(), Fs.data(), 1024.0, 0.25, 2.0, rs.data());
        a.explicit_rhs(n, u.data(), Fa.data(), 1024.0, 0.25, 2.0, ra.data());
        for (int i = 0; i < n; ++i) CHECK(rs[i] == ra[i]);
        s.axpy(n, u.data(), 0.37, v.data(), os.data());
        a.axpy(n, u.data(), 0.37, v.data(), oa.data());
        for (int i = 0; i < n; ++i) CHECK(os[i] == oa[i]);
        // order-independent reductions are exact
        CHECK(s.min_val(n, u.data()) == a.min_val(n, u.data()));
        CHECK(s.max_val(n, u.data()) == a.max_val(n, u.data()));
        CHECK(s.max_abs_diff(n, u.data(), v.data()) ==
              a.max_abs_diff(n, u.data(), v.data()));
        CHECK(s.max_face_speed(n, v.data(), 1024.0) ==
              a.max_face_speed(n, v.data(), 1024.0));
        // summations may reassociate
        CHECK(s.sum(n, u.data()) ==
              doctest::Approx(a.sum(n, u.data())).epsilon(1e-13));
        CHECK(s.sum_logistic(n, u.data(), 2.0) ==
              doctest::Approx(a.sum_logistic(n, u.data(), 2.0)).epsilon(1e-13));
    }
}
#endif

TEST_CASE("reductions: reference values") {
    std::vector<double> x{3.0, -1.0, 2.5, 7.0, -2.0};
    const auto& s = scalar_ops();
    CHECK(s.min_val(5, x.data()) == -2.0);
    CHECK(s.max_val(5, x.data()) == 7.0);
    CHECK(s.sum(5, x.data()) == doctest::Approx(9.5));
    std::vector<double> y{3.0, -1.0, 2.0, 7.0, -2.0};
    CHECK(s.max_abs_diff(5, x.data(), y.data()) == 0.5);
    CHECK(s.max_face_speed(5, x.data(), 2.0) == doctest::Approx(18.0));
}
