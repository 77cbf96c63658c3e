#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "delaywave/spectral1d.hpp"

using namespace delaywave;

namespace {
constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;
}  // namespace

TEST_CASE("gain threshold evaluates the closed form and equals tanh") {
  CHECK(gain_threshold(1.0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
  CHECK(gain_threshold(0.1) ==
        doctest::Approx(0.09966799462495582).epsilon(1e-12));
  CHECK(gain_threshold(30.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 1; i <= 100; ++i) {
    const double a = 0.04 * i;
    CHECK(std::abs(gain_threshold(a) - std::tanh(a)) <= 1e-14);
  }
  CHECK_THROWS_AS((void)gain_threshold(0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)gain_threshold(-1.0), std::invalid_argument);
}

TEST_CASE("characteristic function basics") {
  const BoundaryDelayParams p{1.0, 0.5, 1.0};
  SUBCASE("conjugate symmetry") {
    for (const cplx w : {cplx{-0.3, 2.1}, cplx{0.2, 5.0}, cplx{-2.0, 0.7}}) {
      const cplx f = char_fn(w, p);
      const cplx fc = char_fn(std::conj(w), p);
      CHECK(fc.real() == doctest::Approx(f.real()).epsilon(1e-12));
      CHECK(fc.imag() == doctest::Approx(-f.imag()).epsilon(1e-12));
    }
  }
  SUBCASE("closed-form roots at k = 0") {
    const BoundaryDelayParams p0{1.0, 0.0, 1.0};
    for (int m = 0; m < 4; ++m) {
      const cplx w{-1.0, kPi * (0.5 + m)};
      CHECK(std::abs(char_fn(w, p0)) < 1e-12);
    }
  }
  SUBCASE("scaled form matches the plain value in a sane range") {
    const cplx w{-0.7, 3.3};
    const auto sv = char_fn_scaled(w, p);
    const cplx f = sv.value * std::exp(sv.log_scale);
    const cplx ref = char_fn(w, p);
    CHECK(std::abs(f - ref) <= 1e-12 * std::abs(ref));
  }
  SUBCASE("scaled form survives where the plain value overflows") {
    const BoundaryDelayParams pbig{3.0, 0.5, 5.0};
    const auto sv = char_fn_scaled({-160.0, 1.0}, pbig);
    CHECK(std::isfinite(sv.value.real()));
    CHECK(std::isfinite(sv.value.imag()));
    CHECK(sv.log_scale > 700.0);
  }
}

TEST_CASE("rightmost roots at k = 0 sit on the vertical line Re = -a") {
  for (double a : {0.5, 1.0, 2.0}) {
    const BoundaryDelayParams p{a, 0.0, 1.0};
    const auto res = rightmost_roots(p, default_search_box(p));
    REQUIRE(!res.roots.empty());
    CHECK(std::abs(res.abscissa + a) < 1e-6);
    CHECK(res.roots.front().omega.imag() == doctest::Approx(0.5 * kPi).epsilon(1e-6));
    CHECK(res.winding_ok);
    for (const auto& r : res.roots) CHECK(r.residual < 1e-10);
  }
}

TEST_CASE("root set is conjugate closed and stable under refinement") {
  const BoundaryDelayParams p{1.0, 0.5, 1.0};
  const auto base = rightmost_roots(p, default_search_box(p));
  REQUIRE(!base.roots.empty());

  SUBCASE("conjugate closure") {
    for (const auto& r : base.roots) {
      if (r.omega.imag() == 0.0) continue;
      bool has_conj = false;
      for (const auto& q : base.roots)
        if (std::abs(q.omega - std::conj(r.omega)) < 1e-9) has_conj = true;
      CHECK(has_conj);
    }
  }

  SUBCASE("doubling the scan grid moves no root") {
    SearchBox fine = default_search_box(p);
    fine.nre *= 2;
    fine.nim *= 2;
    const auto refined = rightmost_roots(p, fine);
    CHECK(std::abs(refined.abscissa - base.abscissa) < 1e-9);
  }

  SUBCASE("enlarging the box never raises the abscissa") {
    SearchBox wide = default_search_box(p);
    wide.im_hi *= 2.0;
    wide.nim *= 2;
    const auto wider = rightmost_roots(p, wide);
    CHECK(wider.abscissa <= base.abscissa + 1e-9);
  }
}

TEST_CASE("stable gains below threshold produce a negative abscissa") {
  unsigned long long seed = 0x9e3779b97f4a7c15ull;
  const auto rnd = [&]() {
    seed ^= seed << 13;
    seed ^= seed >> 7;
    seed ^= seed << 17;
    return static_cast<double>(seed >> 11) / 9007199254740992.0;
  };
  for (int i = 0; i < 6; ++i) {
    const double a = 0.3 + 1.5 * rnd();
    const double tau = 0.4 + 2.0 * rnd();
    const BoundaryDelayParams p{a, 0.9 * gain_threshold(a), tau};
    const auto res = rightmost_roots(p, default_search_box(p));
    CHECK(res.abscissa < 0.0);
  }
}

TEST_CASE("time-domain cross-validation agrees with the spectral rate") {
  SUBCASE("delayed boundary gain") {
    const auto cv = crossvalidate_decay({1.0, 0.5, 1.0}, 401, 30.0);
    CHECK(cv.performed);
    CHECK(cv.abscissa < 0.0);
    CHECK(cv.rel_gap < 0.1);
  }
  SUBCASE("k = 0 reduces to the pure interior damping rate 2a") {
    const auto cv = crossvalidate_decay({1.0, 0.0, 1.0}, 401, 20.0);
    CHECK(cv.performed);
    CHECK(cv.fitted_rate == doctest::Approx(2.0).epsilon(0.05));
  }
  SUBCASE("zero modal amplitude skips the validation") {
    const auto cv = crossvalidate_decay({1.0, 0.5, 1.0}, 101, 5.0, 0.9, 0.0);
    CHECK(!cv.performed);
  }
}
