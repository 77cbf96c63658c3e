#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "delaywave/core.hpp"

using namespace delaywave;

namespace {

bool contains(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) {
    return s.find(needle) != std::string::npos;
  });
}

GeometryConstants unit_interval_constants() {
  GeometryConstants g;
  g.n = 1;
  g.m_inf = 1.0;
  g.delta = 1.0;
  g.cp = 1.0;
  g.c0p = 4.0 / (3.14159265358979323846 * 3.14159265358979323846);
  return g;
}

}  // namespace

TEST_CASE("validate_params accepts a valid configuration") {
  PhysicalParams p{0.05, 1.0, 1.0, 0.1, false};
  CHECK(validate_params(p, unit_interval_constants()).empty());
}

TEST_CASE("validate_params rejects k = 0 unless conservation mode is set") {
  PhysicalParams p{0.05, 0.0, 1.0, 0.1, false};
  const auto errs = validate_params(p, unit_interval_constants());
  CHECK(contains(errs, "k must be positive"));
  p.conservation_mode = true;
  p.a = 0.05;
  CHECK(validate_params(p, unit_interval_constants()).empty());
}

TEST_CASE("validate_params rejects negative a") {
  PhysicalParams p{-0.1, 1.0, 1.0, 0.1, false};
  CHECK(contains(validate_params(p, unit_interval_constants()),
                 "a must be nonnegative"));
}

TEST_CASE("validate_params rejects tau = 0 with a > 0 even in conservation mode") {
  PhysicalParams p{0.5, 0.0, 0.0, 0.1, true};
  CHECK(contains(validate_params(p, unit_interval_constants()),
                 "tau = 0 requires a = 0"));
}

TEST_CASE("validate_weights enforces ordering and the trace-splitting bound") {
  const auto g = unit_interval_constants();
  CHECK(validate_weights({0.3, 0.15, 1.0}, g).empty());
  CHECK(contains(validate_weights({0.1, 0.2, 1.0}, g),
                 "gamma1 must exceed gamma2"));
  CHECK(contains(validate_weights({0.3, 0.15, 2.5}, g), "epsilon too large"));
  CHECK(contains(validate_weights({0.3, 0.0, 1.0}, g),
                 "gamma2 must be positive"));
}

TEST_CASE("history buffer round trip returns the field from exactly n_tau pushes back") {
  unsigned long long s = 0x123456789abcdefull;
  const auto rnd = [&]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 12) * 1e-9 - 2.0;
  };
  for (int n_tau : {1, 2, 5, 17}) {
    for (std::size_t field : {std::size_t{1}, std::size_t{7}}) {
      HistoryBuffer buf(n_tau, field);
      std::vector<std::vector<double>> pushed;
      for (int step = 0; step <= 60; ++step) {
        std::vector<double> v(field);
        for (auto& x : v) x = rnd();
        buf.push(v);
        pushed.push_back(v);
        if (step >= n_tau) {
          const auto got = buf.read_lag(n_tau);
          const auto& want = pushed[step - n_tau];
          for (std::size_t i = 0; i < field; ++i) CHECK(got[i] == want[i]);
        }
      }
    }
  }
}

TEST_CASE("history buffer rejects out-of-window lags") {
  HistoryBuffer buf(3, 2);
  std::vector<double> v{1.0, 2.0};
  buf.push(v);
  CHECK_THROWS_AS((void)buf.read_lag(1), std::out_of_range);  // only 1 push
  CHECK_THROWS_AS((void)buf.read_lag(4), std::out_of_range);  // beyond n_tau
  CHECK(buf.read_lag(0)[0] == 1.0);
}

TEST_CASE("grid1d multiplier signs for x0 = 0") {
  const Grid1D g = Grid1D::uniform(11, 2.0);
  CHECK(validate_grid(g).empty());
  // m.nu at the Dirichlet end is x0 = 0 <= 0; at the feedback end L - x0 = L
  CHECK(g.x0 == 0.0);
  CHECK(g.dx * (g.nx - 1) == doctest::Approx(g.length).epsilon(1e-14));
}

TEST_CASE("grid1d rejects a multiplier origin inside the domain") {
  Grid1D g = Grid1D::uniform(11, 1.0, 0.25);
  CHECK(contains(validate_grid(g), "x0"));
}

TEST_CASE("grid2d edge normals and mixed corners") {
  Grid2D g = Grid2D::uniform(5, 5, 1.0, 1.0, {0.0, 0.5});
  CHECK(edge_m_dot_nu_left(g) == 0.0);
  CHECK(edge_m_dot_nu_right(g) == 1.0);
  CHECK(edge_m_dot_nu_bottom(g) == 0.5);
  CHECK(edge_m_dot_nu_top(g) == 0.5);
  CHECK(validate_grid(g).empty());
  const auto corners = mixed_corners(g);
  REQUIRE(corners.size() == 2);  // left edge is Dirichlet, bottom/top feedback
  CHECK(corners[0] == std::array<int, 2>{0, 0});
  CHECK(corners[1] == std::array<int, 2>{0, 4});
}

TEST_CASE("grid2d rejects a feedback edge with nonpositive m.nu") {
  Grid2D g = Grid2D::uniform(5, 5, 1.0, 1.0, {0.0, 0.0});
  // bottom edge has m.nu = x0_y = 0, not positive
  CHECK(contains(validate_grid(g), "bottom"));
}
