#include <cmath>

#include "approx.hpp"
#include "doctest.h"
#include "qtunnel/errors.hpp"
#include "qtunnel/trajectory.hpp"

using namespace qtunnel;

namespace {

double velocity_integral(const InstantonPath& p) {
  std::vector<double> v2;
  for (const auto& s : p.samples) v2.push_back(s.v * s.v);
  return simpson(v2, p.dt);
}

}  // namespace

TEST_SUITE("trajectory") {
  TEST_CASE("kink closed form") {
    auto m = PotentialModel::quartic_double_well();
    auto p = solve_path(m, {-0.5, 0.5});
    CHECK(p.kind == PathKind::Kink);
    double err = 0;
    for (const auto& s : p.samples) err = std::max(err, std::abs(s.x - 0.5 * std::tanh(0.5 * (s.t - p.center_time))));
    CHECK(err < 1e-6);
    CHECK(std::abs(p.samples[p.center_index].x) < 1e-15);
    CHECK(p.S0 == approx(1.0 / 6.0).epsilon(1e-10));
    CHECK(p.omega == approx(1.0).epsilon(1e-12));
    CHECK(std::abs(p.A - std::sqrt(6.0)) < 1e-4);
    CHECK(std::abs(p.position(1.2345 + p.center_time) - 0.5 * std::tanh(1.2345 / 2)) < 1e-7);
    for (std::size_t i = 1; i < p.samples.size(); ++i) CHECK(p.samples[i].x >= p.samples[i - 1].x);
  }

  TEST_CASE("bounce closed form") {
    auto m = PotentialModel::poly_bounce(2, -0.5, PolyCoupling::Derivative);
    auto p = solve_path(m, {0.0, exit_point(m, 0.0)});
    CHECK(p.kind == PathKind::Bounce);
    double err = 0, sym = 0;
    const std::size_t n = p.samples.size(), c = p.center_index;
    for (const auto& s : p.samples) err = std::max(err, std::abs(s.x - 2.0 / std::cosh(s.t - p.center_time)));
    for (std::size_t k = 0; k <= c && c + k < n; ++k) sym = std::max(sym, std::abs(p.samples[c + k].x - p.samples[c - k].x));
    CHECK(err < 1e-6);
    CHECK(sym < 1e-8);
    CHECK(std::abs(p.A - std::sqrt(6.0)) < 1e-4);
  }

  TEST_CASE("A is g independent for the quartic bounce") {
    for (double g : {-0.05, -0.3, -1.0}) {
      auto m = PotentialModel::poly_bounce(2, g, PolyCoupling::Derivative);
      auto fit = asymptotic_coefficient(solve_path(m, {0.0, exit_point(m, 0.0)}));
      CHECK(std::abs(fit.A - std::sqrt(6.0)) < 1e-4);
      CHECK(fit.omega == approx(1.0));
    }
  }

  TEST_CASE("actions") {
    CHECK(std::abs(action(PotentialModel::quartic_double_well(), {-0.5, 0.5}) - 1.0 / 6.0) < 1e-8);
    auto h = PotentialModel::poly_bounce(2, -0.5);
    CHECK(action(h, {0.0, exit_point(h, 0.0)}) == approx(4.0 / 3.0).epsilon(1e-12));
    WashboardParams w;
    w.E_C = 0.05;
    w.I_e = 0.7;
    auto wb = PotentialModel::washboard(w);
    const double a = std::asin(0.7), s = exit_point(wb, a);
    const double gk = action(wb, {a, s}), ts = action(wb, {a, s}, Quadrature::TanhSinh);
    CHECK(gk > 0);
    CHECK(std::abs(gk - ts) < 1e-6 * gk);
  }

  TEST_CASE("energy conservation, action identity and Jacobian") {
    WashboardParams w;
    w.I_e = 0.7;
    auto wb = PotentialModel::washboard(w);
    const double a = std::asin(0.7);
    std::vector<InstantonPath> paths{solve_path(PotentialModel::quartic_double_well(), {-0.5, 0.5}),
                                     solve_path(wb, {a, exit_point(wb, a)})};
    for (const auto& p : paths) {
      double worst = 0;
      for (const auto& s : p.samples) {
        const double U = p.model.difference(s.x, p.x_start);
        if (U > 1e-10) worst = std::max(worst, std::abs(0.5 * s.v * s.v / U - 1.0));
      }
      CHECK(worst < 1e-6);
      CHECK(velocity_integral(p) == approx(p.S0).epsilon(1e-6));
      CHECK(p.jacobian * p.jacobian == approx(p.S0).epsilon(1e-6));
    }
  }

  TEST_CASE("time translation covariance") {
    auto p = solve_path(PotentialModel::quartic_double_well(), {-0.5, 0.5});
    auto q = p.shifted(3.25);
    CHECK(q.center_time == p.center_time + 3.25);
    CHECK(q.samples[7].t == p.samples[7].t + 3.25);
    CHECK(q.S0 == p.S0);
    CHECK(q.A == p.A);
    CHECK(q.omega == p.omega);
    auto fp = asymptotic_coefficient(p), fq = asymptotic_coefficient(q);
    CHECK(fp.A == fq.A);
    CHECK(fp.omega == fq.omega);
  }

  TEST_CASE("errors") {
    auto m = PotentialModel::quartic_double_well();
    // V - V(-0.5) vanishes at 0.5, not at 0.3
    CHECK_THROWS_AS(solve_path(m, {-0.5, 0.3}), DomainError);
    CHECK_THROWS_AS(action(m, {0.0, 0.5}), std::runtime_error);
    PathGrid short_grid;
    short_grid.horizon = 6.0;
    CHECK_THROWS_AS(solve_path(m, {-0.5, 0.5}, short_grid), TailError);
  }
}
