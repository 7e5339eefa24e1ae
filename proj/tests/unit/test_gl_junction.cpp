#include <cmath>
#include <numbers>

#include "approx.hpp"
#include "doctest.h"
#include "qtunnel/errors.hpp"
#include "qtunnel/gl_junction.hpp"

using namespace qtunnel;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> uniform(int n) {
  std::vector<double> d;
  for (int i = 0; i < n; ++i) d.push_back(2 * pi * i / n);
  return d;
}

// spectral derivative of periodic samples
std::vector<double> spectral_derivative(const std::vector<double>& y) {
  const std::size_t N = y.size(), M = (N - 1) / 2;
  std::vector<double> out(N, 0.0);
  for (std::size_t m = 1; m <= M; ++m) {
    double a = 0, b = 0;
    for (std::size_t i = 0; i < N; ++i) {
      a += y[i] * std::cos(2 * pi * m * i / N);
      b += y[i] * std::sin(2 * pi * m * i / N);
    }
    a *= 2.0 / N;
    b *= 2.0 / N;
    for (std::size_t i = 0; i < N; ++i) {
      const double x = 2 * pi * m * i / N;
      out[i] += m * (b * std::cos(x) - a * std::sin(x));
    }
  }
  return out;
}

double max_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_SUITE("gl_junction") {
  TEST_CASE("linear current-phase relation") {
    auto d = uniform(16);
    auto shortj = linear_cpr(1e-3, d);
    CHECK(shortj.method == CprMethod::SincCorrected);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(shortj.J[i] - std::sin(d[i])) < 1e-6);
    auto half = linear_cpr(pi / 2, d);
    CHECK(half.J_c == approx(pi / 2).epsilon(1e-12));
    CHECK(half.J[0] == 0.0);
    CHECK(max_of(half.deviation) < 1e-12);
    CHECK_THROWS_AS(linear_cpr(pi, d), ResonanceError);
    CHECK_THROWS_AS(linear_cpr(-1.0, d), ValidationError);
  }

  TEST_CASE("homotopy base case equals the closed form") {
    auto d = uniform(16);
    HomotopyOptions o;
    o.k_final = 0.0;
    auto nl = nonlinear_cpr(0.8, d, {}, o);
    auto lin = linear_cpr(0.8, d);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(nl.J[i] - lin.J[i]) < 1e-10);
  }

  TEST_CASE("nonlinear solution invariants") {
    auto d = uniform(32);
    for (double L : {0.3, 1.0}) {
      auto nl = nonlinear_cpr(L, d);
      CAPTURE(L);
      CHECK(nl.method == CprMethod::NonlinearHomotopy);
      CHECK(std::abs(nl.J[0]) < 1e-12);
      CHECK(std::abs(nl.J[16]) < 1e-12);
      for (int i = 1; i < 32; ++i) CHECK(std::abs(nl.J[i] + nl.J[32 - i]) < 1e-8);
      CHECK(max_of(nl.boundary_residual) < 1e-8);
      CHECK(max_of(nl.current_spread) < 1e-6);
      CHECK(max_of(nl.equation_residual) < 1e-8);
      REQUIRE(nl.profiles.size() == d.size());
      CHECK(nl.profiles[5].x.front() == 0.0);
      CHECK(nl.profiles[5].x.back() == approx(L));
      CHECK(std::abs(nl.profiles[5].f.back() - std::polar(1.0, d[5])) < 1e-8);
    }
  }

  TEST_CASE("linear antisymmetry") {
    auto d = uniform(32);
    auto lin = linear_cpr(1.3, d);
    for (int i = 1; i < 32; ++i) CHECK(std::abs(lin.J[i] + lin.J[32 - i]) < 1e-8);
  }

  TEST_CASE("short junction follows the sinc-corrected relation") {
    auto d = uniform(32);
    auto nl = nonlinear_cpr(0.05, d);
    auto lin = linear_cpr(0.05, d);
    double diff = 0;
    for (std::size_t i = 0; i < d.size(); ++i) diff = std::max(diff, std::abs(nl.J[i] - lin.J[i]));
    CHECK(diff < 1e-3);
  }

  TEST_CASE("x grid self-convergence") {
    auto d = uniform(8);
    const double L = 0.7;
    const int n = resolve_intervals(L, {});
    auto a = nonlinear_cpr(L, d);
    auto b = nonlinear_cpr(L, d, XGrid{2 * n});
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(a.J[i] - b.J[i]) <= 1e-6 * std::max(1.0, std::abs(a.J[i])));
  }

  TEST_CASE("deviation grows with length") {
    auto d = uniform(16);
    double prev = 0;
    for (double L : {0.1, 0.5, 1.0}) {
      const double dev = max_of(nonlinear_cpr(L, d).deviation);
      CHECK(dev > prev);
      prev = dev;
    }
    CHECK(prev > 0.01);
  }

  TEST_CASE("input validation") {
    auto d = uniform(8);
    HomotopyOptions few;
    few.steps = 5;
    CHECK_THROWS_AS(nonlinear_cpr(0.5, d, {}, few), ValidationError);
    CHECK_THROWS_AS(nonlinear_cpr(2.0, d, XGrid{40}), ValidationError);
    CHECK(resolve_intervals(0.1, {}) == 64);
    CHECK(resolve_intervals(2.0, {}) == 1024);
  }

  TEST_CASE("washboard correction") {
    const int n = 64;
    auto d = uniform(n);
    auto zero = washboard_correction(d, std::vector<double>(n, 0.0), 2.0);
    CHECK(max_of(zero.values) == 0.0);

    const double a = 0.04, EJ = 3.0;
    std::vector<double> dev;
    for (double x : d) dev.push_back(a * std::sin(2 * x));
    auto c = washboard_correction(d, dev, EJ);
    CHECK(c.values[0] == 0.0);
    for (int i = 0; i < n; ++i) CHECK(std::abs(c.values[i] - EJ * 0.5 * a * (1 - std::cos(2 * d[i]))) < 1e-14);

    std::vector<double> mixed;
    for (double x : d) mixed.push_back(0.03 * std::sin(x) - 0.01 * std::sin(3 * x) + 0.02 * std::cos(2 * x));
    auto m = washboard_correction(d, mixed, 1.0);
    auto back = spectral_derivative(m.values);
    for (int i = 0; i < n; ++i) CHECK(std::abs(back[i] - mixed[i]) < 1e-6);

    std::vector<double> biased(n, 0.1);
    CHECK_THROWS_AS(washboard_correction(d, biased, 1.0), ValidationError);
    auto skewed = d;
    skewed[3] += 0.01;
    CHECK_THROWS_AS(washboard_correction(skewed, dev, 1.0), ValidationError);
  }

  TEST_CASE("correction from a nonlinear relation round-trips") {
    auto d = uniform(32);
    auto nl = nonlinear_cpr(1.0, d);
    auto c = washboard_correction(nl, 1.0);
    auto back = spectral_derivative(c.values);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(back[i] - nl.deviation[i]) < 1e-6);
  }
}
