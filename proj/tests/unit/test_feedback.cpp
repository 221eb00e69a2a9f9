#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qfb/feedback.hpp"
#include "support.hpp"

using namespace qfb;

namespace {

FilterParams params(double gamma_ft, double window_T, bool recursive = false) {
  FilterParams p;
  p.gamma_ft = gamma_ft;
  p.window_T = window_T;
  p.recursive = recursive;
  return p;
}

std::vector<double> run(CurrentFilter f, const std::vector<double>& input) {
  std::vector<double> out;
  out.reserve(input.size());
  for (double x : input) out.push_back(f.update(x));
  return out;
}

}  // namespace

TEST_CASE("feedback operators") {
  CHECK(feedback_operator({OperatorSpec::Kind::Jx}) ==
        qubit_op(QubitOpKind::x, 1) + qubit_op(QubitOpKind::x, 2));
  CHECK(feedback_operator({OperatorSpec::Kind::Jx_bar}) ==
        qubit_op(QubitOpKind::x, 1) - qubit_op(QubitOpKind::x, 2));
  CHECK(feedback_operator({OperatorSpec::Kind::weighted_x, 1.0, 0.0}) == kron(pauli::x(), pauli::identity()));
  for (auto k : {OperatorSpec::Kind::Jx, OperatorSpec::Kind::Jx_bar, OperatorSpec::Kind::weighted_x})
    CHECK(hermiticity_error(feedback_operator({k, 0.4, -1.1})) == 0.0);

  CHECK(parse_strategy("filtered_current") == Strategy::filtered_current);
  CHECK_THROWS_AS(parse_strategy("bang_bang"), std::invalid_argument);
  CHECK(parse_operator_kind("Jx_bar") == OperatorSpec::Kind::Jx_bar);
  CHECK_THROWS_AS(parse_operator_kind("Jy"), std::invalid_argument);
}

TEST_CASE("filter normalization") {
  const double gm = 2.0;
  const auto p = params(0.006, 2.0);
  CHECK(filter_normalization(p, gm) ==
        doctest::Approx(2.0 * std::sqrt(gm) * (1.0 - std::exp(-0.006 * 2.0)) / 0.006).epsilon(1e-14));
  CHECK(filter_normalization(params(0.0, 2.0), gm) == doctest::Approx(2.0 * std::sqrt(gm) * 2.0));
  // continuity at gamma_ft -> 0
  CHECK(filter_normalization(params(1e-12, 2.0), gm) ==
        doctest::Approx(filter_normalization(params(0.0, 2.0), gm)).epsilon(1e-10));
}

TEST_CASE("filter window length and constructor checks") {
  CurrentFilter f(params(0.006, 2.0), 1e-3, 2.0);
  CHECK(f.window_length() == 2000);
  CHECK(CurrentFilter(params(0.0, 2.5e-3), 1e-3, 2.0).window_length() == 3);
  CHECK_THROWS_AS(CurrentFilter(params(0.006, 2.0), 0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(CurrentFilter(params(0.006, 0.0), 1e-3, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(CurrentFilter(params(-1.0, 2.0), 1e-3, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(CurrentFilter(params(0.006, 2.0), 1e-3, 0.0), std::invalid_argument);
}

TEST_CASE("zero input filters to zero") {
  CurrentFilter f(params(0.006, 2.0), 1e-3, 2.0);
  for (int i = 0; i < 5000; ++i) CHECK(f.update(0.0) == 0.0);
}

TEST_CASE("noiseless pinned current filters to one") {
  const double dt = 1e-3, gm = 2.0, g = 0.006, T = 2.0;
  CurrentFilter f(params(g, T), dt, gm);
  const double dI = 2.0 * std::sqrt(gm) * dt;
  double r = 0.0;
  for (int i = 0; i < 3000; ++i) r = f.update(dI);

  // geometric sum of the discrete window against N
  const double m = 2000.0;
  const double window_sum = dI * (1.0 - std::exp(-g * m * dt)) / (1.0 - std::exp(-g * dt));
  const double expect = window_sum / filter_normalization(params(g, T), gm);
  CHECK(r == doctest::Approx(expect).epsilon(1e-10));
  CHECK(std::abs(r - 1.0) < 10 * dt);
}

TEST_CASE("single impulse with a flat window is a boxcar") {
  const double dt = 1e-3;
  CurrentFilter f(params(0.0, 0.05), dt, 2.0);
  const double n = f.normalization();
  const std::size_t m = f.window_length();
  CHECK(m == 50);
  CHECK(f.update(1.0) == doctest::Approx(1.0 / n).epsilon(1e-14));
  for (std::size_t k = 1; k < m; ++k) CHECK(f.update(0.0) == doctest::Approx(1.0 / n).epsilon(1e-14));
  for (int k = 0; k < 200; ++k) CHECK(f.update(0.0) == 0.0);
}

TEST_CASE("filter is linear in its input record") {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> n01;
  const double dt = 1e-3;
  const CurrentFilter proto(params(0.3, 0.2), dt, 2.0);
  std::vector<double> x(1500), y(1500), z(1500);
  const double a = 1.7, b = -0.4;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::sqrt(dt) * n01(gen);
    y[i] = std::sqrt(dt) * n01(gen);
    z[i] = a * x[i] + b * y[i];
  }
  const auto rx = run(proto, x), ry = run(proto, y), rz = run(proto, z);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(rz[i] == doctest::Approx(a * rx[i] + b * ry[i]).epsilon(1e-10).scale(1e-3));
}

TEST_CASE("warm-up is monotone for constant positive input") {
  CurrentFilter f(params(0.006, 2.0), 1e-3, 2.0);
  double prev = 0.0;
  for (std::size_t i = 0; i < f.window_length(); ++i) {
    const double r = f.update(1e-3);
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("filter gain bound for bounded noiseless currents") {
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> jz(-2.0, 2.0);
  const double dt = 1e-3, gm = 2.0;
  CurrentFilter f(params(0.006, 2.0), dt, gm);
  for (int i = 0; i < 6000; ++i) CHECK(std::abs(f.update(std::sqrt(gm) * jz(gen) * dt)) <= 1.0 + 10 * dt);
}

TEST_CASE("recursive mode matches the exact window") {
  const double dt = 1e-3, gm = 2.0;
  CurrentFilter exact(params(0.006, 2.0), dt, gm);
  CurrentFilter fast(params(0.006, 2.0, true), dt, gm);
  for (int i = 0; i < 8000; ++i) {
    const double dI = std::sqrt(gm) * 2.0 * std::sin(1e-3 * i) * dt;
    CHECK(std::abs(exact.update(dI) - fast.update(dI)) < 1e-6);
  }

  std::mt19937_64 gen(41);
  std::normal_distribution<double> n01;
  CurrentFilter exact2(params(0.006, 2.0), dt, gm);
  CurrentFilter fast2(params(0.006, 2.0, true), dt, gm);
  double worst = 0.0;
  for (int i = 0; i < 30000; ++i) {
    const double dI = std::sqrt(dt) * n01(gen);
    worst = std::max(worst, std::abs(exact2.update(dI) - fast2.update(dI)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("control values") {
  FeedbackConfig fb;
  CHECK(control_value(fb, {}) == 0.0);

  fb.strategy = Strategy::state_estimate;
  fb.u = 1.0;
  CHECK(control_value(fb, {.jz = 0.0}) == 0.0);
  CHECK(control_value(fb, {.jz = 1.5}) == 1.5);
  CHECK_THROWS_AS(control_value(fb, {.R = 1.0}), std::invalid_argument);

  fb.strategy = Strategy::filtered_current;
  fb.u = 10.0;
  fb.filter.power_P = 1;
  CHECK(control_value(fb, {.R = 0.0}) == 0.0);
  CHECK(control_value(fb, {.R = 0.5}) == 5.0);
  fb.filter.power_P = 2;
  CHECK(control_value(fb, {.R = -0.5}) == doctest::Approx(-2.5));
  fb.filter.power_P = 3;
  CHECK(control_value(fb, {.R = -0.5}) == doctest::Approx(-1.25));
  CHECK_THROWS_AS(control_value(fb, {.jz = 1.0}), std::invalid_argument);

  fb.strategy = Strategy::markovian_direct;
  CHECK_THROWS_AS(control_value(fb, {.dI = 0.1}), std::logic_error);
}

TEST_CASE("feedback config validation") {
  FeedbackConfig fb;
  CHECK_NOTHROW(fb.validate());
  fb.filter.power_P = 0;
  CHECK_THROWS_AS(fb.validate(), std::invalid_argument);
  fb = {};
  fb.u = std::nan("");
  CHECK_THROWS_AS(fb.validate(), std::invalid_argument);
  fb = {};
  fb.filter.window_T = 0.0;
  CHECK_THROWS_AS(fb.validate(), std::invalid_argument);
}
