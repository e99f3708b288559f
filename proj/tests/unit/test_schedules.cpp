#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "dpdgt/errors.hpp"
#include "dpdgt/graph.hpp"
#include "dpdgt/presets.hpp"
#include "dpdgt/rng.hpp"
#include "dpdgt/schedules.hpp"

using namespace dpdgt;

namespace {

double partial_sum(const GeometricSchedule& num, const GeometricSchedule& den, std::size_t terms) {
  // Running ratio so that underflow in either schedule cannot produce 0/0.
  const double r = num.ratio / den.ratio;
  double s = 0.0, term = num.initial / den.initial;
  for (std::size_t k = 0; k < terms; ++k, term *= r) s += term;
  return s;
}

}  // namespace

TEST_CASE("laplace sampling") {
  CHECK(laplace_sample(1.0, 0.0) == 0.0);
  CHECK_THROWS_AS(laplace_sample(0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(laplace_sample(-1.0, 0.1), std::invalid_argument);
  // Inverse CDF at u: P(X <= x) = 1/2 + u for the returned x.
  CHECK(laplace_sample(2.0, 0.25) == doctest::Approx(-2.0 * std::log(0.5)));
  CHECK(laplace_sample(2.0, -0.25) == doctest::Approx(2.0 * std::log(0.5)));

  const NoiseStream a(42, 3, Channel::kTracking);
  const NoiseStream b(42, 3, Channel::kTracking);
  CHECK(a.laplace(2.0, 17) == b.laplace(2.0, 17));
  CHECK(a.laplace(2.0, 17) == a.laplace(2.0, 17));
}

TEST_CASE("laplace moments and median") {
  const NoiseStream s(2024, 0, Channel::kAux);
  const std::size_t n = 1000000;
  double sum = 0.0, sq = 0.0;
  std::size_t inside = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = s.laplace(1.0, k);
    sum += x;
    sq += x * x;
    if (std::abs(x) <= std::log(2.0)) ++inside;
  }
  const double mean = sum / n;
  const double var = (sq - n * mean * mean) / (n - 1);
  CHECK(std::abs(mean) <= 0.005);
  CHECK(std::abs(var - 2.0) <= 0.02);
  CHECK(std::abs(static_cast<double>(inside) / n - 0.5) <= 0.002);
}

TEST_CASE("noise streams have distinct keys and are bit-reproducible") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    for (std::uint64_t agent = 0; agent < 50; ++agent) {
      for (Channel c : {Channel::kTracking, Channel::kDual, Channel::kAux}) {
        keys.insert(NoiseStream(seed, agent, c).key());
      }
    }
  }
  CHECK(keys.size() == 3 * 50 * 3);
  const NoiseStream s(7, 1, Channel::kDual);
  std::set<std::uint64_t> draws;
  for (std::uint64_t k = 0; k < 10000; ++k) draws.insert(s.bits(k));
  CHECK(draws.size() == 10000);
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("centered uniform stays in the open interval") {
  const NoiseStream s(1, 1, Channel::kAux);
  for (std::uint64_t k = 0; k < 100000; ++k) {
    const double u = s.centered_uniform(k);
    CHECK(u > -0.5);
    CHECK(u < 0.5);
  }
}

TEST_CASE("geometric schedules") {
  const GeometricSchedule g{0.015, 0.991};
  CHECK(g.value(0) == 0.015);
  CHECK(g.value(10) == doctest::Approx(0.015 * std::pow(0.991, 10)));
  CHECK_THROWS_AS(GeometricSchedule({-1.0, 0.5}).validate("x"), std::invalid_argument);
  CHECK_THROWS_AS(GeometricSchedule({1.0, 1.0}).validate("x"), std::invalid_argument);
  CHECK_NOTHROW(GeometricSchedule({0.0, 0.5}).validate("x"));
  CHECK(geometric_series(2.0, 0.5) == doctest::Approx(4.0));
  CHECK(geometric_series(1.0, 1.0) == kDivergent);
  CHECK(geometric_series(0.0, 1.0) == 0.0);
}

TEST_CASE("condition verdicts for the convergence preset") {
  const ScheduleSet s = presets::ieee14_convergence_schedules();
  const SpectralData sp = spectral_analysis(presets::ieee14_graph(), s.gamma, s.phi);
  REQUIRE(sp.q_c_estimate < 0.991);
  const ConditionVerdict v = check_conditions(s, 0.06, sp.q_c_estimate);
  CHECK(v.convergence());
  CHECK(v.privacy());
  CHECK(v.closed_form());
  CHECK(v.failures().empty());
  CHECK(v.sum_alpha == doctest::Approx(0.015 / 0.009));
  CHECK(v.sum_theta_xi_sq == doctest::Approx(1e-4 / (1 - 0.995 * 0.995)));
  CHECK(v.sum_theta_xi_sq_over_alpha ==
        doctest::Approx((1e-4 / 0.015) / (1 - 0.995 * 0.995 / 0.991)));
  CHECK(v.sum_alpha_over_theta_xi == doctest::Approx(1.5 * 0.995 / 0.004));
  CHECK(v.certified_beta == 1.0);
  CHECK(v.certified_k0 == 0);
}

TEST_CASE("divergent configurations") {
  ScheduleSet s = presets::ieee14_convergence_schedules();
  SUBCASE("equal ratios") {
    s.alpha.ratio = s.theta_xi.ratio;
    const ConditionVerdict v = check_conditions(s, 0.06, 0.5);
    CHECK(v.sum_alpha_over_theta_xi == kDivergent);
    CHECK_FALSE(v.alpha_over_theta_xi_summable);
    CHECK_FALSE(v.privacy());
    CHECK_THROWS_AS(tail_sums(s), HypothesisViolation);
  }
  SUBCASE("noise decays too slowly for the step") {
    s.theta_xi.ratio = std::sqrt(0.99);
    s.alpha.ratio = 0.98;
    const ConditionVerdict v = check_conditions(s, 0.06, 0.5);
    CHECK_FALSE(v.theta_xi_sq_over_alpha_summable);
    CHECK_FALSE(v.convergence());
  }
  SUBCASE("graph contracts slower than the step") {
    const ConditionVerdict v = check_conditions(s, 0.06, 0.995);
    CHECK_FALSE(v.lambda_exists);
    CHECK_FALSE(v.convergence());
  }
  SUBCASE("step above the contraction limit") {
    s.alpha.initial = 0.05;
    const ConditionVerdict v = check_conditions(s, 0.06, 0.5);
    CHECK_FALSE(v.step_below_contraction);
    CHECK_FALSE(v.closed_form());
  }
}

TEST_CASE("tail sums") {
  ScheduleSet s;
  s.alpha = {0.1, 0.5};
  s.theta_xi = {1.0, 0.9};
  s.theta_zeta = {1.0, 0.9};
  CHECK(tail_sums(s).d_alpha_xi == doctest::Approx(0.225).epsilon(1e-14));

  const ScheduleSet p = presets::ieee14_convergence_schedules();
  const double oracle = partial_sum(p.alpha, p.theta_xi, 100000);
  CHECK(std::abs(tail_sums(p).d_alpha_xi - oracle) <= 1e-6 * oracle);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ur(0.3, 0.998), ui(0.01, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ScheduleSet r;
    r.alpha = {ui(rng), ur(rng)};
    const double qx = std::min(0.999, r.alpha.ratio + 0.001 + 0.1 * ui(rng));
    r.theta_xi = {ui(rng), qx};
    r.theta_zeta = {ui(rng), qx};
    const TailSums t = tail_sums(r);
    const double o = partial_sum(r.alpha, r.theta_xi, 100000);
    if (qx / r.alpha.ratio <= 0.999 || r.alpha.ratio / qx <= 0.999) {
      CHECK(std::abs(t.d_alpha_xi - o) <= 1e-6 * o);
    }
  }
}

TEST_CASE("summability verdict is monotone in the step ratio") {
  ScheduleSet s = presets::ieee14_convergence_schedules();
  for (double q = 0.999; q > 0.01; q -= 0.013) {
    s.alpha.ratio = q;
    CHECK(check_conditions(s, 0.06, 0.5).alpha_summable);
  }
}

TEST_CASE("numeric series") {
  const SeriesResult g = numeric_series([](std::size_t k) { return std::pow(0.5, k); });
  CHECK(g.converged);
  CHECK(g.partial_sum == doctest::Approx(2.0));
  SeriesOptions opts;
  opts.max_terms = 100000;
  const SeriesResult h = numeric_series([](std::size_t k) { return 1.0 / (k + 1.0); }, opts);
  CHECK_FALSE(h.converged);
}
