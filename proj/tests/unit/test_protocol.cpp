#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <vector>

#include "doctest.h"

#include "btherm/bayes.hpp"
#include "btherm/errors.hpp"
#include "btherm/priors.hpp"
#include "btherm/protocol.hpp"
#include "btherm/rng.hpp"

using namespace btherm;

namespace {

const PriorSpec kCase{1.0, 1.0, 10.0};

GridDistribution spike_at(std::size_t node) {
  auto grid = std::make_shared<const TemperatureGrid>(1.0, 10.0, 2048);
  std::vector<double> p(grid->size(), 0.0);
  p[node] = 1.0;
  return GridDistribution(grid, p);
}

bool same_records(const TrajectoryRecord& a, const TrajectoryRecord& b) {
  if (a.rounds.size() != b.rounds.size()) return false;
  for (std::size_t k = 0; k < a.rounds.size(); ++k) {
    const auto& x = a.rounds[k];
    const auto& y = b.rounds[k];
    if (x.gap != y.gap || x.outcome != y.outcome || x.evidence != y.evidence ||
        x.estimator != y.estimator || x.posterior_msle != y.posterior_msle)
      return false;
  }
  return a.final_estimator == b.final_estimator && a.final_log_error == b.final_log_error &&
         a.final_posterior_msle == b.final_posterior_msle;
}

}  // namespace

TEST_CASE("RngStream is a pure function of (seed, stream, counter)") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
    seen.insert(x);
  }
  CHECK(seen.size() == 1000);
  CHECK(a.counter() == 1000);
}

TEST_CASE("RngStream uniform doubles") {
  RngStream r(1, 2);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sq += u * u;
  }
  // Mean 1/2 and variance 1/12 within a few standard errors.
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(sq / n - sum * sum / n / n - 1.0 / 12.0) < 2e-3);
}

TEST_CASE("ProtocolConfig validation") {
  ProtocolConfig c;
  CHECK_NOTHROW(c.validate());
  c.n = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ProtocolConfig{};
  c.m = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ProtocolConfig{};
  c.d = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ProtocolConfig{};
  c.gap_search.scan_points = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ProtocolConfig{};
  c.n = 5;
  c.m = 200;
  CHECK(c.total_probes() == 1000);
  CHECK(c.round_dimension().value() == doctest::Approx(32.0));
}

TEST_CASE("sample_outcome frequencies match the likelihood") {
  RngStream rng(99, 0);
  const auto s = make_effective_two_level(2.0, HilbertDim::of(4));
  const double theta = 1.3;
  const double p1 = likelihood(s, theta, Outcome{1});
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += sample_outcome(s, theta, rng).level_index == 1 ? 1 : 0;
  CHECK(std::abs(ones - n * p1) <= 3.0 * std::sqrt(n * p1 * (1.0 - p1)));

  const auto multi = ProbeSpectrum::from_counts({{0.0, 1}, {0.5, 2}, {1.5, 3}});
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n; ++i) ++counts[sample_outcome(multi, 1.0, rng).level_index];
  for (std::size_t x = 0; x < 3; ++x) {
    const double p = likelihood(multi, 1.0, Outcome{x});
    CHECK(std::abs(counts[x] - n * p) <= 3.0 * std::sqrt(n * p * (1.0 - p)));
  }
}

TEST_CASE("sample_outcome limits") {
  RngStream rng(5, 5);
  const auto cold = make_effective_two_level(1e4, HilbertDim::of(2));
  const auto flat = make_effective_two_level(1e-12, HilbertDim::of(8));
  int excited = 0;
  for (int i = 0; i < 10000; ++i) {
    CHECK(sample_outcome(cold, 1.0, rng).level_index == 0);
    excited += sample_outcome(flat, 1.0, rng).level_index == 1 ? 1 : 0;
  }
  const double p = 7.0 / 8.0;
  CHECK(std::abs(excited - 1e4 * p) <= 3.0 * std::sqrt(1e4 * p * (1.0 - p)));
}

TEST_CASE("sample_temperature follows the grid density") {
  const auto prior = discretize(kCase, 2048);
  RngStream rng(8, 1);
  const int n = 40000;
  int below = 0;
  double lo = 10.0, hi = 1.0;
  for (int i = 0; i < n; ++i) {
    const double t = sample_temperature(prior, rng);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
    below += t < 5.5 ? 1 : 0;
  }
  CHECK(lo >= 1.0);
  CHECK(hi <= 10.0);
  // The prior is symmetric about 5.5 in theta.
  CHECK(std::abs(below - 0.5 * n) <= 3.0 * std::sqrt(0.25 * n));
  // P(theta < 3) against the quadrature CDF.
  double mass3 = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i)
    if (prior.grid().theta()[i] < 3.0) mass3 += prior.mass(i);
  RngStream again(8, 2);
  int below3 = 0;
  for (int i = 0; i < n; ++i) below3 += sample_temperature(prior, again) < 3.0 ? 1 : 0;
  CHECK(std::abs(below3 - n * mass3) <= 3.0 * std::sqrt(n * mass3 * (1.0 - mass3)) + 0.002 * n);
}

TEST_CASE("optimize_gap on a point mass finds the critical ratio xi_D") {
  for (int n : {1, 4, 10}) {
    const std::size_t node = 900;
    const auto d = spike_at(node);
    ProtocolConfig c;
    c.n = n;
    c.objective = GapObjective::ExpectedHeatCapacity;
    const double theta0 = d.grid().theta()[node];
    const double gap = optimize_gap(d, c);
    CHECK(gap / theta0 == doctest::Approx(xi_d(c.round_dimension())).epsilon(2e-4));
  }
}

TEST_CASE("optimize_gap on a flat posterior is interior") {
  const auto d = discretize(PriorSpec::uniform(1.0, 10.0), 2048);
  ProtocolConfig c;
  const double lo = c.gap_search.lower_factor * 1.0;
  const double hi = c.gap_search.upper_factor * xi_d(c.round_dimension()) * 10.0;
  const double gap = optimize_gap(d, c);
  CHECK(gap > lo * 1.5);
  CHECK(gap < hi / 1.5);
  // The chosen gap is at least as good as every scan point.
  const double best = single_shot_emsle(d, make_effective_two_level(gap, c.round_dimension()));
  for (int j = 0; j < 64; ++j) {
    const double g = lo * std::pow(hi / lo, j / 63.0);
    CHECK(best <= single_shot_emsle(d, make_effective_two_level(g, c.round_dimension())) + 1e-15);
  }
}

TEST_CASE("run_trajectory: m = 0 and support checks") {
  const auto prior = discretize(kCase, 512);
  ProtocolConfig c;
  c.m = 0;
  RngStream rng(1, 1);
  const auto r = run_trajectory(prior, 4.0, c, rng);
  CHECK(r.rounds.empty());
  CHECK(r.final_estimator == optimal_estimator(prior));
  CHECK(r.final_posterior_msle == posterior_msle(prior));
  CHECK_THROWS_AS(run_trajectory(prior, 0.5, c, rng), DomainError);
  CHECK_THROWS_AS(run_trajectory(prior, 11.0, c, rng), DomainError);
}

TEST_CASE("run_trajectory is deterministic") {
  const auto prior = discretize(kCase, 1024);
  for (auto mode : {Adaptation::Adaptive, Adaptation::NonAdaptive}) {
    ProtocolConfig c;
    c.n = 2;
    c.m = 25;
    c.adaptation = mode;
    RngStream r1(77, 3), r2(77, 3);
    const auto a = run_trajectory(prior, 6.2, c, r1);
    const auto b = run_trajectory(prior, 6.2, c, r2);
    CHECK(a.rounds.size() == 25);
    CHECK(same_records(a, b));
  }
}

TEST_CASE("adaptive and non-adaptive agree on the first round") {
  const auto prior = discretize(kCase, 1024);
  ProtocolConfig c;
  c.m = 1;
  c.adaptation = Adaptation::Adaptive;
  RngStream r1(5, 0), r2(5, 0);
  const auto a = run_trajectory(prior, 3.3, c, r1);
  c.adaptation = Adaptation::NonAdaptive;
  const auto b = run_trajectory(prior, 3.3, c, r2);
  CHECK(same_records(a, b));

  c.m = 6;
  RngStream r3(5, 0), r4(5, 0);
  const auto na = run_trajectory(prior, 3.3, c, r3);
  c.adaptation = Adaptation::Adaptive;
  const auto ad = run_trajectory(prior, 3.3, c, r4);
  CHECK(na.rounds.front().gap == ad.rounds.front().gap);
  for (const auto& round : na.rounds) CHECK(round.gap == na.rounds.front().gap);
}

TEST_CASE("recorded posteriors match a batch update") {
  const auto prior = discretize(kCase, 2048);
  ProtocolConfig c;
  c.n = 3;
  c.m = 15;
  RngStream rng(11, 4);
  const auto rec = run_trajectory(prior, 7.7, c, rng, true);
  REQUIRE(rec.final_posterior.has_value());
  std::vector<double> batch(prior.density().begin(), prior.density().end());
  for (const auto& round : rec.rounds) {
    const auto s = make_effective_two_level(round.gap, c.round_dimension());
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] *= likelihood(s, prior.grid().theta()[i], round.outcome);
  }
  const GridDistribution b(prior.shared_grid(), batch);
  const auto& post = *rec.final_posterior;
  const double top = *std::max_element(b.density().begin(), b.density().end());
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(std::abs(post.density()[i] - b.density()[i]) <= 1e-12 * top);
  CHECK(rec.final_posterior_msle == doctest::Approx(posterior_msle(b)).epsilon(1e-10));
  CHECK(rec.final_estimator == doctest::Approx(optimal_estimator(b)).epsilon(1e-12));
  CHECK(rec.rounds.back().posterior_msle == rec.final_posterior_msle);
  const double lr = std::log(rec.final_estimator / 7.7);
  CHECK(rec.final_log_error == doctest::Approx(lr * lr).epsilon(1e-12));
}

TEST_CASE("a coarse grid is reported as under-resolved") {
  const auto prior = discretize(kCase, 64);
  ProtocolConfig c;
  c.n = 6;
  c.m = 40;
  RngStream rng(2, 2);
  const auto rec = run_trajectory(prior, 5.0, c, rng);
  CHECK(rec.under_resolved);
}
