#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "support/stats.hpp"
#include "support/test_models.hpp"
#include "tht/diagnostics.hpp"
#include "tht/targets/mixture.hpp"
#include "tht/targets/power.hpp"

using namespace tht;

namespace {

// Independent rank-normalized split R-hat: ranks via sorted pairs, normal
// scores via bisection on the erfc-based CDF, moments via accumulators.
double oracle_rhat(const std::vector<std::vector<double>>& chains) {
  std::size_t half = chains.front().size();
  for (const auto& c : chains) half = std::min(half, c.size());
  half /= 2;
  std::vector<std::vector<double>> split;
  for (const auto& c : chains) {
    split.emplace_back(c.begin(), c.begin() + static_cast<long>(half));
    split.emplace_back(c.end() - static_cast<long>(half), c.end());
  }
  std::vector<std::pair<double, std::size_t>> pooled;
  for (std::size_t c = 0; c < split.size(); ++c) {
    for (std::size_t i = 0; i < half; ++i) {
      pooled.emplace_back(split[c][i], c * half + i);
    }
  }
  std::sort(pooled.begin(), pooled.end());
  std::vector<double> rank(pooled.size());
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1].first == pooled[i].first) ++j;
    for (std::size_t k = i; k <= j; ++k) {
      rank[pooled[k].second] = 0.5 * static_cast<double>(i + j) + 1.0;
    }
    i = j + 1;
  }
  auto inv_phi = [](double p) {
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (testsupport::normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double total = static_cast<double>(pooled.size());
  std::vector<std::vector<double>> z(split.size(),
                                     std::vector<double>(half, 0.0));
  for (std::size_t c = 0; c < split.size(); ++c) {
    for (std::size_t i = 0; i < half; ++i) {
      z[c][i] = inv_phi((rank[c * half + i] - 0.375) / (total + 0.25));
    }
  }
  const double m = static_cast<double>(z.size());
  const double n = static_cast<double>(half);
  double w = 0.0;
  std::vector<double> means;
  for (const auto& c : z) {
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / n;
    means.push_back(mean);
    double acc = 0.0;
    for (double v : c) acc += (v - mean) * (v - mean);
    w += acc / (n - 1.0);
  }
  w /= m;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b = 0.0;
  for (double v : means) b += (v - grand) * (v - grand);
  b *= n / (m - 1.0);
  return std::sqrt((n - 1.0) / n + b / (n * w));
}

}  // namespace

TEST_CASE("rhat: constant chains are undefined") {
  const std::vector<std::vector<double>> chains(4,
                                                std::vector<double>(100, 2.5));
  CHECK(!rank_normalized_rhat(chains).has_value());
}

TEST_CASE("rhat: stationary chains sit at one") {
  std::vector<std::vector<double>> chains;
  for (int c = 0; c < 4; ++c) {
    RngStream rng = RngStream::derive(50, static_cast<std::uint64_t>(c));
    std::vector<double> draws(10000);
    for (auto& v : draws) v = rng.normal();
    chains.push_back(std::move(draws));
  }
  const auto r = rank_normalized_rhat(chains);
  REQUIRE(r.has_value());
  CHECK(*r >= 0.999);
  CHECK(*r <= 1.01);
  CHECK(*r == doctest::Approx(oracle_rhat(chains)).epsilon(1e-9));
}

TEST_CASE("rhat: separated chains saturate the rank-normalized bound") {
  // For two fully separated chains the pooled normal scores are the two
  // halves of a standard normal, so B/n -> 2/pi + (2/pi)/... and W -> 1-2/pi:
  // the statistic saturates near sqrt(1 + (4/3)(2/pi)/(1-2/pi)) ~ 1.83
  // instead of growing with the separation.
  std::vector<std::vector<double>> chains(2);
  RngStream rng(51);
  for (int i = 0; i < 1000; ++i) {
    chains[0].push_back(rng.normal());
    chains[1].push_back(10.0 + rng.normal());
  }
  const auto r = rank_normalized_rhat(chains);
  REQUIRE(r.has_value());
  CHECK(*r > 1.7);
  CHECK(*r == doctest::Approx(oracle_rhat(chains)).epsilon(1e-9));
}

TEST_CASE("rhat is exactly invariant under monotone transforms") {
  std::vector<std::vector<double>> chains;
  for (int c = 0; c < 3; ++c) {
    RngStream rng = RngStream::derive(52, static_cast<std::uint64_t>(c));
    std::vector<double> draws(500);
    for (auto& v : draws) v = 0.3 * c + rng.normal();
    chains.push_back(std::move(draws));
  }
  const auto base = rank_normalized_rhat(chains);
  auto transformed = chains;
  for (auto& c : transformed) {
    for (auto& v : c) v = std::exp(v);
  }
  const auto after = rank_normalized_rhat(transformed);
  REQUIRE(base.has_value());
  REQUIRE(after.has_value());
  CHECK(*base == *after);
}

TEST_CASE("rhat input validation") {
  CHECK_THROWS_AS(rank_normalized_rhat({{1.0, 2.0, 3.0, 4.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(rank_normalized_rhat({{1.0, 2.0}, {1.0, 2.0}}),
                  std::invalid_argument);
}

TEST_CASE("mode hop counting") {
  const ProjectionSignClassifier sign(Vec::Zero(1), Vec::Ones(1));
  {
    const std::vector<Vec> series(10, Vec::Constant(1, 2.0));
    CHECK(count_mode_hops(series, sign) == 0);
  }
  {
    std::vector<Vec> series;
    for (const double v : {-1.0, -1.0, 1.0, 1.0, -1.0}) {
      series.push_back(Vec::Constant(1, v));
    }
    CHECK(count_mode_hops(series, sign) == 2);
  }
  {
    // unassigned states carry the previous label
    std::vector<Vec> series;
    for (const double v : {-1.0, 0.0, 1.0, 0.0, 1.0}) {
      series.push_back(Vec::Constant(1, v));
    }
    CHECK(count_mode_hops(series, sign) == 1);
  }
}

TEST_CASE("mode hops are invariant under relabeling") {
  RngStream rng(53);
  std::vector<Vec> series;
  for (int i = 0; i < 200; ++i) {
    series.push_back(Vec::Constant(2, rng.normal()));
  }
  const NearestReferenceClassifier ab(
      {Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)});
  const NearestReferenceClassifier ba(
      {Vec::Constant(2, 1.0), Vec::Constant(2, -1.0)});
  CHECK(count_mode_hops(series, ab) == count_mode_hops(series, ba));
}

TEST_CASE("a tempered chain on the far bimodal target hops early and often") {
  const GaussianMixture mix = GaussianMixture::two_modes(
      Vec::Constant(1, -200.0), Vec::Constant(1, 200.0), 1.0);
  const ThtConfig cfg{0.1,
                      0.5,
                      10,
                      520,
                      MassSchedule::cosine(6.0, 0.0, 500),
                      IndexDistribution::windowed_uniform(500, 4),
                      MassSpec::identity(1)};
  RngStream rng(54);
  auto kernel = [&](const Vec& x, RngStream& r) {
    return tht_step(mix, x, cfg, r);
  };
  const ChainOutput out =
      run_chain(kernel, Vec::Constant(1, -200.0), 500, rng);
  const ProjectionSignClassifier sign(Vec::Zero(1), Vec::Ones(1));
  CHECK(count_mode_hops(out.states, sign) >= 20);
}

TEST_CASE("oscillation frequency estimation") {
  {
    const std::vector<double> flat(100, 1.0);
    CHECK(estimate_oscillation_frequency(flat, 0.01) == 0.0);
  }
  {
    std::vector<double> trace(1000);
    for (int i = 0; i < 1000; ++i) {
      trace[static_cast<std::size_t>(i)] =
          std::sin(2.0 * 3.14159265358979323846 * 0.01 * i);
    }
    const double rho = estimate_oscillation_frequency(trace, 0.01);
    CHECK(rho > 0.99);
    CHECK(rho < 1.01);
  }
  {
    RngStream rng(55);
    std::vector<double> trace(2000);
    for (int i = 0; i < 2000; ++i) {
      trace[static_cast<std::size_t>(i)] =
          std::sin(6.0 * 3.14159265358979323846 * 0.005 * i) +
          0.05 * rng.normal();
    }
    const double rho = estimate_oscillation_frequency(trace, 0.005);
    CHECK(rho > 2.9);
    CHECK(rho < 3.1);
  }
}

TEST_CASE("tuning guideline formulas") {
  CHECK(recommended_period(0.1, 1.0) == 50);
  CHECK(recommended_max_eps(2.0) == doctest::Approx(0.05).epsilon(1e-14));
  CHECK_THROWS_AS(recommended_period(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("the advisor recovers the matched time-scale exponent") {
  PilotOptions opts;
  opts.eps = 0.02;
  opts.period = 10000;
  {
    const PowerPotential model(1.0, 2.0, Index{1});
    RngStream rng(56);
    const TuningReport rep = recommend_tuning(model, Vec::Ones(1), 1.5,
                                              {0.4, 0.5, 0.6}, rng, opts);
    CHECK(rep.a_hat == 0.5);
    CHECK(rep.gamma_hat == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.rho_min > 0.0);
    CHECK(rep.period_min > 0);
    CHECK(rep.eps_max > opts.eps);
  }
  {
    const PowerPotential model(1.0, 1.0, Index{1});
    RngStream rng(57);
    const TuningReport rep = recommend_tuning(
        model, Vec::Ones(1), 1.5, {0.5, 2.0 / 3.0, 0.8}, rng, opts);
    CHECK(rep.a_hat == 2.0 / 3.0);
  }
  {
    const PowerPotential model(1.0, 3.0, Index{1});
    RngStream rng(58);
    const TuningReport rep = recommend_tuning(model, Vec::Ones(1), 1.5,
                                              {0.3, 0.4, 0.5}, rng, opts);
    CHECK(rep.a_hat == 0.4);
  }
}

TEST_CASE("the advisor reports divergence of every pilot") {
  const PowerPotential model(1.0, 2.0, Index{1});
  RngStream rng(59);
  PilotOptions opts;
  opts.eps = 0.5;
  opts.period = 2000;
  CHECK_THROWS_AS(
      recommend_tuning(model, Vec::Ones(1), 2.0, {4.0, 5.0}, rng, opts),
      PilotDiverged);
}

TEST_CASE("delta H trace is flat for a flat schedule at a small step") {
  const GaussianMixture target(
      {GaussianMixture::spherical(1.0, Vec::Zero(1), 1.0)});
  const ThtConfig cfg{1e-3,
                      0.5,
                      1,
                      1000,
                      MassSchedule::cosine(0.0, 0.0, 1000),
                      IndexDistribution::windowed_uniform(1000, 0),
                      MassSpec::identity(1)};
  RngStream rng(60);
  const auto trace = delta_h_trace(target, Vec::Constant(1, 0.4), cfg, rng);
  REQUIRE(trace.size() == 1000);
  double worst = 0.0;
  for (const auto& p : trace) worst = std::max(worst, std::abs(p.delta_h));
  CHECK(worst < 1e-3);
}

TEST_CASE("delta H returns to zero after a full tempering cycle") {
  const GaussianMixture mix = GaussianMixture::two_modes(
      Vec::Constant(1, -200.0), Vec::Constant(1, 200.0), 1.0);
  const ThtConfig cfg{0.1,
                      0.5,
                      1,
                      500,
                      MassSchedule::cosine(6.0, 0.0, 500),
                      IndexDistribution::windowed_uniform(500, 0),
                      MassSpec::identity(1)};
  int end_ok = 0, pumped = 0, mid_large = 0;
  for (int seed = 0; seed < 50; ++seed) {
    RngStream rng = RngStream::derive(61, static_cast<std::uint64_t>(seed));
    const Vec x0 = Vec::Constant(1, -200.0 + rng.normal());
    const auto trace = delta_h_trace(mix, x0, cfg, rng);
    REQUIRE(trace.size() == 500);
    const double mid = trace[249].delta_h;
    const double end = trace[499].delta_h;
    end_ok += std::abs(end) <= 5.0 ? 1 : 0;
    pumped += mid > end ? 1 : 0;
    mid_large += mid > 10.0 ? 1 : 0;
  }
  CHECK(end_ok >= 40);     // full-cycle increments near zero
  CHECK(pumped >= 45);     // energy pumped in mid-cycle exceeds the residual
  CHECK(mid_large >= 45);  // and is large in absolute terms
}
