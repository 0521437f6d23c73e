#include <cmath>

#include "doctest.h"
#include "support/test_models.hpp"
#include "tht/leapfrog.hpp"
#include "tht/targets/mixture.hpp"
#include "tht/targets/power.hpp"
#include "tht/tht_map.hpp"

using namespace tht;
using testsupport::BoundedModel;
using testsupport::quadratic_model;
using testsupport::zero_model;

namespace {

ExtendedState reflect_t(const ExtendedState& s, int period) {
  return {s.position, (period - s.index) % period, -s.velocity};
}

ThtConfig make_cfg(double eps, double a, double amp, int period, Index dim,
                   int half_width = 2) {
  return ThtConfig{eps,
                   a,
                   1,
                   period,
                   MassSchedule::cosine(amp, 0.0, period),
                   IndexDistribution::windowed_uniform(period, half_width),
                   MassSpec::identity(dim)};
}

}  // namespace

TEST_CASE("leapfrog: zero gradient is pure drift") {
  const auto model = zero_model(3);
  RngStream rng(1);
  const Vec x = rng.standard_normal(3);
  const Vec v = rng.standard_normal(3);
  const auto out =
      leapfrog_step(model, {x, v}, MassSpec::identity(3), 1.0, 0.3);
  CHECK((out.position - (x + 0.3 * v)).norm() == 0.0);
  CHECK((out.velocity - v).norm() == 0.0);
}

TEST_CASE("leapfrog: hand-evaluated harmonic step") {
  const auto model = quadratic_model(1);
  const auto out = leapfrog_step(model, {Vec::Ones(1), Vec::Zero(1)},
                                 MassSpec::identity(1), 1.0, 0.1);
  CHECK(out.position[0] == doctest::Approx(0.995).epsilon(1e-12));
  CHECK(out.velocity[0] == doctest::Approx(-0.09975).epsilon(1e-12));
}

TEST_CASE("leapfrog: long-run energy drift stays small") {
  const auto model = quadratic_model(1);
  const MassSpec mass = MassSpec::identity(1);
  PhasePoint p{Vec::Ones(1), Vec::Zero(1)};
  const double h0 = model.potential(p.position) + mass.kinetic(p.velocity);
  for (int i = 0; i < 1000; ++i) p = leapfrog_step(model, p, mass, 1.0, 0.01);
  const double h1 = model.potential(p.position) + mass.kinetic(p.velocity);
  CHECK(std::abs(h1 - h0) < 1e-4);
}

TEST_CASE("box reflection folds positions and flips velocities") {
  const Box box(Vec::Zero(1), Vec::Ones(1));

  auto [x1, v1] = reflect_into_box(Vec::Constant(1, 0.5), Vec::Ones(1), box);
  CHECK(x1[0] == 0.5);
  CHECK(v1[0] == 1.0);

  auto [x2, v2] =
      reflect_into_box(Vec::Constant(1, 1.2), Vec::Constant(1, 0.3), box);
  CHECK(x2[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(v2[0] == doctest::Approx(-0.3).epsilon(1e-15));

  // two folds: 2.5 -> -0.5 -> 0.5, velocity negated twice
  auto [x3, v3] = reflect_into_box(Vec::Constant(1, 2.5), Vec::Ones(1), box);
  CHECK(x3[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(v3[0] == 1.0);

  CHECK_THROWS_AS(Box(Vec::Ones(1), Vec::Zero(1)), DegenerateBox);
  CHECK_THROWS_AS(Box(Vec::Ones(1), Vec::Ones(1)), DegenerateBox);
}

TEST_CASE("reflection preserves speed and is idempotent in the box") {
  RngStream rng(3);
  Vec lo = (Vec(2) << -0.5, 0.0).finished();
  Vec hi = (Vec(2) << 1.0, 2.0).finished();
  const Box box(lo, hi);
  for (int rep = 0; rep < 200; ++rep) {
    const Vec x = 6.0 * rng.standard_normal(2);
    const Vec v = rng.standard_normal(2);
    const auto [xf, vf] = reflect_into_box(x, v, box);
    CHECK(box.contains(xf));
    CHECK((vf.cwiseAbs() - v.cwiseAbs()).norm() == 0.0);
    const auto [xg, vg] = reflect_into_box(xf, vf, box);
    CHECK((xg - xf).norm() == 0.0);
    CHECK((vg - vf).norm() == 0.0);
  }
}

TEST_CASE("tht map with a flat schedule is a plain leapfrog step") {
  const auto model = quadratic_model(2);
  const ThtConfig cfg = make_cfg(0.1, 0.7, 0.0, 8, 2);
  RngStream rng(4);
  const Vec x = rng.standard_normal(2);
  const Vec v = rng.standard_normal(2);
  const ExtendedState out = tht_map(model, {x, 3, v}, cfg);
  const PhasePoint plain = leapfrog_step(model, {x, v}, cfg.mass, 1.0, cfg.eps);
  CHECK((out.position - plain.position).norm() == 0.0);
  CHECK((out.velocity - plain.velocity).norm() == 0.0);
  CHECK(out.index == 4);
}

TEST_CASE("T S T S is the identity") {
  const GaussianMixture mix = GaussianMixture::two_modes(
      Vec::Constant(1, -5.0), Vec::Constant(1, 5.0), 1.0);
  const ThtConfig cfg = make_cfg(0.05, 0.5, 1.5, 64, 1);
  RngStream rng(5);
  for (int rep = 0; rep < 25; ++rep) {
    const ExtendedState s0{5.0 * rng.standard_normal(1),
                           static_cast<int>(rng.uniform01() * 64),
                           rng.standard_normal(1)};
    ExtendedState s = tht_map(mix, s0, cfg);
    s = reflect_t(s, 64);
    s = tht_map(mix, s, cfg);
    s = reflect_t(s, 64);
    CHECK(s.index == s0.index);
    CHECK((s.position - s0.position).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s.velocity - s0.velocity).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("T S T S is the identity with bounds active") {
  const auto base = quadratic_model(2);
  const BoundedModel model(base,
                           Box(Vec::Constant(2, -0.4), Vec::Constant(2, 0.6)));
  const ThtConfig cfg = make_cfg(0.21, 0.5, 1.0, 32, 2);
  RngStream rng(6);
  int folded_runs = 0;
  for (int rep = 0; rep < 50; ++rep) {
    Vec x(2);
    x << rng.uniform01() - 0.4, rng.uniform01() - 0.4;
    const ExtendedState s0{x, static_cast<int>(rng.uniform01() * 32),
                           3.0 * rng.standard_normal(2)};
    if (!model.bounds()->contains(
            (s0.position + 0.2 * s0.velocity).eval())) {
      ++folded_runs;  // this run will cross the boundary
    }
    ExtendedState s = tht_map(model, s0, cfg);
    s = reflect_t(s, 32);
    s = tht_map(model, s, cfg);
    s = reflect_t(s, 32);
    CHECK(s.index == s0.index);
    CHECK((s.position - s0.position).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s.velocity - s0.velocity).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK(folded_runs > 10);
}

TEST_CASE("constant schedule equals rescaled baseline leapfrog") {
  // eta == 0.5 log(alpha) run with eps' = eps alpha^{1/2-a} and
  // v' = v / sqrt(alpha) retraces the eta == 0 run with (eps, v).
  const GaussianMixture mix = GaussianMixture::two_modes(
      Vec::Constant(1, -3.0), Vec::Constant(1, 3.0), 1.0);
  const double alpha = 6.25;
  const double a = 0.65;
  const double eps = 0.02;

  ThtConfig scaled = make_cfg(eps * std::pow(alpha, 0.5 - a), a, 0.0, 256, 1);
  scaled.schedule = MassSchedule::cosine(0.0, 0.5 * std::log(alpha), 256);
  const ThtConfig baseline = make_cfg(eps, a, 0.0, 256, 1);

  RngStream rng(7);
  ExtendedState s_base{rng.standard_normal(1), 0, rng.standard_normal(1)};
  ExtendedState s_scaled{s_base.position, 0,
                         s_base.velocity / std::sqrt(alpha)};
  for (int n = 0; n < 100; ++n) {
    s_scaled = tht_map(mix, s_scaled, scaled);
    s_base = tht_map(mix, s_base, baseline);
    const double scale = std::max(1.0, s_base.position.cwiseAbs().maxCoeff());
    CHECK((s_scaled.position - s_base.position).cwiseAbs().maxCoeff() <=
          1e-8 * scale);
  }
}

TEST_CASE("bar transform") {
  {
    const auto [xb, vb] =
        bar_transform(Vec::Constant(1, 2.0), Vec::Constant(1, 3.0), 0.0, 0.7);
    CHECK(xb[0] == 2.0);
    CHECK(vb[0] == 3.0);
  }
  {
    const auto [xb, vb] =
        bar_transform(Vec::Ones(1), Vec::Ones(1), std::log(2.0), 0.5);
    CHECK(xb[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(vb[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }
  {
    // inverse scaling recovers the input (up to one rounding of the factors)
    RngStream rng(8);
    const Vec x = rng.standard_normal(3);
    const Vec v = rng.standard_normal(3);
    const auto [xb, vb] = bar_transform(x, v, 1.3, 0.4);
    const auto [xr, vr] = bar_transform(xb, vb, 1.3, -0.4);
    CHECK((xr - x).cwiseAbs().maxCoeff() <= 4e-16 * x.cwiseAbs().maxCoeff());
    CHECK((vr - v).cwiseAbs().maxCoeff() <= 4e-16 * v.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("tht map preserves phase-space volume") {
  RngStream rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const Index d = 1 + static_cast<Index>(rng.uniform01() * 3);
    const GaussianMixture mix = GaussianMixture::two_modes(
        Vec::Constant(d, -2.0), Vec::Constant(d, 2.0), 1.0);
    const ThtConfig cfg = make_cfg(0.08, 0.5, 1.0, 40, d);
    const int k = static_cast<int>(rng.uniform01() * 40);
    auto map = [&](const Vec& x, const Vec& v) {
      const ExtendedState out = tht_map(mix, {x, k, v}, cfg);
      return std::make_pair(out.position, out.velocity);
    };
    const double det = testsupport::phase_jacobian_det(
        map, (2.0 * rng.standard_normal(d)).eval(), rng.standard_normal(d));
    CHECK(std::abs(det - 1.0) < 1e-4);
  }
}

TEST_CASE("mass-time equivariance reproduces position paths") {
  const GaussianMixture mix = GaussianMixture::two_modes(
      Vec::Constant(2, -4.0), Vec::Constant(2, 4.0), 1.0);
  const auto quad = quadratic_model(2);
  const PotentialModel* models[] = {&mix, &quad};
  const MassSpec mass = MassSpec::identity(2);
  RngStream rng(10);
  for (const double alpha : {0.25, 4.0, 100.0}) {
    for (const auto* model : models) {
      for (int rep = 0; rep < 15; ++rep) {
        PhasePoint a{rng.standard_normal(2), rng.standard_normal(2)};
        PhasePoint b{a.position, a.velocity / std::sqrt(alpha)};
        const double eps = 0.02;
        for (int n = 0; n < 100; ++n) {
          a = leapfrog_step(*model, a, mass, 1.0, eps);
          b = leapfrog_step(*model, b, mass, alpha, std::sqrt(alpha) * eps);
          const double scale = std::max(1.0, a.position.cwiseAbs().maxCoeff());
          REQUIRE((a.position - b.position).cwiseAbs().maxCoeff() <=
                  1e-8 * scale);
        }
      }
    }
  }
}

TEST_CASE("schedule shift invariance of the position path") {
  const GaussianMixture mix = GaussianMixture::two_modes(
      Vec::Constant(1, -3.0), Vec::Constant(1, 3.0), 1.0);
  RngStream rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const double c = 4.0 * rng.uniform01() - 2.0;
    const double a = 0.3 + 0.5 * rng.uniform01();
    const double eps = 0.02;
    ThtConfig base = make_cfg(eps, a, 1.2, 128, 1);
    ThtConfig shifted =
        make_cfg(eps * std::exp((-2.0 * a + 1.0) * c), a, 1.2, 128, 1);
    shifted.schedule = MassSchedule::cosine(1.2, c, 128);

    ExtendedState sa{rng.standard_normal(1), 0, rng.standard_normal(1)};
    ExtendedState sb{sa.position, 0, sa.velocity * std::exp(-c)};
    for (int n = 0; n < 100; ++n) {
      sa = tht_map(mix, sa, base);
      sb = tht_map(mix, sb, shifted);
      const double scale = std::max(1.0, sa.position.cwiseAbs().maxCoeff());
      REQUIRE((sa.position - sb.position).cwiseAbs().maxCoeff() <=
              1e-8 * scale);
    }
  }
}

TEST_CASE(
    "tuning-frame velocity has stable amplitude at the matched exponent") {
  // U(x) = x^2 with slowly growing eta and a = 1/2: the amplitude of
  // v e^{a eta} varies by less than 10% over the ramp.
  const PowerPotential model(1.0, 2.0, Index{1});
  const MassSpec mass = MassSpec::identity(1);
  const double slope = 0.02;  // d eta / dt
  const double eps = 0.05;
  const double a = 0.5;
  Vec x = Vec::Constant(1, 1.0);
  Vec v = Vec::Zero(1);
  Vec grad = model.gradient(x);
  const int steps = 3000;
  std::vector<double> vbar;
  for (int n = 1; n <= steps; ++n) {
    const double eta_half = slope * eps * (n - 0.5);
    const double scale = std::exp(2.0 * eta_half);
    detail::advance(model, x, v, grad, mass, scale, eps * std::pow(scale, a),
                    nullptr);
    vbar.push_back(v[0] * std::exp(a * slope * eps * n));
  }
  const int window = 500;
  double rms_min = kInf, rms_max = 0.0;
  for (int from = 0; from + window <= steps; from += window / 2) {
    double acc = 0.0;
    for (int i = from; i < from + window; ++i) {
      acc += vbar[static_cast<std::size_t>(i)] *
             vbar[static_cast<std::size_t>(i)];
    }
    const double rms = std::sqrt(acc / window);
    rms_min = std::min(rms_min, rms);
    rms_max = std::max(rms_max, rms);
  }
  CHECK((rms_max - rms_min) / (0.5 * (rms_max + rms_min)) < 0.10);
}
