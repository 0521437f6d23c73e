#include "tht/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tht {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;

double erfc_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Average ranks (1-based) with ties averaged.
std::vector<double> average_ranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  return rank;
}

double sample_variance(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return acc / (n - 1.0);
}

}  // namespace

double inverse_normal_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error("inverse normal cdf needs p in (0, 1)");
  }
  // Acklam's rational approximation, then one Halley step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = erfc_cdf(x) - p;
  const double u = e * std::sqrt(kTwoPi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

std::optional<double> rank_normalized_rhat(
    const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) {
    throw std::invalid_argument("rhat needs at least two chains");
  }
  std::size_t min_len = chains.front().size();
  for (const auto& c : chains) min_len = std::min(min_len, c.size());
  if (min_len < 4) {
    throw std::invalid_argument("rhat needs chains of length >= 4");
  }
  const std::size_t half = min_len / 2;

  // Split each chain into its first and last `half` draws (the middle draw
  // of an odd-length chain is dropped).
  std::vector<std::vector<double>> split;
  for (const auto& c : chains) {
    split.emplace_back(c.begin(), c.begin() + static_cast<long>(half));
    split.emplace_back(c.end() - static_cast<long>(half), c.end());
  }

  std::vector<double> pooled;
  pooled.reserve(split.size() * half);
  for (const auto& c : split) pooled.insert(pooled.end(), c.begin(), c.end());
  const double first = pooled.front();
  if (std::all_of(pooled.begin(), pooled.end(),
                  [&](double v) { return v == first; })) {
    return std::nullopt;  // zero pooled variance
  }

  const std::vector<double> ranks = average_ranks(pooled);
  const double total = static_cast<double>(pooled.size());
  std::vector<std::vector<double>> z(split.size());
  for (std::size_t c = 0, at = 0; c < split.size(); ++c) {
    z[c].resize(half);
    for (std::size_t i = 0; i < half; ++i, ++at) {
      z[c][i] = inverse_normal_cdf((ranks[at] - 0.375) / (total + 0.25));
    }
  }

  const double m = static_cast<double>(z.size());
  const double n = static_cast<double>(half);
  std::vector<double> means(z.size());
  double w = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    means[c] = std::accumulate(z[c].begin(), z[c].end(), 0.0) / n;
    w += sample_variance(z[c]);
  }
  w /= m;
  const double b = n * sample_variance(means);
  return std::sqrt((n - 1.0) / n + b / (n * w));
}

ProjectionSignClassifier::ProjectionSignClassifier(Vec midpoint, Vec direction)
    : midpoint_(std::move(midpoint)), direction_(std::move(direction)) {}

int ProjectionSignClassifier::classify(const Vec& x) const {
  const double proj = (x - midpoint_).dot(direction_);
  if (proj > 0.0) return 1;
  if (proj < 0.0) return 0;
  return kUnassigned;
}

NearestReferenceClassifier::NearestReferenceClassifier(
    std::vector<Vec> references, double margin)
    : references_(std::move(references)), margin_(margin) {
  if (references_.size() < 2) {
    throw std::invalid_argument("need at least two reference configurations");
  }
}

int NearestReferenceClassifier::classify(const Vec& x) const {
  int best = 0;
  double best_d = kInf, second_d = kInf;
  for (std::size_t r = 0; r < references_.size(); ++r) {
    const double d = (x - references_[r]).norm();
    if (d < best_d) {
      second_d = best_d;
      best_d = d;
      best = static_cast<int>(r);
    } else if (d < second_d) {
      second_d = d;
    }
  }
  if (second_d - best_d <= margin_ * std::max(best_d, second_d)) {
    return kUnassigned;
  }
  return best;
}

int count_mode_hops(const std::vector<Vec>& series,
                    const ModeClassifier& classifier) {
  int hops = 0;
  int last = ModeClassifier::kUnassigned;
  for (const Vec& x : series) {
    const int label = classifier.classify(x);
    if (label == ModeClassifier::kUnassigned) continue;  // carried forward
    if (last != ModeClassifier::kUnassigned && label != last) ++hops;
    last = label;
  }
  return hops;
}

double estimate_oscillation_frequency(const std::vector<double>& trace,
                                      double dt) {
  if (trace.size() < 4) throw std::invalid_argument("trace too short");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double n = static_cast<double>(trace.size());
  const double mean = std::accumulate(trace.begin(), trace.end(), 0.0) / n;
  double var = 0.0;
  for (double v : trace) var += (v - mean) * (v - mean);
  var /= n;
  if (var == 0.0) return 0.0;
  // Mean crossings with a +-0.25 sd dead band so sample noise near the mean
  // cannot inject spurious crossings; leaving the band for the first time
  // counts as a crossing when the trace starts inside it.
  const double band = 0.25 * std::sqrt(var);
  int crossings = 0;
  int state = 0;
  bool started_inside = std::abs(trace.front() - mean) <= band;
  for (double v : trace) {
    const double c = v - mean;
    const int sign = c > band ? 1 : (c < -band ? -1 : 0);
    if (sign == 0) continue;
    if (state != 0 && sign != state) {
      ++crossings;
    } else if (state == 0 && started_inside) {
      ++crossings;
    }
    state = sign;
  }
  if (crossings < 2) return 0.0;
  const double duration = n * dt;
  return static_cast<double>(crossings) / (2.0 * duration);
}

int recommended_period(double eps, double rho_min) {
  if (!(eps > 0.0) || !(rho_min > 0.0)) {
    throw std::invalid_argument("eps and rho_min must be positive");
  }
  return static_cast<int>(std::ceil(5.0 / (eps * rho_min)));
}

double recommended_max_eps(double rho_max) {
  if (!(rho_max > 0.0)) {
    throw std::invalid_argument("rho_max must be positive");
  }
  return 1.0 / (10.0 * rho_max);
}

TuningReport recommend_tuning(const PotentialModel& model,
                              const Vec& pilot_start, double schedule_amp,
                              const std::vector<double>& a_grid,
                              RngStream& rng, const PilotOptions& opts) {
  if (a_grid.empty()) throw std::invalid_argument("a grid is empty");
  if (!(schedule_amp > 0.0)) {
    throw std::invalid_argument("schedule amplitude must be positive");
  }
  const Index d = model.dim();
  const MassSpec mass = MassSpec::identity(d);
  const Vec v0 = rng.standard_normal(d);
  const int period = opts.period;
  const int quarter = period / 4;

  TuningReport report;
  report.scores.assign(a_grid.size(), kInf);
  std::vector<double> best_trace;
  double best_score = kInf;

  for (std::size_t gi = 0; gi < a_grid.size(); ++gi) {
    const double a = a_grid[gi];
    Vec x = pilot_start;
    Vec v = v0;
    Vec grad = model.gradient(x);
    std::vector<double> vbar;
    vbar.reserve(static_cast<std::size_t>(period));
    bool diverged = false;
    for (int n = 1; n <= period; ++n) {
      const double eta_half =
          schedule_amp * std::sin(kTwoPi * (n - 0.5) / period);
      const double scale = std::exp(2.0 * eta_half);
      const double step = opts.eps * std::pow(scale, a);
      detail::advance(model, x, v, grad, mass, scale, step, model.bounds());
      if (!x.allFinite()) {
        diverged = true;
        break;
      }
      const double eta = schedule_amp * std::sin(kTwoPi * n / period);
      vbar.push_back(v[opts.coordinate] * std::exp(a * eta));
    }
    if (diverged) continue;
    auto rms = [&](int from, int count) {
      double acc = 0.0;
      for (int i = from; i < from + count; ++i) {
        acc += vbar[static_cast<std::size_t>(i)] * vbar[static_cast<std::size_t>(i)];
      }
      return std::sqrt(acc / count);
    };
    const double head = rms(0, quarter);
    const double tail = rms(period - quarter, quarter);
    if (head <= 0.0 || tail <= 0.0) continue;
    report.scores[gi] = std::abs(std::log(tail) - std::log(head));
    if (report.scores[gi] < best_score) {
      best_score = report.scores[gi];
      best_trace = std::move(vbar);
      report.a_hat = a;
    }
  }

  if (!std::isfinite(best_score)) {
    throw PilotDiverged("all pilot paths diverged");
  }
  report.gamma_hat = 2.0 / report.a_hat - 2.0;

  // Frequency band of the tuning-frame velocity over sliding windows.
  const int window = period / 4;
  const int hop = period / 8;
  report.rho_min = kInf;
  report.rho_max = 0.0;
  for (int from = 0; from + window <= static_cast<int>(best_trace.size());
       from += hop) {
    const std::vector<double> piece(best_trace.begin() + from,
                                    best_trace.begin() + from + window);
    const double rho = estimate_oscillation_frequency(piece, opts.eps);
    if (rho > 0.0) {
      report.rho_min = std::min(report.rho_min, rho);
      report.rho_max = std::max(report.rho_max, rho);
    }
  }
  if (report.rho_max > 0.0 && std::isfinite(report.rho_min)) {
    report.period_min = recommended_period(opts.eps, report.rho_min);
    report.eps_max = recommended_max_eps(report.rho_max);
  } else {
    report.rho_min = 0.0;
    report.period_min = 0;
    report.eps_max = kInf;
  }
  return report;
}

std::vector<DeltaHPoint> delta_h_trace(const PotentialModel& model,
                                       const Vec& x0, const ThtConfig& cfg,
                                       RngStream& rng) {
  cfg.validate(model.dim());
  const double d = static_cast<double>(model.dim());
  auto energy = [&](const Vec& x, double k, const Vec& v) {
    const double alpha = cfg.schedule.alpha(k);
    return model.potential(x) + alpha * cfg.mass.kinetic(v) -
           0.5 * (d * std::log(alpha) + cfg.mass.log_det());
  };

  const int k0 = cfg.psi.sample(rng);
  Vec v = sample_initial_velocity(cfg.mass, cfg.schedule.alpha(k0), rng);
  Vec x = x0;
  Vec grad = model.gradient(x);
  const double e0 = energy(x, k0, v);

  std::vector<DeltaHPoint> trace;
  trace.reserve(static_cast<std::size_t>(cfg.max_proposals));
  for (int n = 1; n <= cfg.max_proposals; ++n) {
    const double k_half = static_cast<double>(k0) + n - 0.5;
    const double scale = cfg.schedule.alpha(k_half);
    const double step = cfg.eps * std::pow(scale, cfg.a);
    detail::advance(model, x, v, grad, cfg.mass, scale, step, model.bounds());
    if (!x.allFinite()) break;
    trace.push_back({n, energy(x, static_cast<double>(k0) + n, v) - e0});
  }
  return trace;
}

}  // namespace tht
