#include "tht/experiments.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "tht/diagnostics.hpp"
#include "tht/gibbs.hpp"
#include "tht/samplers.hpp"
#include "tht/targets/augmented.hpp"
#include "tht/targets/mixture.hpp"
#include "tht/targets/power.hpp"
#include "tht/targets/sensor.hpp"

namespace tht {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config access with field-naming errors

const Json* find_member(const Json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double require_number(const Json& j, const std::string& path) {
  auto pos = path.rfind('.');
  const Json* node = &j;
  std::string key = path;
  if (pos != std::string::npos) {
    const std::string section = path.substr(0, pos);
    key = path.substr(pos + 1);
    node = find_member(j, section);
    if (node == nullptr) {
      throw ConfigError("config section `" + section + "` (for field `" +
                        path + "`) is missing");
    }
  }
  const Json* field = find_member(*node, key);
  if (field == nullptr) {
    throw ConfigError("config field `" + path + "` is missing");
  }
  if (!field->is_number()) {
    throw ConfigError("config field `" + path + "` must be a number");
  }
  return field->get<double>();
}

double number_or(const Json& j, const std::string& key, double fallback) {
  const Json* field = find_member(j, key);
  if (field == nullptr) return fallback;
  if (!field->is_number()) {
    throw ConfigError("config field `" + key + "` must be a number");
  }
  return field->get<double>();
}

int int_or(const Json& j, const std::string& key, int fallback) {
  const Json* field = find_member(j, key);
  if (field == nullptr) return fallback;
  if (!field->is_number_integer()) {
    throw ConfigError("config field `" + key + "` must be an integer");
  }
  return field->get<int>();
}

std::string string_or(const Json& j, const std::string& key,
                      const std::string& fallback) {
  const Json* field = find_member(j, key);
  if (field == nullptr) return fallback;
  if (!field->is_string()) {
    throw ConfigError("config field `" + key + "` must be a string");
  }
  return field->get<std::string>();
}

Json section_or_empty(const Json& j, const std::string& key) {
  const Json* field = find_member(j, key);
  if (field == nullptr) return Json::object();
  if (!field->is_object()) {
    throw ConfigError("config field `" + key + "` must be an object");
  }
  return *field;
}

// ---------------------------------------------------------------------------
// Artifact bookkeeping: every file is registered so a failed run can remove
// what it already wrote.

class ArtifactSet {
 public:
  explicit ArtifactSet(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) {
      throw ExperimentFailure("cannot create output directory " +
                              dir_.string());
    }
  }

  fs::path path(const std::string& name) {
    created_.push_back(dir_ / name);
    return created_.back();
  }

  void discard_all() {
    for (const auto& p : created_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

 private:
  fs::path dir_;
  std::vector<fs::path> created_;
};

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header)
      : os_(path, std::ios::binary) {
    if (!os_) throw ExperimentFailure("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
      os_ << (i == 0 ? "" : ",") << header[i];
    }
    os_ << "\n";
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      os_ << (i == 0 ? "" : ",") << format17(values[i]);
    }
    os_ << "\n";
  }

 private:
  std::ofstream os_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ExperimentFailure("cannot write " + path.string());
  os << text;
}

// ---------------------------------------------------------------------------
// Shared pieces

struct CommonSettings {
  std::uint64_t seed;
  int iters;
  int chains;
  int workers;
  bool emit_trace;
};

CommonSettings common_settings(const Json& cfg, const RunOverrides& ov,
                               int default_iters, int default_chains) {
  CommonSettings s;
  s.seed = ov.seed.value_or(
      static_cast<std::uint64_t>(number_or(cfg, "seed", 1.0)));
  s.iters = ov.iters.value_or(int_or(cfg, "iters", default_iters));
  s.chains = int_or(cfg, "chains", default_chains);
  s.workers = ov.workers.value_or(int_or(cfg, "workers", 1));
  const Json* t = find_member(cfg, "emit_trace");
  s.emit_trace = t != nullptr && t->is_boolean() && t->get<bool>();
  if (s.iters < 1) throw ConfigError("config field `iters` must be >= 1");
  if (s.chains < 1) throw ConfigError("config field `chains` must be >= 1");
  return s;
}

ThtConfig tht_section(const Json& cfg, Index dim, double default_eta_star,
                      int default_period, int default_half_width,
                      int default_acceptable, int default_max_proposals) {
  const Json sec = section_or_empty(cfg, "tht");
  const double eps = require_number(cfg, "tht.eps");
  const double a = number_or(sec, "a", 0.5);
  const double eta_star = number_or(sec, "eta_star", default_eta_star);
  const double c_eta = number_or(sec, "c_eta", 0.0);
  const int period = int_or(sec, "period", default_period);
  const int half_width = int_or(sec, "psi_half_width", default_half_width);
  const int acceptable = int_or(sec, "acceptable", default_acceptable);
  const int max_proposals =
      int_or(sec, "max_proposals", default_max_proposals);
  try {
    ThtConfig out{eps,
                  a,
                  acceptable,
                  max_proposals,
                  MassSchedule::cosine(eta_star, c_eta, period),
                  IndexDistribution::windowed_uniform(period, half_width),
                  MassSpec::identity(dim)};
    out.validate(dim);
    return out;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config section `tht`: ") + e.what());
  }
}

HmcConfig hmc_section(const Json& cfg, const std::string& name, Index dim,
                      int default_leapfrog, const double* default_eps) {
  const Json sec = section_or_empty(cfg, name);
  double eps;
  if (default_eps != nullptr) {
    eps = number_or(sec, "eps", *default_eps);
  } else {
    eps = require_number(cfg, name + ".eps");
  }
  const int n_leapfrog = int_or(sec, "n_leapfrog", default_leapfrog);
  try {
    HmcConfig out{eps, n_leapfrog, MassSpec::identity(dim)};
    out.validate(dim);
    return out;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config section `" + name + "`: " + e.what());
  }
}

Json chain_summary(const ChainOutput& chain) {
  Json j;
  int accepted = 0;
  long long proposals = 0;
  double dh_sum = 0.0, dh_min = kInf, dh_max = -kInf;
  for (const auto& r : chain.step_results) {
    accepted += r.accepted_move ? 1 : 0;
    proposals += r.proposals_used;
    if (r.accepted_move) {
      dh_sum += r.delta_h;
      dh_min = std::min(dh_min, r.delta_h);
      dh_max = std::max(dh_max, r.delta_h);
    }
  }
  const double n = static_cast<double>(chain.step_results.size());
  j["acceptance_rate"] = accepted / std::max(1.0, n);
  j["accepted_moves"] = accepted;
  j["proposals_total"] = proposals;
  if (accepted > 0) {
    j["delta_h_mean"] = dh_sum / accepted;
    j["delta_h_min"] = dh_min;
    j["delta_h_max"] = dh_max;
  }
  j["wall_time_seconds"] = chain.wall_time;
  return j;
}

std::vector<std::vector<double>> coordinate_series(
    const std::vector<ChainOutput>& chains, Index coord) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    std::vector<double> series;
    series.reserve(c.states.size());
    for (const auto& s : c.states) series.push_back(s[coord]);
    out.push_back(std::move(series));
  }
  return out;
}

void write_diagnostics(ArtifactSet& artifacts, const Json& diag) {
  write_text(artifacts.path("diagnostics.json"), diag.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// mixture1d / mixture_hd

void run_mixture(const Json& cfg, const RunOverrides& ov,
                 ArtifactSet& artifacts, bool high_dim) {
  const CommonSettings s =
      common_settings(cfg, ov, high_dim ? 100 : 500, high_dim ? 1 : 4);
  const int dim = high_dim ? ov.dim.value_or(int_or(cfg, "dim", 10000)) : 1;
  if (dim < 1) throw ConfigError("config field `dim` must be >= 1");
  const double separation = number_or(cfg, "separation", 400.0);
  const double sd = number_or(cfg, "sd", 1.0);

  Vec mean1(dim), mean2(dim);
  if (high_dim) {
    const double c = 0.5 * separation / std::sqrt(static_cast<double>(dim));
    mean1.setConstant(-c);
    mean2.setConstant(c);
  } else {
    mean1 << -0.5 * separation;
    mean2 << 0.5 * separation;
  }
  const GaussianMixture target =
      GaussianMixture::two_modes(mean1, mean2, sd);

  const ThtConfig tht_cfg =
      high_dim ? tht_section(cfg, dim, 6.0, 1500, 4, 10, 1700)
               : tht_section(cfg, dim, 6.0, 500, 4, 10, 520);

  // Chains start in the first mode, as in a warm start from a local search.
  std::vector<Vec> inits;
  RngStream init_rng = RngStream::derive(s.seed, 1000000);
  for (int c = 0; c < s.chains; ++c) {
    inits.push_back(mean1 + sd * init_rng.standard_normal(dim));
  }

  auto factory = [&](int) {
    return [&](const Vec& x, RngStream& rng) {
      return tht_step(target, x, tht_cfg, rng);
    };
  };
  const auto chains =
      run_parallel_chains(factory, inits, s.iters, s.seed, s.workers);

  const Vec mid = 0.5 * (mean1 + mean2);
  const Vec dir = (mean2 - mean1).normalized();
  const ProjectionSignClassifier classifier(mid, dir);

  {
    std::vector<std::string> header = {"iteration", "chain"};
    if (high_dim) {
      header.push_back("proj_par");
      header.push_back("proj_perp");
    } else {
      header.push_back("x");
    }
    CsvWriter csv(artifacts.path("chains.csv"), header);
    Vec perp;
    if (high_dim) {
      perp = Vec::Zero(dim);
      perp[0] = 1.0;
      perp -= perp.dot(dir) * dir;
      perp.normalize();
    }
    for (std::size_t c = 0; c < chains.size(); ++c) {
      for (std::size_t i = 0; i < chains[c].states.size(); ++i) {
        const Vec& x = chains[c].states[i];
        if (high_dim) {
          csv.row({static_cast<double>(i), static_cast<double>(c),
                   (x - mid).dot(dir), (x - mid).dot(perp)});
        } else {
          csv.row({static_cast<double>(i), static_cast<double>(c), x[0]});
        }
      }
    }
  }

  if (s.emit_trace) {
    CsvWriter csv(artifacts.path("trace.csv"), {"step", "delta_h"});
    RngStream trace_rng = RngStream::derive(s.seed, 2000000);
    const auto trace = delta_h_trace(target, inits[0], tht_cfg, trace_rng);
    for (const auto& p : trace) {
      csv.row({static_cast<double>(p.step), p.delta_h});
    }
  }

  Json diag;
  diag["kind"] = high_dim ? "mixture_hd" : "mixture1d";
  diag["seed"] = s.seed;
  diag["iters"] = s.iters;
  diag["chains"] = s.chains;
  if (high_dim) diag["dim"] = dim;
  Json per_chain = Json::array();
  int total_hops = 0;
  for (const auto& chain : chains) {
    Json cj = chain_summary(chain);
    const int hops = count_mode_hops(chain.states, classifier);
    cj["hops"] = hops;
    total_hops += hops;
    per_chain.push_back(std::move(cj));
  }
  diag["chain"] = std::move(per_chain);
  diag["hops_total"] = total_hops;
  if (s.chains >= 2) {
    std::vector<std::vector<double>> series;
    for (const auto& chain : chains) {
      std::vector<double> proj;
      for (const auto& x : chain.states) proj.push_back((x - mid).dot(dir));
      series.push_back(std::move(proj));
    }
    const auto rhat = rank_normalized_rhat(series);
    if (rhat) diag["rhat"] = Json{{"proj_par", *rhat}};
  }
  write_diagnostics(artifacts, diag);

  write_text(artifacts.path("plot.gp"),
             "set datafile separator ','\n"
             "set key off\n"
             "set xlabel 'iteration'\n"
             "set ylabel '" +
                 std::string(high_dim ? "projection onto mode axis" : "x") +
                 "'\n"
                 "plot 'chains.csv' using 1:3 every ::1 with lines\n");
}

// ---------------------------------------------------------------------------
// power_pilot

void run_power_pilot(const Json& cfg, const RunOverrides& ov,
                     ArtifactSet& artifacts) {
  const CommonSettings s = common_settings(cfg, ov, 1, 1);
  const double gamma = number_or(cfg, "gamma", 2.0);
  const double coeff = number_or(cfg, "c", 1.0);
  const int dim = ov.dim.value_or(int_or(cfg, "dim", 1));
  const PowerPotential target(coeff, gamma, static_cast<Index>(dim));

  const Json pilot = section_or_empty(cfg, "pilot");
  PilotOptions opts;
  opts.eps = require_number(cfg, "pilot.eps");
  opts.period = int_or(pilot, "period", 20000);
  const double amp = number_or(pilot, "amplitude", 2.0);
  std::vector<double> a_grid;
  if (const Json* g = find_member(pilot, "a_grid")) {
    if (!g->is_array() || g->empty()) {
      throw ConfigError("config field `pilot.a_grid` must be a nonempty array");
    }
    for (const auto& v : *g) a_grid.push_back(v.get<double>());
  } else {
    a_grid = {0.4, 0.5, 2.0 / 3.0, 0.8};
  }

  Vec start = Vec::Constant(dim, number_or(pilot, "start", 1.0));
  RngStream rng = RngStream::derive(s.seed, 0);
  const TuningReport report =
      recommend_tuning(target, start, amp, a_grid, rng, opts);

  // Re-simulate the winning pilot to emit the full trace.
  {
    CsvWriter csv(artifacts.path("trace.csv"),
                  {"step", "t", "eta", "x", "v", "xbar", "vbar"});
    RngStream trace_rng = RngStream::derive(s.seed, 0);
    const MassSpec mass = MassSpec::identity(dim);
    Vec x = start;
    Vec v = trace_rng.standard_normal(dim);
    Vec grad = target.gradient(x);
    constexpr double kTwoPi = 6.283185307179586476925;
    for (int n = 1; n <= opts.period; ++n) {
      const double eta_half =
          amp * std::sin(kTwoPi * (n - 0.5) / opts.period);
      const double scale = std::exp(2.0 * eta_half);
      detail::advance(target, x, v, grad, mass, scale,
                      opts.eps * std::pow(scale, report.a_hat), nullptr);
      if (!x.allFinite()) break;
      const double eta = amp * std::sin(kTwoPi * n / opts.period);
      const auto [xbar, vbar] = bar_transform(x, v, eta, report.a_hat);
      csv.row({static_cast<double>(n), n * opts.eps, eta, x[0], v[0], xbar[0],
               vbar[0]});
    }
  }

  Json diag;
  diag["kind"] = "power_pilot";
  diag["seed"] = s.seed;
  diag["gamma"] = gamma;
  diag["a_hat"] = report.a_hat;
  diag["gamma_hat"] = report.gamma_hat;
  diag["period_min"] = report.period_min;
  diag["eps_max"] = report.eps_max;
  diag["rho_min"] = report.rho_min;
  diag["rho_max"] = report.rho_max;
  diag["a_grid"] = a_grid;
  diag["scores"] = report.scores;
  write_diagnostics(artifacts, diag);

  write_text(artifacts.path("plot.gp"),
             "set datafile separator ','\n"
             "set key off\n"
             "set xlabel 't'\n"
             "set ylabel 'vbar'\n"
             "plot 'trace.csv' using 2:7 every ::1 with lines\n");
}

// ---------------------------------------------------------------------------
// sensor / sensor_gibbs

SensorDataset load_dataset(const Json& cfg, ArtifactSet& artifacts) {
  const std::string path = string_or(cfg, "dataset_path", "");
  if (!path.empty()) return SensorDataset::load(path);
  const auto seed =
      static_cast<std::uint64_t>(number_or(cfg, "dataset_seed", 359.0));
  SensorDataset ds = default_sensor_dataset(seed);
  write_text(artifacts.path("dataset.json"), ds.to_json());
  return ds;
}

std::vector<std::string> sensor_headers(bool with_hyper) {
  std::vector<std::string> h = {"iteration", "chain"};
  for (int sensor = 1; sensor <= SensorDataset::kDefaultUnknown; ++sensor) {
    h.push_back("x" + std::to_string(sensor));
    h.push_back("y" + std::to_string(sensor));
  }
  if (with_hyper) {
    h.push_back("R");
    h.push_back("sigma_e");
  }
  return h;
}

// First sweep from which the log posterior stays above (max - 5) for the
// next 20 iterations; -1 when never reached.
int reach_time(const std::vector<double>& log_post, double threshold) {
  const int window = 20;
  const int n = static_cast<int>(log_post.size());
  int run = 0;
  for (int i = 0; i < n; ++i) {
    run = log_post[i] >= threshold ? run + 1 : 0;
    if (run == window) return i - window + 1;
  }
  return -1;
}

void sensor_mode_stats(const SensorDataset& ds,
                       const std::vector<std::vector<Vec>>& loc_series,
                       int burn_in, Json& diag, Json& per_chain) {
  if (!ds.truth()) return;
  const Vec truth = ds.truth_flat();
  const Vec mirrored = mirror_configuration(ds, truth);
  const NearestReferenceClassifier classifier({truth, mirrored});
  for (std::size_t c = 0; c < loc_series.size(); ++c) {
    const auto& states = loc_series[c];
    per_chain[c]["hops"] = count_mode_hops(states, classifier);
    std::vector<Vec> tail(states.begin() + std::min<std::size_t>(
                                                burn_in, states.size()),
                          states.end());
    per_chain[c]["hops_post_burnin"] = count_mode_hops(tail, classifier);
    bool saw0 = false, saw1 = false;
    for (const auto& x : tail) {
      const int label = classifier.classify(x);
      saw0 |= label == 0;
      saw1 |= label == 1;
    }
    per_chain[c]["visited_both_modes"] = saw0 && saw1;
  }
  diag["burn_in"] = burn_in;
}

void run_sensor(const Json& cfg, const RunOverrides& ov,
                ArtifactSet& artifacts) {
  const CommonSettings s = common_settings(cfg, ov, 1000, 12);
  const std::string arm = string_or(cfg, "arm", "tht");
  const SensorDataset ds = load_dataset(cfg, artifacts);
  const Index dim = 2 * SensorDataset::kDefaultUnknown;
  const SensorModel model(ds, ds.range(), ds.noise());

  std::vector<Vec> inits;
  RngStream init_rng = RngStream::derive(s.seed, 1000000);
  for (int c = 0; c < s.chains; ++c) {
    Vec x(dim);
    for (Index i = 0; i < dim; ++i) x[i] = init_rng.uniform01();
    inits.push_back(std::move(x));
  }

  std::vector<ChainOutput> chains;
  if (arm == "tht") {
    const ThtConfig tht_cfg = tht_section(cfg, dim, 2.0, 2000, 30, 20, 2200);
    auto factory = [&](int) {
      return [&](const Vec& x, RngStream& rng) {
        return tht_step(model, x, tht_cfg, rng);
      };
    };
    chains = run_parallel_chains(factory, inits, s.iters, s.seed, s.workers);
  } else if (arm == "hmc") {
    const HmcConfig hmc_cfg = hmc_section(cfg, "hmc", dim, 30, nullptr);
    auto factory = [&](int) {
      return [&](const Vec& x, RngStream& rng) {
        return hmc_step(model, x, hmc_cfg, rng);
      };
    };
    chains = run_parallel_chains(factory, inits, s.iters, s.seed, s.workers);
  } else {
    throw ConfigError("config field `arm` must be \"tht\" or \"hmc\"");
  }

  {
    CsvWriter csv(artifacts.path("chains.csv"), sensor_headers(false));
    for (std::size_t c = 0; c < chains.size(); ++c) {
      for (std::size_t i = 0; i < chains[c].states.size(); ++i) {
        std::vector<double> row = {static_cast<double>(i),
                                   static_cast<double>(c)};
        for (Index k = 0; k < dim; ++k) row.push_back(chains[c].states[i][k]);
        csv.row(row);
      }
    }
  }

  Json diag;
  diag["kind"] = "sensor";
  diag["arm"] = arm;
  diag["seed"] = s.seed;
  diag["iters"] = s.iters;
  diag["chains"] = s.chains;
  Json per_chain = Json::array();
  long long lf_total = 0;
  for (const auto& chain : chains) {
    per_chain.push_back(chain_summary(chain));
    for (const auto& r : chain.step_results) lf_total += r.proposals_used;
  }
  if (arm == "hmc") {
    const HmcConfig hmc_cfg = hmc_section(cfg, "hmc", dim, 30, nullptr);
    lf_total = static_cast<long long>(s.chains) * s.iters * hmc_cfg.n_leapfrog;
  }
  diag["lf_steps_total"] = lf_total;

  // Log-posterior reach times relative to the best value seen anywhere.
  std::vector<std::vector<double>> log_post(chains.size());
  double best_lp = -kInf;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (const auto& x : chains[c].states) {
      log_post[c].push_back(
          sensor_joint_log_posterior(ds, x, ds.range(), ds.noise()));
      best_lp = std::max(best_lp, log_post[c].back());
    }
  }
  for (std::size_t c = 0; c < chains.size(); ++c) {
    per_chain[c]["t_reach"] = reach_time(log_post[c], best_lp - 5.0);
  }

  std::vector<std::vector<Vec>> loc_series;
  for (const auto& chain : chains) loc_series.push_back(chain.states);
  sensor_mode_stats(ds, loc_series, 30, diag, per_chain);
  diag["chain"] = std::move(per_chain);

  if (s.chains >= 2) {
    Json rhat = Json::object();
    double rhat_max = 0.0;
    const auto headers = sensor_headers(false);
    for (Index k = 0; k < dim; ++k) {
      const auto series = coordinate_series(chains, k);
      const auto r = rank_normalized_rhat(series);
      if (r) {
        rhat[headers[static_cast<std::size_t>(2 + k)]] = *r;
        rhat_max = std::max(rhat_max, *r);
      }
    }
    diag["rhat"] = std::move(rhat);
    diag["rhat_max"] = rhat_max;
  }
  write_diagnostics(artifacts, diag);

  write_text(artifacts.path("plot.gp"),
             "set datafile separator ','\n"
             "set key off\n"
             "set xlabel 'x'\n"
             "set ylabel 'y'\n"
             "plot 'chains.csv' using 9:10 every ::1 with dots\n");
}

void run_sensor_gibbs(const Json& cfg, const RunOverrides& ov,
                      ArtifactSet& artifacts) {
  const CommonSettings s = common_settings(cfg, ov, 1000, 12);
  const std::string arm = string_or(cfg, "arm", "tht");
  const SensorDataset ds = load_dataset(cfg, artifacts);
  const Index dim = 2 * SensorDataset::kDefaultUnknown;

  const HmcConfig hyper_cfg = [&] {
    const double default_eps = 0.02;
    return hmc_section(cfg, "hyper", 1, 30, &default_eps);
  }();

  std::optional<ThtConfig> tht_cfg;
  std::optional<HmcConfig> hmc_cfg;
  if (arm == "tht") {
    tht_cfg = tht_section(cfg, dim, 2.0, 2000, 30, 20, 2200);
  } else if (arm == "hmc") {
    hmc_cfg = hmc_section(cfg, "hmc", dim, 30, nullptr);
  } else {
    throw ConfigError("config field `arm` must be \"tht\" or \"hmc\"");
  }

  // A Gibbs chain is a sequence of sweeps; reuse the generic runner by
  // packing (locs, log R, log sigma) into one state vector.
  auto pack = [](const GibbsState& g) {
    Vec v(g.locs.size() + 2);
    v.head(g.locs.size()) = g.locs;
    v[g.locs.size()] = g.log_range;
    v[g.locs.size() + 1] = g.log_noise;
    return v;
  };
  auto unpack = [dim](const Vec& v) {
    GibbsState g;
    g.locs = v.head(dim);
    g.log_range = v[dim];
    g.log_noise = v[dim + 1];
    return g;
  };

  std::vector<Vec> inits;
  RngStream init_rng = RngStream::derive(s.seed, 1000000);
  for (int c = 0; c < s.chains; ++c) {
    GibbsState g;
    g.locs = Vec(dim);
    for (Index i = 0; i < dim; ++i) g.locs[i] = init_rng.uniform01();
    // Hyper initials from the priors, on the log scale.
    g.log_range =
        std::log(-std::log1p(-init_rng.uniform01()) / kRangePriorRate);
    g.log_noise =
        std::log(-std::log1p(-init_rng.uniform01()) / kNoisePriorRate);
    inits.push_back(pack(g));
  }

  auto factory = [&](int) {
    return [&](const Vec& x, RngStream& rng) {
      GibbsState g = unpack(x);
      StepResult res;
      if (tht_cfg) {
        const SensorModel model(ds, std::exp(g.log_range),
                                std::exp(g.log_noise));
        StepResult loc = tht_step(model, g.locs, *tht_cfg, rng);
        g.locs = loc.next_x;
        res = loc;
      } else {
        const SensorModel model(ds, std::exp(g.log_range),
                                std::exp(g.log_noise));
        StepResult loc = hmc_step(model, g.locs, *hmc_cfg, rng);
        g.locs = loc.next_x;
        res = loc;
        res.proposals_used = hmc_cfg->n_leapfrog;
      }
      const HyperPotential range_model(ds, g.locs,
                                       HyperPotential::Kind::kRange);
      Vec theta(1);
      theta[0] = g.log_range;
      g.log_range = hmc_step(range_model, theta, hyper_cfg, rng).next_x[0];
      const HyperPotential noise_model(ds, g.locs,
                                       HyperPotential::Kind::kNoise);
      theta[0] = g.log_noise;
      g.log_noise = hmc_step(noise_model, theta, hyper_cfg, rng).next_x[0];
      res.next_x = pack(g);
      res.proposals_used += 2 * hyper_cfg.n_leapfrog;
      return res;
    };
  };
  const auto chains =
      run_parallel_chains(factory, inits, s.iters, s.seed, s.workers);

  {
    CsvWriter csv(artifacts.path("chains.csv"), sensor_headers(true));
    for (std::size_t c = 0; c < chains.size(); ++c) {
      for (std::size_t i = 0; i < chains[c].states.size(); ++i) {
        const Vec& x = chains[c].states[i];
        std::vector<double> row = {static_cast<double>(i),
                                   static_cast<double>(c)};
        for (Index k = 0; k < dim; ++k) row.push_back(x[k]);
        row.push_back(std::exp(x[dim]));
        row.push_back(std::exp(x[dim + 1]));
        csv.row(row);
      }
    }
  }

  Json diag;
  diag["kind"] = "sensor_gibbs";
  diag["arm"] = arm;
  diag["seed"] = s.seed;
  diag["iters"] = s.iters;
  diag["chains"] = s.chains;
  Json per_chain = Json::array();
  long long lf_total = 0;
  for (const auto& chain : chains) {
    per_chain.push_back(chain_summary(chain));
    for (const auto& r : chain.step_results) lf_total += r.proposals_used;
  }
  diag["lf_steps_total"] = lf_total;

  std::vector<std::vector<double>> log_post(chains.size());
  double best_lp = -kInf;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (const auto& x : chains[c].states) {
      log_post[c].push_back(sensor_joint_log_posterior(
          ds, x.head(dim), std::exp(x[dim]), std::exp(x[dim + 1])));
      best_lp = std::max(best_lp, log_post[c].back());
    }
  }
  for (std::size_t c = 0; c < chains.size(); ++c) {
    per_chain[c]["t_reach"] = reach_time(log_post[c], best_lp - 5.0);
  }

  std::vector<std::vector<Vec>> loc_series(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (const auto& x : chains[c].states) loc_series[c].push_back(x.head(dim));
  }
  sensor_mode_stats(ds, loc_series, 30, diag, per_chain);
  diag["chain"] = std::move(per_chain);

  if (s.chains >= 2) {
    Json rhat = Json::object();
    double rhat_max = 0.0;
    const auto headers = sensor_headers(true);
    for (Index k = 0; k < dim + 2; ++k) {
      auto series = coordinate_series(chains, k);
      const auto r = rank_normalized_rhat(series);
      if (r) {
        rhat[headers[static_cast<std::size_t>(2 + k)]] = *r;
        rhat_max = std::max(rhat_max, *r);
      }
    }
    diag["rhat"] = std::move(rhat);
    diag["rhat_max"] = rhat_max;
  }

  // Posterior means of the hyper scales over all chains past burn-in.
  double mean_range = 0.0, mean_noise = 0.0;
  long long count = 0;
  for (const auto& chain : chains) {
    for (std::size_t i = 30; i < chain.states.size(); ++i) {
      mean_range += std::exp(chain.states[i][dim]);
      mean_noise += std::exp(chain.states[i][dim + 1]);
      ++count;
    }
  }
  if (count > 0) {
    diag["posterior_mean_R"] = mean_range / static_cast<double>(count);
    diag["posterior_mean_sigma_e"] = mean_noise / static_cast<double>(count);
  }
  write_diagnostics(artifacts, diag);

  write_text(artifacts.path("plot.gp"),
             "set datafile separator ','\n"
             "set key off\n"
             "set xlabel 'iteration'\n"
             "set ylabel 'R'\n"
             "plot 'chains.csv' using 1:19 every ::1 with lines\n");
}

// ---------------------------------------------------------------------------
// gap_bridge

void run_gap_bridge(const Json& cfg, const RunOverrides& ov,
                    ArtifactSet& artifacts) {
  const CommonSettings s = common_settings(cfg, ov, 20000, 2);
  const double log_nu = number_or(cfg, "log_nu", -25.0);
  const double bridge_sd = number_or(cfg, "bridge_sd", 5.0);

  const TruncatedMixture base({{0.5, -2.0, 0.3, -3.0, -1.0},
                               {0.5, 2.0, 0.3, 1.0, kInf}});
  const AugmentedTarget target(base, Vec::Zero(1), bridge_sd, log_nu);

  // The bridge region is much softer than the wells, so the cycle must be
  // long enough for several oscillations there (K eps rho >~ 5 at rho ~ 0.2).
  const ThtConfig tht_cfg = tht_section(cfg, 1, 2.5, 2000, 3, 8, 2200);

  std::vector<Vec> inits;
  for (int c = 0; c < s.chains; ++c) {
    inits.push_back(Vec::Constant(1, c % 2 == 0 ? -2.0 : 2.0));
  }
  auto factory = [&](int) {
    return [&](const Vec& x, RngStream& rng) {
      return tht_step(target, x, tht_cfg, rng);
    };
  };
  const auto chains =
      run_parallel_chains(factory, inits, s.iters, s.seed, s.workers);

  const int burn_in = int_or(cfg, "burn_in", 100);
  std::vector<Vec> pooled;
  for (const auto& chain : chains) {
    for (std::size_t i = static_cast<std::size_t>(burn_in);
         i < chain.states.size(); ++i) {
      pooled.push_back(chain.states[i]);
    }
  }
  RngStream filter_rng = RngStream::derive(s.seed, 3000000);
  const auto kept = rejection_filter(pooled, target, filter_rng);

  {
    CsvWriter csv(artifacts.path("chains.csv"), {"iteration", "chain", "x"});
    for (std::size_t c = 0; c < chains.size(); ++c) {
      for (std::size_t i = 0; i < chains[c].states.size(); ++i) {
        csv.row({static_cast<double>(i), static_cast<double>(c),
                 chains[c].states[i][0]});
      }
    }
  }
  {
    CsvWriter csv(artifacts.path("chains_filtered.csv"), {"index", "x"});
    for (std::size_t i = 0; i < kept.size(); ++i) {
      csv.row({static_cast<double>(i), kept[i][0]});
    }
  }

  Json diag;
  diag["kind"] = "gap_bridge";
  diag["seed"] = s.seed;
  diag["iters"] = s.iters;
  diag["chains"] = s.chains;
  diag["burn_in"] = burn_in;
  Json per_chain = Json::array();
  for (const auto& chain : chains) {
    Json cj = chain_summary(chain);
    const ProjectionSignClassifier classifier(Vec::Zero(1), Vec::Ones(1));
    cj["hops"] = count_mode_hops(chain.states, classifier);
    per_chain.push_back(std::move(cj));
  }
  diag["chain"] = std::move(per_chain);
  diag["survival_fraction"] =
      pooled.empty() ? 0.0
                     : static_cast<double>(kept.size()) /
                           static_cast<double>(pooled.size());
  long long left = 0;
  for (const auto& x : kept) left += x[0] < 0.0 ? 1 : 0;
  if (!kept.empty()) {
    diag["left_mass_fraction"] =
        static_cast<double>(left) / static_cast<double>(kept.size());
  }
  write_diagnostics(artifacts, diag);

  write_text(artifacts.path("plot.gp"),
             "set datafile separator ','\n"
             "set key off\n"
             "set xlabel 'iteration'\n"
             "set ylabel 'x'\n"
             "plot 'chains.csv' using 1:3 every ::1 with lines\n");
}

}  // namespace

void run_experiment(const std::string& config_path,
                    const RunOverrides& overrides) {
  Json cfg;
  {
    std::ifstream is(config_path, std::ios::binary);
    if (!is) throw ConfigError("cannot open config file " + config_path);
    try {
      cfg = Json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
  }
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  const std::string kind = [&] {
    const Json* k = find_member(cfg, "kind");
    if (k == nullptr) throw ConfigError("config field `kind` is missing");
    if (!k->is_string()) {
      throw ConfigError("config field `kind` must be a string");
    }
    return k->get<std::string>();
  }();

  std::string out_dir = ".";
  if (const char* env = std::getenv("THT_OUT_DIR"); env != nullptr) {
    out_dir = env;
  }
  out_dir = string_or(cfg, "out_dir", out_dir);
  if (overrides.out_dir) out_dir = *overrides.out_dir;

  ArtifactSet artifacts{fs::path(out_dir)};
  try {
    if (kind == "mixture1d") {
      run_mixture(cfg, overrides, artifacts, false);
    } else if (kind == "mixture_hd") {
      run_mixture(cfg, overrides, artifacts, true);
    } else if (kind == "power_pilot") {
      run_power_pilot(cfg, overrides, artifacts);
    } else if (kind == "sensor") {
      run_sensor(cfg, overrides, artifacts);
    } else if (kind == "sensor_gibbs") {
      run_sensor_gibbs(cfg, overrides, artifacts);
    } else if (kind == "gap_bridge") {
      run_gap_bridge(cfg, overrides, artifacts);
    } else {
      throw ConfigError("config field `kind` has unknown value \"" + kind +
                        "\"");
    }
  } catch (const ConfigError&) {
    artifacts.discard_all();
    throw;
  } catch (const std::exception& e) {
    artifacts.discard_all();
    throw ExperimentFailure(e.what());
  }
}

}  // namespace tht
