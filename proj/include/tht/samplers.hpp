#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <thread>
#include <vector>

#include "tht/hamiltonian.hpp"
#include "tht/leapfrog.hpp"
#include "tht/rng.hpp"

namespace tht {

struct HmcConfig {
  double eps;
  int n_leapfrog;
  MassSpec mass;

  void validate(Index model_dim) const {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (n_leapfrog < 1) {
      throw std::invalid_argument("n_leapfrog must be >= 1");
    }
    if (mass.dim() != model_dim) {
      throw std::invalid_argument("mass dimension does not match the model");
    }
  }
};

struct EnhancedConfig {
  MassSpec mass;
  double alpha;       // mass enhancement ratio (>= 1)
  double eps;         // leapfrog step size, applied as-is
  int max_proposals;  // N
  int n_acceptable;   // L

  void validate(Index model_dim) const {
    if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (n_acceptable < 1 || max_proposals < n_acceptable) {
      throw std::invalid_argument("need 1 <= n_acceptable <= max_proposals");
    }
    if (mass.dim() != model_dim) {
      throw std::invalid_argument("mass dimension does not match the model");
    }
  }
};

struct StepResult {
  Vec next_x;
  bool accepted_move = false;
  double delta_h = kNaN;   // accepted candidate H minus initial H
  int start_index = -1;    // k0 (tempered kernel only)
  int proposals_used = 0;
  int acceptable_found = 0;
};

struct ChainOutput {
  std::vector<Vec> states;  // length iters + 1, including the initial state
  std::vector<StepResult> step_results;
  double wall_time = 0.0;  // seconds
};

/// Per-candidate record of one tempered transition, for diagnostics.
struct ThtCandidate {
  long long index;  // k0 + n, unreduced
  bool in_support;
  double hamiltonian;  // +inf when out of support (not evaluated)
  bool acceptable;
};

struct ThtStepTrace {
  double lambda = 0.0;
  int start_index = 0;
  double h0 = 0.0;
  std::vector<ThtCandidate> candidates;
};

/// Standard HMC with a Metropolis correction; reflection applies when the
/// model is box-bounded.
template <class Rng>
StepResult hmc_step(const PotentialModel& model, const Vec& x,
                    const HmcConfig& cfg, Rng& rng) {
  cfg.validate(model.dim());
  const double lambda = rng.uniform01();
  Vec v = cfg.mass.chol_minv_mul(rng.standard_normal(model.dim()));
  const double h0 = model.potential(x) + cfg.mass.kinetic(v);

  Vec y = x;
  Vec grad = model.gradient(x);
  const Box* box = model.bounds();
  bool finite = true;
  for (int n = 0; n < cfg.n_leapfrog && finite; ++n) {
    detail::advance(model, y, v, grad, cfg.mass, 1.0, cfg.eps, box);
    finite = y.allFinite();
  }

  StepResult res;
  res.next_x = x;
  res.proposals_used = 1;
  if (finite) {
    const double h1 = model.potential(y) + cfg.mass.kinetic(v);
    if (std::isfinite(h1) && std::log(lambda) < h0 - h1) {
      res.next_x = std::move(y);
      res.accepted_move = true;
      res.delta_h = h1 - h0;
      res.acceptable_found = 1;
    }
  }
  return res;
}

/// Sequential-proposal HMC with a constant enhanced mass alpha * M. All
/// candidates along the trajectory are judged with one shared uniform draw
/// against the original-mass Hamiltonian.
template <class Rng>
StepResult mass_enhanced_step(const PotentialModel& model, const Vec& x,
                              const EnhancedConfig& cfg, Rng& rng) {
  cfg.validate(model.dim());
  const double lambda = rng.uniform01();
  Vec v = cfg.mass.chol_minv_mul(rng.standard_normal(model.dim()));
  const double h0 = model.potential(x) + cfg.mass.kinetic(v);
  const double log_lambda = std::log(lambda);

  StepResult res;
  res.next_x = x;

  Vec y = x;
  Vec grad = model.gradient(x);
  const Box* box = model.bounds();
  for (int n = 1; n <= cfg.max_proposals; ++n) {
    detail::advance(model, y, v, grad, cfg.mass, cfg.alpha, cfg.eps, box);
    res.proposals_used = n;
    if (!y.allFinite()) break;  // remaining candidates unacceptable
    const double h = model.potential(y) + cfg.mass.kinetic(v);
    if (std::isfinite(h) && log_lambda < h0 - h) {
      if (++res.acceptable_found == cfg.n_acceptable) {
        res.delta_h = h - h0;
        res.next_x = std::move(y);
        res.accepted_move = true;
        break;
      }
    }
  }
  return res;
}

/// Tempered Hamiltonian transition: draw a start index and a velocity from
/// the extended target, then step the tempered map up to max_proposals times,
/// accepting the n_acceptable-th candidate that passes the shared-uniform
/// test on the extended Hamiltonian. Candidates whose index falls outside
/// supp(psi) are unacceptable by definition and skip the potential
/// evaluation entirely.
template <class Rng>
StepResult tht_step(const PotentialModel& model, const Vec& x,
                    const ThtConfig& cfg, Rng& rng,
                    ThtStepTrace* trace = nullptr) {
  cfg.validate(model.dim());
  const double lambda = rng.uniform01();
  const int k0 = cfg.psi.sample(rng);
  Vec v = sample_initial_velocity(cfg.mass, cfg.schedule.alpha(k0), rng);
  const double h0 = extended_hamiltonian_at(model, x, k0, v, cfg.schedule,
                                            cfg.psi, cfg.mass);
  const double log_lambda = std::log(lambda);

  StepResult res;
  res.next_x = x;
  res.start_index = k0;
  if (trace != nullptr) {
    trace->lambda = lambda;
    trace->start_index = k0;
    trace->h0 = h0;
    trace->candidates.clear();
  }

  Vec y = x;
  Vec grad = model.gradient(x);
  const Box* box = model.bounds();
  for (int n = 1; n <= cfg.max_proposals; ++n) {
    const double k_half = static_cast<double>(k0) + n - 0.5;
    const double scale = cfg.schedule.alpha(k_half);
    const double step = cfg.eps * std::pow(scale, cfg.a);
    detail::advance(model, y, v, grad, cfg.mass, scale, step, box);
    res.proposals_used = n;
    const long long kn = static_cast<long long>(k0) + n;
    if (!y.allFinite()) {  // integrator blow-up ends the sweep
      if (trace != nullptr) trace->candidates.push_back({kn, false, kInf, false});
      break;
    }
    const double h = extended_hamiltonian_at(model, y, static_cast<double>(kn),
                                             v, cfg.schedule, cfg.psi,
                                             cfg.mass);
    const bool acceptable = std::isfinite(h) && log_lambda < h0 - h;
    if (trace != nullptr) {
      trace->candidates.push_back({kn, cfg.psi.in_support(kn), h, acceptable});
    }
    if (acceptable) {
      if (++res.acceptable_found == cfg.n_acceptable) {
        res.delta_h = h - h0;
        res.next_x = std::move(y);
        res.accepted_move = true;
        break;
      }
    }
  }
  return res;
}

/// Iterate a step kernel, collecting states and per-step diagnostics.
template <class Kernel, class Rng>
ChainOutput run_chain(Kernel&& kernel, Vec x0, int iters, Rng& rng) {
  if (!x0.allFinite()) {
    throw std::invalid_argument("initial chain state must be finite");
  }
  const auto t0 = std::chrono::steady_clock::now();
  ChainOutput out;
  out.states.reserve(static_cast<std::size_t>(iters) + 1);
  out.step_results.reserve(static_cast<std::size_t>(iters));
  out.states.push_back(std::move(x0));
  for (int i = 0; i < iters; ++i) {
    StepResult r = kernel(out.states.back(), rng);
    out.states.push_back(r.next_x);
    out.step_results.push_back(std::move(r));
  }
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

/// Run one chain per initial state; chain i draws from the stream derived
/// from (base_seed, i), so results do not depend on worker count or
/// scheduling.
template <class KernelFactory>
std::vector<ChainOutput> run_parallel_chains(KernelFactory&& factory,
                                             const std::vector<Vec>& inits,
                                             int iters, std::uint64_t base_seed,
                                             int n_workers = 1) {
  if (inits.empty()) throw std::invalid_argument("need at least one chain");
  const int n = static_cast<int>(inits.size());
  std::vector<ChainOutput> out(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));

  std::atomic<int> next{0};
  auto work = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        auto kernel = factory(i);
        RngStream rng = RngStream::derive(base_seed, static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] = run_chain(kernel, inits[static_cast<std::size_t>(i)], iters, rng);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };

  const int workers = std::max(1, std::min(n_workers, n));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace tht
