#pragma once

/// @file congen.hpp
/// @brief Quantum-informed constraint generation for binary linear programs.
///
/// Starting from the fully relaxed problem (no penalized rows), each
/// iteration solves the current Ising model with a ground-state subroutine,
/// draws q samples, checks them for feasibility, scores how often each
/// constraint is violated and activates the relaxed constraints whose score
/// reaches the threshold t. Rows are only ever added.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qcg/errors.hpp"
#include "qcg/hamiltonian.hpp"
#include "qcg/problem.hpp"
#include "qcg/rng.hpp"
#include "qcg/subroutines.hpp"

namespace qcg {

/// Activation threshold: a value in [0, 1] or the symbolic `max`
/// (the largest violation score of the current iteration).
class Threshold {
 public:
  static Threshold max() { return Threshold(true, 0.0); }
  static Threshold at(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("threshold t must lie in [0, 1]");
    return Threshold(false, t);
  }
  /// Parses "max" or a number.
  static Threshold parse(std::string_view s) {
    if (s == "max") return max();
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(s), &used);
      if (used != s.size()) throw ConfigError("bad threshold \"" + std::string(s) + "\"");
      return at(v);
    } catch (const std::logic_error&) {
      throw ConfigError("bad threshold \"" + std::string(s) + "\"");
    }
  }

  bool is_max() const { return max_; }
  double value() const { return value_; }
  /// Concrete threshold for a given score vector.
  double resolve(const std::vector<double>& nu) const {
    if (!max_) return value_;
    double top = 0.0;
    for (double v : nu) top = std::max(top, v);
    return top;
  }

 private:
  Threshold(bool is_max, double v) : max_(is_max), value_(v) {}
  bool max_;
  double value_;
};

struct CongenConfig {
  Threshold t = Threshold::max();
  std::size_t q = 1024;
  std::size_t max_iters = 100;
  /// Multiplier applied to t when nothing is selectable and nothing feasible was found.
  double t_decay = 0.5;
  bool stop_on_first_feasible = true;
  std::optional<double> value_threshold;
  std::optional<double> feasible_ratio_threshold;
  double kappa = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (q < 1) throw ConfigError("q must be >= 1");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (!(t_decay > 0.0 && t_decay < 1.0)) throw ConfigError("t_decay must lie in (0, 1)");
    if (feasible_ratio_threshold && !(*feasible_ratio_threshold >= 0.0 && *feasible_ratio_threshold <= 1.0))
      throw ConfigError("feasible_ratio_threshold must lie in [0, 1]");
    if (!(kappa > 0.0)) throw InvalidKappa("kappa must be positive");
  }
};

struct BestSolution {
  Assignment x;
  double value = 0.0;
  /// 1-based iteration in which the solution was first sampled.
  std::size_t iteration = 0;
};

struct IterationRecord {
  std::size_t iter = 0;
  std::vector<std::size_t> active_rows_before;
  std::vector<std::size_t> active_rows_after;
  std::vector<double> nu;
  std::vector<int> tau;
  std::size_t coupling_count = 0;
  std::optional<double> best_feasible_value_so_far;
  double solver_mean_energy = 0.0;
  double feasible_sample_ratio = 0.0;
  /// Threshold that produced tau (after any decay); absent on terminal iterations.
  std::optional<double> t_effective;
};

struct RunResult {
  enum class Status { Feasible, NoConstraintToAdd, MaxIters, Failed };
  Status status = Status::Failed;
  std::optional<BestSolution> best;
  std::vector<IterationRecord> trace;
  std::size_t total_solver_calls = 0;
  double big_m = 0.0;
  PenaltyState final_state;
};

inline std::string_view to_string(RunResult::Status s) {
  switch (s) {
    case RunResult::Status::Feasible: return "Feasible";
    case RunResult::Status::NoConstraintToAdd: return "NoConstraintToAdd";
    case RunResult::Status::MaxIters: return "MaxIters";
    case RunResult::Status::Failed: return "Failed";
  }
  return "?";
}

/// nu_j = (1/q) * sum over distinct samples violating row j of their counts.
inline std::vector<double> violation_scores(const BlpInstance& inst, const SampleSet& samples) {
  if (samples.n != inst.n())
    throw DimensionMismatch("samples have width " + std::to_string(samples.n) + ", instance has n = " +
                            std::to_string(inst.n()));
  std::vector<double> counts(inst.m(), 0.0);
  for (std::size_t l = 0; l < samples.s(); ++l) {
    const Eigen::VectorXd r = residual(inst, samples.X[l]);
    for (std::size_t j = 0; j < inst.m(); ++j)
      if (violates(inst, r(static_cast<Eigen::Index>(j)))) counts[j] += static_cast<double>(samples.omega[l]);
  }
  for (double& v : counts) v /= static_cast<double>(samples.q);
  return counts;
}

/// tau_j = 1 iff nu_j >= t and j is in `remainder`.
inline std::vector<int> select_constraints(const std::vector<double>& nu, double t,
                                           const std::vector<std::size_t>& remainder) {
  std::vector<int> tau(nu.size(), 0);
  for (std::size_t j : remainder) {
    if (j >= nu.size()) throw DimensionMismatch("remainder row out of range");
    if (nu[j] >= t) tau[j] = 1;
  }
  return tau;
}

/// Symbolic-aware overload. With `max` and an all-zero score vector nothing is selected.
inline std::vector<int> select_constraints(const std::vector<double>& nu, const Threshold& t,
                                           const std::vector<std::size_t>& remainder) {
  if (t.is_max() && t.resolve(nu) == 0.0) return std::vector<int>(nu.size(), 0);
  return select_constraints(nu, t.resolve(nu), remainder);
}

inline PenaltyState apply_update(const PenaltyState& state, const std::vector<int>& tau) {
  if (tau.size() != state.m()) throw DimensionMismatch("tau length differs from m");
  std::vector<std::size_t> rows = state.active_rows();
  for (std::size_t j = 0; j < tau.size(); ++j) {
    if (!tau[j]) continue;
    if (state.is_active(j)) throw AlreadyActive("row " + std::to_string(j) + " is already active");
    rows.push_back(j);
  }
  return {state.m(), std::move(rows)};
}

enum class StopReason { None, AllFeasible, FirstFeasible, ValueThreshold, FeasibleRatio };

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::None;
  std::optional<BestSolution> best;
  double feasible_ratio = 0.0;
  /// Best objective among this iteration's feasible samples.
  std::optional<double> z;
};

/// Feasibility pass over a sample set. Stopping requires at least one
/// feasible sample; then any of: every draw feasible, stop_on_first_feasible,
/// best value <= value_threshold, feasible ratio >= feasible_ratio_threshold.
inline StopDecision check_stop(const BlpInstance& inst, const SampleSet& samples, const CongenConfig& cfg,
                               std::optional<BestSolution> best_so_far, std::size_t iteration = 0) {
  StopDecision d;
  d.best = std::move(best_so_far);
  std::size_t feasible_draws = 0;
  for (std::size_t l = 0; l < samples.s(); ++l) {
    if (!is_feasible(inst, samples.X[l])) continue;
    feasible_draws += samples.omega[l];
    const double v = objective(inst, samples.X[l]);
    if (!d.z || v < *d.z) d.z = v;
    if (!d.best || v < d.best->value) d.best = BestSolution{samples.X[l], v, iteration};
  }
  d.feasible_ratio = samples.q ? static_cast<double>(feasible_draws) / static_cast<double>(samples.q) : 0.0;
  if (feasible_draws == 0) return d;

  if (feasible_draws == samples.q) {
    d.reason = StopReason::AllFeasible;
  } else if (cfg.stop_on_first_feasible) {
    d.reason = StopReason::FirstFeasible;
  } else if (cfg.value_threshold && d.best && d.best->value <= *cfg.value_threshold) {
    d.reason = StopReason::ValueThreshold;
  } else if (cfg.feasible_ratio_threshold && d.feasible_ratio >= *cfg.feasible_ratio_threshold) {
    d.reason = StopReason::FeasibleRatio;
  }
  d.stop = d.reason != StopReason::None;
  return d;
}

/// Runs constraint generation with the given subroutine.
///
/// Solver and sampler seeds for iteration k are derived from cfg.seed, so a
/// run is a pure function of (instance, subroutine configuration, cfg).
inline RunResult run_congen(const BlpInstance& inst, GroundStateSolver& solver, const CongenConfig& cfg) {
  cfg.validate();
  RunResult result;
  result.big_m = compute_big_m(inst, cfg.kappa);
  PenaltyState state(inst.m());
  std::optional<BestSolution> best;

  auto finish = [&](RunResult::Status status) {
    result.status = status;
    result.best = best;
    result.final_state = state;
    return result;
  };

  for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
    const IsingModel model = build_ising(inst, state, result.big_m);
    const SolverOutput out = solver.solve(model, derive_seed(cfg.seed, 2 * iter));
    ++result.total_solver_calls;
    const SampleSet samples = sample_state(out, cfg.q, derive_seed(cfg.seed, 2 * iter + 1));

    const StopDecision decision = check_stop(inst, samples, cfg, best, iter);
    best = decision.best;

    IterationRecord rec;
    rec.iter = iter;
    rec.active_rows_before = state.active_rows();
    rec.nu = violation_scores(inst, samples);
    rec.tau.assign(inst.m(), 0);
    rec.coupling_count = coupling_count(model);
    if (best) rec.best_feasible_value_so_far = best->value;
    rec.solver_mean_energy = out.mean_energy;
    rec.feasible_sample_ratio = decision.feasible_ratio;

    auto close = [&](RunResult::Status status) {
      rec.active_rows_after = state.active_rows();
      result.trace.push_back(std::move(rec));
      return finish(status);
    };

    if (decision.stop) return close(RunResult::Status::Feasible);
    const std::vector<std::size_t> remainder = state.remainder();
    if (remainder.empty()) return close(RunResult::Status::NoConstraintToAdd);

    double t = cfg.t.resolve(rec.nu);
    std::vector<int> tau = select_constraints(rec.nu, cfg.t, remainder);
    bool any = std::find(tau.begin(), tau.end(), 1) != tau.end();
    if (!any && best) {
      // Samples only violate rows that are already penalized.
      return close(RunResult::Status::NoConstraintToAdd);
    }
    // Nothing selectable and nothing feasible yet: lower t until something
    // is picked. Scores are multiples of 1/q, so below 1/(2q) t drops to 0.
    while (!any) {
      if (t == 0.0) return close(RunResult::Status::Failed);
      t *= cfg.t_decay;
      if (t < 0.5 / static_cast<double>(cfg.q)) t = 0.0;
      tau = select_constraints(rec.nu, t, remainder);
      any = std::find(tau.begin(), tau.end(), 1) != tau.end();
    }

    rec.tau = tau;
    rec.t_effective = t;
    state = apply_update(state, tau);
    rec.active_rows_after = state.active_rows();
    result.trace.push_back(std::move(rec));
  }
  return finish(RunResult::Status::MaxIters);
}

inline RunResult run_congen(const BlpInstance& inst, const SolverConfig& solver_cfg, const CongenConfig& cfg) {
  auto solver = make_solver(solver_cfg);
  return run_congen(inst, *solver, cfg);
}

// ---------------------------------------------------------------------------
// Trace export: one JSON object per line.

inline nlohmann::ordered_json to_json(const IterationRecord& r) {
  nlohmann::ordered_json j;
  j["iter"] = r.iter;
  j["active_rows_before"] = r.active_rows_before;
  j["active_rows_after"] = r.active_rows_after;
  j["nu"] = r.nu;
  j["tau"] = r.tau;
  j["coupling_count"] = r.coupling_count;
  j["best_feasible_value_so_far"] =
      r.best_feasible_value_so_far ? nlohmann::ordered_json(*r.best_feasible_value_so_far) : nlohmann::ordered_json();
  j["solver_mean_energy"] = r.solver_mean_energy;
  j["feasible_sample_ratio"] = r.feasible_sample_ratio;
  j["t_effective"] = r.t_effective ? nlohmann::ordered_json(*r.t_effective) : nlohmann::ordered_json();
  return j;
}

inline std::string trace_jsonl(const std::vector<IterationRecord>& trace) {
  std::string out;
  for (const auto& r : trace) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace qcg
