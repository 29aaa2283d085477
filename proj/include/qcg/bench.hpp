#pragma once

/// @file bench.hpp
/// @brief Benchmark harness: plain QAOA vs constraint generation on seeded
/// weighted exact cover families, scored against the enumeration oracle.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "qcg/congen.hpp"
#include "qcg/errors.hpp"
#include "qcg/problem.hpp"
#include "qcg/subroutines.hpp"

namespace qcg {

/// 100 * opt / alg for a feasible run, 0 otherwise. Infeasible runs count as
/// 0% when averaged.
inline double approx_percent(double opt, std::optional<double> alg) {
  if (!(opt > 0.0)) throw NonPositiveOpt("approximation ratio needs opt > 0");
  if (!alg) return 0.0;
  return 100.0 * opt / *alg;
}

struct MethodSpec {
  enum class Kind { Plain, Congen };
  std::string name;
  Kind kind = Kind::Congen;
  SolverConfig solver;
  CongenConfig congen;
};

/// Method tokens: `plain_qaoa`, `congen` (QAOA inside), `exact_oracle`
/// (constraint generation around the exact subroutine), or the explicit
/// `plain:<solver>` / `congen:<solver>` forms.
inline MethodSpec parse_method(const std::string& token, const SolverConfig& solver, const CongenConfig& congen) {
  MethodSpec m;
  m.name = token;
  m.solver = solver;
  m.congen = congen;
  std::string kind = token;
  std::optional<std::string> sub;
  if (token == "plain_qaoa") {
    kind = "plain";
    sub = "qaoa";
  } else if (token == "congen") {
    sub = "qaoa";
  } else if (token == "exact_oracle") {
    kind = "congen";
    sub = "exact";
  } else if (const auto colon = token.find(':'); colon != std::string::npos) {
    kind = token.substr(0, colon);
    sub = token.substr(colon + 1);
  }
  if (kind == "plain") {
    m.kind = MethodSpec::Kind::Plain;
  } else if (kind == "congen") {
    m.kind = MethodSpec::Kind::Congen;
  } else {
    throw ConfigError("unknown method \"" + token + "\"");
  }
  if (!sub) throw ConfigError("unknown method \"" + token + "\"");
  m.solver.kind = parse_solver_kind(*sub);
  return m;
}

struct RunRecord {
  std::size_t instance_id = 0;
  std::string method;
  bool feasible = false;
  std::optional<double> alg_value;
  double opt_value = 0.0;
  double approx_percent = 0.0;
  std::size_t iterations = 0;
  double wall_ms = 0.0;
  /// Set when the method threw; the record then counts as infeasible.
  std::optional<std::string> error;
};

struct MethodOutcome {
  std::optional<BestSolution> best;
  std::size_t iterations = 0;
};

/// One solve of the fully penalized Hamiltonian, best feasible sample of q draws.
inline MethodOutcome run_plain(const BlpInstance& inst, const SolverConfig& solver_cfg, const CongenConfig& cfg) {
  cfg.validate();
  const double M = compute_big_m(inst, cfg.kappa);
  const IsingModel model = build_ising(inst, PenaltyState::all(inst.m()), M);
  auto solver = make_solver(solver_cfg);
  const SolverOutput out = solver->solve(model, derive_seed(cfg.seed, 2));
  const SampleSet samples = sample_state(out, cfg.q, derive_seed(cfg.seed, 3));
  const StopDecision d = check_stop(inst, samples, cfg, std::nullopt, 1);
  return {d.best, 1};
}

inline RunRecord plain_qaoa_baseline(const BlpInstance& inst, const SolverConfig& solver_cfg, std::size_t q,
                                     std::uint64_t seed) {
  const OptResult opt = brute_force_opt(inst);
  if (!opt.optimal()) throw ConfigError("instance is infeasible; no reference optimum");
  CongenConfig cfg;
  cfg.q = q;
  cfg.seed = seed;
  cfg.t = Threshold::at(0.0);
  const MethodOutcome o = run_plain(inst, solver_cfg, cfg);
  RunRecord r;
  r.method = "plain_" + std::string(to_string(solver_cfg.kind));
  r.opt_value = *opt.value;
  r.feasible = o.best.has_value();
  if (o.best) r.alg_value = o.best->value;
  r.approx_percent = approx_percent(r.opt_value, r.alg_value);
  r.iterations = o.iterations;
  return r;
}

inline MethodOutcome run_method(const BlpInstance& inst, const MethodSpec& method, std::uint64_t seed) {
  CongenConfig cfg = method.congen;
  cfg.seed = seed;
  if (method.kind == MethodSpec::Kind::Plain) return run_plain(inst, method.solver, cfg);
  const RunResult res = run_congen(inst, method.solver, cfg);
  return {res.best, res.trace.size()};
}

struct SuiteConfig {
  WecConfig family;
  std::size_t n_instances = 1;
  std::vector<MethodSpec> methods;
  std::uint64_t base_seed = 0;
  std::string output_path;
  std::size_t jobs = 1;
  /// Wall-clock timing makes the CSV nondeterministic, so it is opt-in;
  /// wall_ms is written as 0 otherwise.
  bool measure_time = false;

  void validate() const {
    if (n_instances < 1) throw ConfigError("n_instances must be >= 1");
    if (methods.empty()) throw ConfigError("at least one method is required");
    family.validate();
  }
};

struct MethodSummary {
  double mean_approx = 0.0;
  /// Percentage of instances with a feasible result.
  double feasibility_rate = 0.0;
  std::size_t n = 0;
};

struct SuiteResult {
  std::vector<RunRecord> records;
  /// Keyed by method name.
  std::map<std::string, MethodSummary> summary;
};

inline std::map<std::string, MethodSummary> summarize(const std::vector<RunRecord>& records) {
  std::map<std::string, MethodSummary> out;
  for (const auto& r : records) {
    auto& s = out[r.method];
    s.mean_approx += r.approx_percent;
    s.feasibility_rate += r.feasible ? 1.0 : 0.0;
    ++s.n;
  }
  for (auto& [name, s] : out) {
    s.mean_approx /= static_cast<double>(s.n);
    s.feasibility_rate = 100.0 * s.feasibility_rate / static_cast<double>(s.n);
  }
  return out;
}

namespace detail {

inline void sort_records(std::vector<RunRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    if (a.instance_id != b.instance_id) return a.instance_id < b.instance_id;
    return a.method < b.method;
  });
}

inline std::vector<RunRecord> evaluate_instance(const SuiteConfig& cfg, std::size_t index) {
  const std::uint64_t instance_seed = cfg.base_seed + index;
  std::vector<RunRecord> out;
  WecConfig wc = cfg.family;
  wc.seed = instance_seed;

  std::optional<BlpInstance> inst;
  std::optional<double> opt;
  std::optional<std::string> setup_error;
  try {
    inst = generate_wec(wc);
    const OptResult ref = brute_force_opt(*inst);
    if (!ref.optimal()) throw ConfigError("generated instance has no feasible solution");
    opt = *ref.value;
    if (!(*opt > 0.0)) throw NonPositiveOpt("reference optimum is not positive");
  } catch (const std::exception& e) {
    setup_error = e.what();
  }

  for (const auto& method : cfg.methods) {
    RunRecord r;
    r.instance_id = index;
    r.method = method.name;
    r.opt_value = opt.value_or(std::nan(""));
    if (setup_error) {
      r.error = setup_error;
      out.push_back(std::move(r));
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const MethodOutcome o = run_method(*inst, method, derive_seed(instance_seed, 0x5EED));
      r.feasible = o.best.has_value();
      if (o.best) r.alg_value = o.best->value;
      r.approx_percent = approx_percent(*opt, r.alg_value);
      r.iterations = o.iterations;
    } catch (const std::exception& e) {
      r.feasible = false;
      r.alg_value.reset();
      r.approx_percent = 0.0;
      r.error = e.what();
    }
    if (cfg.measure_time)
      r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

/// Runs every method on n_instances seeded instances (seed = base_seed + index).
/// Instances may run on `jobs` worker threads; output order is fixed.
inline SuiteResult run_suite(const SuiteConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<RunRecord>> per_instance(cfg.n_instances);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.n_instances; i = next++) per_instance[i] = detail::evaluate_instance(cfg, i);
  };
  const std::size_t jobs = std::clamp<std::size_t>(cfg.jobs, 1, cfg.n_instances);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SuiteResult result;
  for (auto& recs : per_instance)
    for (auto& r : recs) result.records.push_back(std::move(r));
  detail::sort_records(result.records);
  result.summary = summarize(result.records);
  return result;
}

struct SweepRow {
  std::size_t m = 0;
  std::string method;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

/// Mean and population standard deviation of approx_percent per method for
/// each constraint count in m_values, n_sets fixed by `base`.
inline std::vector<SweepRow> density_sweep(const WecConfig& base, const std::vector<std::size_t>& m_values,
                                           std::size_t per_point, const std::vector<MethodSpec>& methods,
                                           std::uint64_t seed, std::size_t jobs = 1) {
  if (per_point < 1) throw ConfigError("per_point must be >= 1");
  std::vector<SweepRow> rows;
  for (std::size_t m : m_values) {
    SuiteConfig sc;
    sc.family = base;
    sc.family.n_elements = m;
    sc.family.max_set_size = std::min(base.max_set_size, m);
    sc.n_instances = per_point;
    sc.methods = methods;
    sc.base_seed = derive_seed(seed, m);
    sc.jobs = jobs;
    const SuiteResult res = run_suite(sc);

    for (const auto& method : methods) {
      std::vector<double> vals;
      for (const auto& r : res.records)
        if (r.method == method.name) vals.push_back(r.approx_percent);
      SweepRow row;
      row.m = m;
      row.method = method.name;
      row.n = vals.size();
      for (double v : vals) row.mean += v;
      row.mean /= static_cast<double>(vals.size());
      double var = 0.0;
      for (double v : vals) var += (v - row.mean) * (v - row.mean);
      row.stddev = std::sqrt(var / static_cast<double>(vals.size()));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV / JSON output

namespace detail {

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

inline constexpr const char* kRecordCsvHeader =
    "instance_id,method,feasible,alg_value,opt_value,approx_percent,iterations,wall_ms";

/// RFC 4180 (CRLF line endings). alg_value is empty for infeasible runs.
inline std::string records_csv(std::vector<RunRecord> records) {
  detail::sort_records(records);
  std::string out = std::string(kRecordCsvHeader) + "\r\n";
  for (const auto& r : records) {
    out += std::to_string(r.instance_id) + ',' + detail::csv_field(r.method) + ',' + (r.feasible ? "1" : "0") + ',' +
           (r.alg_value ? detail::fmt6(*r.alg_value) : std::string()) + ',' + detail::fmt6(r.opt_value) + ',' +
           detail::fmt6(r.approx_percent) + ',' + std::to_string(r.iterations) + ',' + detail::fmt6(r.wall_ms) + "\r\n";
  }
  return out;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "m,method,mean_approx,stddev,n\r\n";
  for (const auto& r : rows)
    out += std::to_string(r.m) + ',' + detail::csv_field(r.method) + ',' + detail::fmt6(r.mean) + ',' +
           detail::fmt6(r.stddev) + ',' + std::to_string(r.n) + "\r\n";
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open \"" + path + "\" for writing");
  f << content;
  if (!f) throw IoError("write to \"" + path + "\" failed");
}

inline void export_csv(const std::vector<RunRecord>& records, const std::string& path) {
  write_file(path, records_csv(records));
}

inline void export_csv(const std::vector<SweepRow>& rows, const std::string& path) { write_file(path, sweep_csv(rows)); }

inline nlohmann::ordered_json summary_json(const std::map<std::string, MethodSummary>& summary) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, s] : summary)
    j[name] = {{"mean_approx", s.mean_approx}, {"feasibility_rate", s.feasibility_rate}, {"n", s.n}};
  return j;
}

}  // namespace qcg
