#pragma once

/// @file cli.hpp
/// @brief `qcg` command line: generate, solve, bench, sweep, convert.
///
/// Machine-readable JSON goes to `out`; diagnostics go to `err`. Exit codes:
/// 0 success, 1 usage error, 2 runtime failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qcg/bench.hpp"
#include "qcg/congen.hpp"
#include "qcg/hamiltonian.hpp"
#include "qcg/problem.hpp"
#include "qcg/subroutines.hpp"

namespace qcg {

namespace cli_detail {

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open \"" + path + "\"");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

template <typename T>
std::vector<T> split_list(const std::string& s) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if constexpr (std::is_same_v<T, std::string>) {
      out.push_back(item);
    } else {
      std::size_t used = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(item, &used);
      } catch (const std::logic_error&) {
        throw ConfigError("bad list entry \"" + item + "\"");
      }
      if (used != item.size()) throw ConfigError("bad list entry \"" + item + "\"");
      out.push_back(static_cast<T>(v));
    }
  }
  return out;
}

/// Parses a family tag like "8-25-12" into (sets, elements, max size).
inline WecConfig parse_family(const std::string& tag) {
  std::string s = tag;
  if (s.rfind("WEC-", 0) == 0) s = s.substr(4);
  std::vector<std::size_t> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, '-')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stoul(item, &used));
      if (used != item.size()) throw ConfigError("");
    } catch (const std::exception&) {
      throw ConfigError("bad family \"" + tag + "\" (expected e.g. 8-25-12)");
    }
  }
  if (parts.size() != 3) throw ConfigError("bad family \"" + tag + "\" (expected e.g. 8-25-12)");
  WecConfig w;
  w.n_sets = parts[0];
  w.n_elements = parts[1];
  w.max_set_size = parts[2];
  return w;
}

/// Options shared by solve, bench and sweep.
struct SolverFlags {
  std::string solver = "exact";
  std::string t = "max";
  std::size_t q = 1024;
  std::uint64_t seed = 0;
  std::size_t p = 2;
  std::size_t budget = 300;
  std::size_t sweeps = 2000;
  double t_start = 50.0;
  double t_end = 0.1;
  std::size_t max_iters = 100;
  double t_decay = 0.5;
  double kappa = 1.0;
  bool keep_going = false;
  std::optional<double> value_threshold;
  std::optional<double> ratio_threshold;

  void add_to(CLI::App* cmd, bool with_solver) {
    if (with_solver)
      cmd->add_option("--solver", solver, "Ground-state subroutine")
          ->check(CLI::IsMember({"exact", "qaoa", "metropolis"}));
    cmd->add_option("--t", t, "Activation threshold in [0,1] or 'max'")
        ->check([](const std::string& v) {
          try {
            Threshold::parse(v);
            return std::string();
          } catch (const std::exception& e) {
            return std::string(e.what());
          }
        });
    cmd->add_option("--q", q, "Samples per iteration")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--p", p, "QAOA layers")->check(CLI::PositiveNumber);
    cmd->add_option("--budget", budget, "QAOA optimizer evaluations")->check(CLI::PositiveNumber);
    cmd->add_option("--sweeps", sweeps, "Metropolis sweeps")->check(CLI::PositiveNumber);
    cmd->add_option("--t-start", t_start, "Metropolis start temperature")->check(CLI::PositiveNumber);
    cmd->add_option("--t-end", t_end, "Metropolis final temperature")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--t-decay", t_decay, "Threshold decay factor in (0,1)")
        ->check([](const std::string& v) {
          try {
            const double d = std::stod(v);
            return d > 0.0 && d < 1.0 ? std::string() : std::string("t-decay must lie in (0, 1)");
          } catch (const std::exception&) {
            return std::string("t-decay must be a number");
          }
        });
    cmd->add_option("--kappa", kappa, "Big-M precision constant");
    cmd->add_flag("--keep-going", keep_going, "Do not stop at the first feasible sample");
    cmd->add_option("--value-threshold", value_threshold, "Stop once best value <= threshold");
    cmd->add_option("--ratio-threshold", ratio_threshold, "Stop once feasible draw ratio >= threshold");
  }

  SolverConfig solver_config() const {
    SolverConfig s;
    s.kind = parse_solver_kind(solver);
    s.p = p;
    s.budget = budget;
    s.sweeps = sweeps;
    s.schedule = {t_start, t_end};
    return s;
  }

  CongenConfig congen_config() const {
    CongenConfig c;
    c.t = Threshold::parse(t);
    c.q = q;
    c.seed = seed;
    c.max_iters = max_iters;
    c.t_decay = t_decay;
    c.kappa = kappa;
    c.stop_on_first_feasible = !keep_going;
    c.value_threshold = value_threshold;
    c.feasible_ratio_threshold = ratio_threshold;
    c.validate();
    return c;
  }
};

inline nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(detail::number_json(m(r, c) == 0.0 ? 0.0 : m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::ordered_json vector_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(detail::number_json(v(i) == 0.0 ? 0.0 : v(i)));
  return a;
}

}  // namespace cli_detail

/// Ising dump for `convert`.
inline nlohmann::ordered_json ising_json(const IsingModel& model, double M, const PenaltyState& state) {
  nlohmann::ordered_json j;
  j["J"] = cli_detail::matrix_json(model.J);
  j["h"] = cli_detail::vector_json(model.h);
  j["mu"] = model.mu;
  j["constant"] = detail::number_json(model.constant);
  j["M"] = detail::number_json(M);
  j["active_rows"] = state.active_rows();
  return j;
}

/// Solution summary printed by `solve`.
inline nlohmann::ordered_json solution_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["status"] = std::string(to_string(r.status));
  if (r.best) {
    j["x"] = r.best->x.to_ints();
    j["value"] = detail::number_json(r.best->value);
  } else {
    j["x"] = nullptr;
    j["value"] = nullptr;
  }
  j["iterations"] = r.trace.size();
  j["solver_calls"] = r.total_solver_calls;
  j["M"] = detail::number_json(r.big_m);
  j["active_rows"] = r.final_state.active_rows();
  return j;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum-informed constraint generation for binary linear programs", "qcg"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a random weighted exact cover instance");
  WecConfig wec;
  std::string gen_out;
  gen->add_option("--sets", wec.n_sets, "Number of subsets (variables)")->required();
  gen->add_option("--elements", wec.n_elements, "Universe size (constraints)")->required();
  gen->add_option("--max-size", wec.max_set_size, "Largest subset size")->required();
  gen->add_option("--weight-min", wec.weight_min, "Smallest weight");
  gen->add_option("--weight-max", wec.weight_max, "Largest weight");
  gen->add_option("--seed", wec.seed, "Random seed");
  gen->add_option("-o,--out", gen_out, "Output file (stdout if omitted)");

  // solve
  auto* solve = app.add_subcommand("solve", "Run constraint generation on an instance file");
  std::string solve_in;
  std::string trace_path;
  cli_detail::SolverFlags solve_flags;
  solve->add_option("--in", solve_in, "Instance JSON")->required();
  solve->add_option("--trace", trace_path, "Write the iteration trace (JSON lines)");
  solve_flags.add_to(solve, true);

  // bench
  auto* bench = app.add_subcommand("bench", "Compare methods on a seeded instance family");
  std::string family = "8-25-12";
  std::size_t instances = 30;
  std::string methods = "plain_qaoa,congen";
  std::string bench_out;
  std::string summary_out;
  std::size_t jobs = 1;
  bool timing = false;
  cli_detail::SolverFlags bench_flags;
  bench_flags.solver = "qaoa";
  bench->add_option("--family", family, "Family tag sets-elements-maxsize, e.g. 8-25-12");
  bench->add_option("--instances", instances, "Number of instances")->check(CLI::PositiveNumber);
  bench->add_option("--methods", methods, "Comma list: plain_qaoa, congen, exact_oracle, plain:<s>, congen:<s>");
  bench->add_option("-o,--out", bench_out, "CSV output file");
  bench->add_option("--summary", summary_out, "Summary JSON output file");
  bench->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  bench->add_flag("--timing", timing, "Record wall-clock time per run (CSV no longer reproducible)");
  bench_flags.add_to(bench, false);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Approximation ratio versus number of constraints");
  std::size_t sweep_sets = 8;
  std::size_t sweep_max = 12;
  std::string m_values = "5,10,15,20,25";
  std::size_t per_point = 30;
  std::string sweep_methods = "plain_qaoa,congen";
  std::string sweep_out;
  std::size_t sweep_jobs = 1;
  cli_detail::SolverFlags sweep_flags;
  sweep_flags.solver = "qaoa";
  sweep->add_option("--sets", sweep_sets, "Number of subsets (variables)");
  sweep->add_option("--max-size", sweep_max, "Largest subset size (capped at m)");
  sweep->add_option("--m-values", m_values, "Comma list of constraint counts");
  sweep->add_option("--per-point", per_point, "Instances per constraint count")->check(CLI::PositiveNumber);
  sweep->add_option("--methods", sweep_methods, "Comma list of methods");
  sweep->add_option("-o,--out", sweep_out, "CSV output file");
  sweep->add_option("--jobs", sweep_jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep_flags.add_to(sweep, false);

  // convert
  auto* convert = app.add_subcommand("convert", "Dump the Ising model for a set of active rows");
  std::string conv_in;
  std::string rows;
  bool rows_given = false;
  double conv_kappa = 1.0;
  convert->add_option("--in", conv_in, "Instance JSON")->required();
  convert->add_option("--rows", rows, "Comma list of 0-based active rows (default: all)")
      ->each([&](const std::string&) { rows_given = true; });
  convert->add_option("--kappa", conv_kappa, "Big-M precision constant");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (gen->parsed()) {
      const std::string doc = save_instance(generate_wec(wec));
      if (gen_out.empty()) {
        out << doc << '\n';
      } else {
        write_file(gen_out, doc + "\n");
        err << "wrote " << gen_out << '\n';
      }
      return 0;
    }

    if (solve->parsed()) {
      const BlpInstance inst = load_instance(cli_detail::read_file(solve_in));
      const RunResult r = run_congen(inst, solve_flags.solver_config(), solve_flags.congen_config());
      if (!trace_path.empty()) write_file(trace_path, trace_jsonl(r.trace));
      out << solution_json(r).dump() << '\n';
      return 0;
    }

    if (bench->parsed() || sweep->parsed()) {
      const bool is_bench = bench->parsed();
      const auto& flags = is_bench ? bench_flags : sweep_flags;
      const SolverConfig sc = flags.solver_config();
      const CongenConfig cc = flags.congen_config();
      std::vector<MethodSpec> specs;
      for (const auto& tok : cli_detail::split_list<std::string>(is_bench ? methods : sweep_methods))
        specs.push_back(parse_method(tok, sc, cc));

      if (is_bench) {
        SuiteConfig suite;
        suite.family = cli_detail::parse_family(family);
        suite.n_instances = instances;
        suite.methods = specs;
        suite.base_seed = flags.seed;
        suite.output_path = bench_out;
        suite.jobs = jobs;
        suite.measure_time = timing;
        const SuiteResult res = run_suite(suite);
        for (const auto& rec : res.records)
          if (rec.error) err << "instance " << rec.instance_id << " / " << rec.method << ": " << *rec.error << '\n';
        if (!bench_out.empty()) export_csv(res.records, bench_out);
        const auto summary = summary_json(res.summary).dump();
        if (!summary_out.empty()) write_file(summary_out, summary + "\n");
        err << "infeasible runs score 0% in mean_approx\n";
        out << summary << '\n';
        return 0;
      }

      WecConfig base;
      base.n_sets = sweep_sets;
      base.max_set_size = sweep_max;
      const auto table = density_sweep(base, cli_detail::split_list<std::size_t>(m_values), per_point, specs,
                                       flags.seed, sweep_jobs);
      if (!sweep_out.empty()) export_csv(table, sweep_out);
      auto j = nlohmann::ordered_json::array();
      for (const auto& row : table)
        j.push_back({{"m", row.m}, {"method", row.method}, {"mean", row.mean}, {"stddev", row.stddev}, {"n", row.n}});
      out << j.dump() << '\n';
      return 0;
    }

    if (convert->parsed()) {
      const BlpInstance inst = load_instance(cli_detail::read_file(conv_in));
      const PenaltyState state =
          rows_given ? PenaltyState(inst.m(), cli_detail::split_list<std::size_t>(rows)) : PenaltyState::all(inst.m());
      const double M = compute_big_m(inst, conv_kappa);
      out << ising_json(build_ising(inst, state, M), M, state).dump() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace qcg
