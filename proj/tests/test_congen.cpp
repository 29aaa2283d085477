#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qcg/congen.hpp"

namespace qcg {
namespace {

CongenConfig exact_cfg(Threshold t = Threshold::max()) {
  CongenConfig cfg;
  cfg.t = t;
  cfg.q = 64;
  return cfg;
}

TEST(Threshold, Parse) {
  EXPECT_TRUE(Threshold::parse("max").is_max());
  EXPECT_EQ(Threshold::parse("0.25").value(), 0.25);
  EXPECT_THROW(Threshold::parse("1.5"), ConfigError);
  EXPECT_THROW(Threshold::parse("-0.1"), ConfigError);
  EXPECT_THROW(Threshold::parse("abc"), ConfigError);
  EXPECT_THROW(Threshold::parse("0.5x"), ConfigError);
  EXPECT_EQ(Threshold::max().resolve({0.1, 0.7, 0.3}), 0.7);
}

TEST(Config, Validation) {
  CongenConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.q = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.t_decay = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ViolationScores, Toy) {
  const auto t1 = oracle::toy_t1();
  const auto s = make_sample_set(3, {{Assignment({0, 0, 0}), 3}, {Assignment({1, 0, 0}), 1}});
  EXPECT_EQ(violation_scores(t1, s), (std::vector<double>{0.75, 1.0}));
  const auto fine = make_sample_set(3, {{Assignment({0, 0, 1}), 10}});
  EXPECT_EQ(violation_scores(t1, fine), (std::vector<double>{0.0, 0.0}));
}

TEST(ViolationScores, NoRows) {
  const BlpInstance inst("free", Eigen::Vector2d(1, 2), Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
  EXPECT_TRUE(violation_scores(inst, make_sample_set(2, {{Assignment({1, 0}), 2}})).empty());
}

TEST(Select, Examples) {
  EXPECT_EQ(select_constraints({0.75, 1.0}, Threshold::max(), {0, 1}), (std::vector<int>{0, 1}));
  EXPECT_EQ(select_constraints({0.75, 1.0}, 0.5, {0, 1}), (std::vector<int>{1, 1}));
  EXPECT_EQ(select_constraints({0.75, 1.0}, 0.5, {0}), (std::vector<int>{1, 0}));
  EXPECT_EQ(select_constraints({0.0, 0.0}, Threshold::max(), {0, 1}), (std::vector<int>{0, 0}));
  EXPECT_EQ(select_constraints({0.0, 0.0}, 0.0, {0, 1}), (std::vector<int>{1, 1}));
}

TEST(Select, OnlyRemainderProperty) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = uniform_int(rng, 1, 8);
    std::vector<double> nu(m);
    for (double& v : nu) v = static_cast<double>(uniform_int(rng, 0, 8)) / 8.0;
    std::vector<std::size_t> rem;
    for (std::size_t j = 0; j < m; ++j)
      if (rng() & 1U) rem.push_back(j);
    const double t = static_cast<double>(uniform_int(rng, 0, 8)) / 8.0;
    const auto tau = select_constraints(nu, t, rem);
    for (std::size_t j = 0; j < m; ++j) {
      const bool in_rem = std::find(rem.begin(), rem.end(), j) != rem.end();
      EXPECT_EQ(tau[j] == 1, in_rem && nu[j] >= t);
    }
  }
}

TEST(ApplyUpdate, AddsRows) {
  const PenaltyState s(3, {1});
  EXPECT_EQ(apply_update(s, {1, 0, 0}).active_rows(), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(apply_update(s, {0, 0, 0}), s);
  EXPECT_THROW(apply_update(s, {0, 1, 0}), AlreadyActive);
  EXPECT_THROW(apply_update(s, {1, 0}), DimensionMismatch);
}

TEST(CheckStop, Examples) {
  const auto t1 = oracle::toy_t1();
  CongenConfig cfg;
  const auto all_feasible = make_sample_set(3, {{Assignment({0, 0, 1}), 4}});
  auto d = check_stop(t1, all_feasible, cfg, std::nullopt, 1);
  EXPECT_TRUE(d.stop);
  EXPECT_EQ(d.reason, StopReason::AllFeasible);
  EXPECT_EQ(d.best->value, 5.0);

  const auto mixed = make_sample_set(3, {{Assignment({0, 0, 1}), 1}, {Assignment({1, 1, 0}), 1}, {Assignment({0, 0, 0}), 2}});
  d = check_stop(t1, mixed, cfg, std::nullopt, 1);
  EXPECT_TRUE(d.stop);
  EXPECT_EQ(d.reason, StopReason::FirstFeasible);
  EXPECT_EQ(d.best->value, 5.0);
  EXPECT_EQ(d.feasible_ratio, 0.5);

  cfg.stop_on_first_feasible = false;
  EXPECT_FALSE(check_stop(t1, mixed, cfg, std::nullopt).stop);
  cfg.value_threshold = 5.0;
  EXPECT_EQ(check_stop(t1, mixed, cfg, std::nullopt).reason, StopReason::ValueThreshold);
  cfg.value_threshold = 4.0;
  cfg.feasible_ratio_threshold = 0.5;
  EXPECT_EQ(check_stop(t1, mixed, cfg, std::nullopt).reason, StopReason::FeasibleRatio);

  const auto none = make_sample_set(3, {{Assignment({0, 0, 0}), 4}});
  d = check_stop(t1, none, cfg, BestSolution{Assignment({1, 1, 0}), 7.0, 1});
  EXPECT_FALSE(d.stop);
  EXPECT_EQ(d.best->value, 7.0);
}

TEST(Run, ToyExactTrace) {
  const RunResult r = run_congen(oracle::toy_t1(), SolverConfig{}, exact_cfg(Threshold::at(0.5)));
  EXPECT_EQ(r.status, RunResult::Status::Feasible);
  ASSERT_TRUE(r.best);
  EXPECT_EQ(r.best->x, Assignment({0, 0, 1}));
  EXPECT_EQ(r.best->value, 5.0);
  EXPECT_EQ(r.total_solver_calls, 2U);
  EXPECT_EQ(r.big_m, 12.0);
  ASSERT_EQ(r.trace.size(), 2U);
  EXPECT_EQ(r.trace[0].nu, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(r.trace[0].tau, (std::vector<int>{1, 1}));
  EXPECT_EQ(r.trace[0].coupling_count, 0U);
  EXPECT_EQ(r.trace[0].active_rows_after, (std::vector<std::size_t>{0, 1}));
  EXPECT_FALSE(r.trace[0].best_feasible_value_so_far);
  EXPECT_EQ(r.trace[1].coupling_count, 2U);
  EXPECT_EQ(r.trace[1].best_feasible_value_so_far, 5.0);
  EXPECT_EQ(r.trace[1].feasible_sample_ratio, 1.0);
}

TEST(Run, ToyExactWithMaxThreshold) {
  const RunResult r = run_congen(oracle::toy_t1(), SolverConfig{}, exact_cfg());
  EXPECT_EQ(r.status, RunResult::Status::Feasible);
  EXPECT_EQ(r.best->value, 5.0);
  EXPECT_EQ(r.total_solver_calls, 2U);
}

TEST(Run, NoConstraints) {
  const BlpInstance inst("free", Eigen::Vector3d(2, -1, 3), Eigen::MatrixXd(0, 3), Eigen::VectorXd(0));
  const RunResult r = run_congen(inst, SolverConfig{}, exact_cfg());
  EXPECT_EQ(r.status, RunResult::Status::Feasible);
  EXPECT_EQ(r.best->x, Assignment({0, 1, 0}));
  EXPECT_EQ(r.best->value, -1.0);
  EXPECT_EQ(r.total_solver_calls, 1U);
}

TEST(Run, InfeasibleInstanceExhaustsRows) {
  Eigen::MatrixXd A(2, 2);
  A << 1, 1, 1, 1;
  const BlpInstance inst("clash", Eigen::Vector2d(1, 1), A, Eigen::Vector2d(1, 2));
  const RunResult r = run_congen(inst, SolverConfig{}, exact_cfg());
  EXPECT_EQ(r.status, RunResult::Status::NoConstraintToAdd);
  EXPECT_FALSE(r.best);
  EXPECT_EQ(r.total_solver_calls, 2U);
  EXPECT_EQ(r.final_state, PenaltyState::all(2));
}

TEST(Run, SingleInfeasibleRow) {
  const BlpInstance inst("one", Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, 2.0));
  const RunResult r = run_congen(inst, SolverConfig{}, exact_cfg(Threshold::at(0.5)));
  EXPECT_EQ(r.status, RunResult::Status::NoConstraintToAdd);
  EXPECT_FALSE(r.best);
  EXPECT_EQ(r.total_solver_calls, 2U);
}

TEST(Run, MaxIters) {
  CongenConfig cfg = exact_cfg(Threshold::at(1.0));
  cfg.max_iters = 1;
  const RunResult r = run_congen(oracle::toy_t1(), SolverConfig{}, cfg);
  EXPECT_EQ(r.status, RunResult::Status::MaxIters);
  EXPECT_EQ(r.total_solver_calls, 1U);
}

TEST(Run, ThresholdDecaysWhenNothingSelected) {
  // Metropolis near t = 0 returns mostly x = 0 in round one; a threshold of 1
  // can only be met by rows violated in every draw, so t decays when needed.
  CongenConfig cfg = exact_cfg(Threshold::at(1.0));
  const BlpInstance inst = generate_wec({.n_sets = 6, .n_elements = 6, .max_set_size = 3, .seed = 1});
  SolverConfig sc;
  sc.kind = SolverKind::Metropolis;
  sc.sweeps = 20;
  sc.schedule = {5.0, 5.0};
  const RunResult r = run_congen(inst, sc, cfg);
  for (const auto& rec : r.trace) {
    if (!rec.t_effective) continue;
    EXPECT_LE(*rec.t_effective, 1.0);
    bool any = false;
    for (std::size_t j = 0; j < rec.tau.size(); ++j) {
      if (!rec.tau[j]) continue;
      any = true;
      EXPECT_GE(rec.nu[j], *rec.t_effective);
    }
    EXPECT_TRUE(any);
  }
  EXPECT_NE(r.status, RunResult::Status::Failed);
}

TEST(Run, ActiveSetGrowsAndFeasibleSetShrinks) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_wec({.n_sets = 7, .n_elements = 9, .max_set_size = 4, .seed = seed});
    const RunResult r = run_congen(inst, SolverConfig{}, exact_cfg());
    std::size_t prev_size = std::size_t{1} << inst.n();
    for (const auto& rec : r.trace) {
      EXPECT_TRUE(std::includes(rec.active_rows_after.begin(), rec.active_rows_after.end(),
                                rec.active_rows_before.begin(), rec.active_rows_before.end()));
      const auto size = oracle::feasible_set(inst, rec.active_rows_after).size();
      EXPECT_LE(size, prev_size);
      EXPECT_GE(size, oracle::feasible_set(inst, [&] {
                        std::vector<std::size_t> all(inst.m());
                        for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
                        return all;
                      }()).size());
      prev_size = size;
    }
    EXPECT_EQ(r.status, RunResult::Status::Feasible);
  }
}

TEST(Run, DeterministicForFixedSeed) {
  const auto inst = generate_wec({.n_sets = 6, .n_elements = 8, .max_set_size = 4, .seed = 3});
  SolverConfig sc;
  sc.kind = SolverKind::Qaoa;
  sc.budget = 40;
  CongenConfig cfg;
  cfg.seed = 99;
  const RunResult a = run_congen(inst, sc, cfg);
  const RunResult b = run_congen(inst, sc, cfg);
  EXPECT_EQ(trace_jsonl(a.trace), trace_jsonl(b.trace));
  EXPECT_EQ(a.status, b.status);
}

TEST(Trace, JsonLines) {
  const RunResult r = run_congen(oracle::toy_t1(), SolverConfig{}, exact_cfg(Threshold::at(0.5)));
  const std::string text = trace_jsonl(r.trace);
  std::istringstream in(text);
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["iter"], count + 1);
    ++count;
  }
  EXPECT_EQ(count, 2U);
  const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
  EXPECT_EQ(first["tau"], nlohmann::json({1, 1}));
  EXPECT_TRUE(first["best_feasible_value_so_far"].is_null());
  EXPECT_EQ(first["t_effective"], 0.5);
}

}  // namespace
}  // namespace qcg
