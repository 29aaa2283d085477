#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "qcg/bench.hpp"

namespace qcg {
namespace {

TEST(Approx, Examples) {
  EXPECT_EQ(approx_percent(5.0, 5.0), 100.0);
  EXPECT_EQ(approx_percent(5.0, 10.0), 50.0);
  EXPECT_EQ(approx_percent(5.0, std::nullopt), 0.0);
  EXPECT_THROW(approx_percent(0.0, 3.0), NonPositiveOpt);
  EXPECT_THROW(approx_percent(-1.0, 3.0), NonPositiveOpt);
}

TEST(Methods, Parse) {
  const SolverConfig sc;
  const CongenConfig cc;
  auto m = parse_method("plain_qaoa", sc, cc);
  EXPECT_EQ(m.kind, MethodSpec::Kind::Plain);
  EXPECT_EQ(m.solver.kind, SolverKind::Qaoa);
  m = parse_method("exact_oracle", sc, cc);
  EXPECT_EQ(m.kind, MethodSpec::Kind::Congen);
  EXPECT_EQ(m.solver.kind, SolverKind::Exact);
  m = parse_method("congen:metropolis", sc, cc);
  EXPECT_EQ(m.solver.kind, SolverKind::Metropolis);
  EXPECT_THROW(parse_method("magic", sc, cc), ConfigError);
  EXPECT_THROW(parse_method("plain:magic", sc, cc), ConfigError);
}

TEST(Plain, ExactOnToyIsOptimal) {
  SolverConfig sc;
  const RunRecord r = plain_qaoa_baseline(oracle::toy_t1(), sc, 64, 0);
  EXPECT_TRUE(r.feasible);
  EXPECT_EQ(r.alg_value, 5.0);
  EXPECT_EQ(r.approx_percent, 100.0);
  EXPECT_EQ(r.iterations, 1U);
  EXPECT_EQ(r.method, "plain_exact");
}

TEST(Plain, QaoaOnToyRuns) {
  SolverConfig sc;
  sc.kind = SolverKind::Qaoa;
  const RunRecord r = plain_qaoa_baseline(oracle::toy_t1(), sc, 1024, 1);
  EXPECT_EQ(r.opt_value, 5.0);
  if (r.feasible) {
    EXPECT_GE(*r.alg_value, 5.0);
    EXPECT_LE(r.approx_percent, 100.0);
  } else {
    EXPECT_EQ(r.approx_percent, 0.0);
  }
}

SuiteConfig small_suite(const std::vector<std::string>& names) {
  SolverConfig sc;
  sc.budget = 40;
  CongenConfig cc;
  cc.q = 128;
  SuiteConfig cfg;
  cfg.family = {.n_sets = 6, .n_elements = 8, .max_set_size = 4};
  cfg.n_instances = 4;
  for (const auto& n : names) cfg.methods.push_back(parse_method(n, sc, cc));
  return cfg;
}

TEST(Suite, ExactOracleIsOptimal) {
  const auto res = run_suite(small_suite({"exact_oracle"}));
  ASSERT_EQ(res.records.size(), 4U);
  for (const auto& r : res.records) {
    EXPECT_TRUE(r.feasible);
    EXPECT_NEAR(r.approx_percent, 100.0, 1e-9);
    EXPECT_EQ(r.wall_ms, 0.0);
  }
  EXPECT_NEAR(res.summary.at("exact_oracle").mean_approx, 100.0, 1e-9);
  EXPECT_EQ(res.summary.at("exact_oracle").feasibility_rate, 100.0);
}

TEST(Suite, SingleInstanceAndOrdering) {
  auto cfg = small_suite({"plain_qaoa", "congen", "exact_oracle"});
  cfg.n_instances = 1;
  const auto res = run_suite(cfg);
  ASSERT_EQ(res.records.size(), 3U);
  EXPECT_EQ(res.records[0].method, "congen");
  EXPECT_EQ(res.records[1].method, "exact_oracle");
  EXPECT_EQ(res.records[2].method, "plain_qaoa");
  for (const auto& [name, s] : res.summary) EXPECT_EQ(s.n, 1U) << name;
}

TEST(Suite, JobsDoNotChangeOutput) {
  auto cfg = small_suite({"plain_qaoa", "congen"});
  const auto serial = records_csv(run_suite(cfg).records);
  cfg.jobs = 3;
  EXPECT_EQ(records_csv(run_suite(cfg).records), serial);
}

TEST(Suite, Validation) {
  auto cfg = small_suite({});
  EXPECT_THROW(run_suite(cfg), ConfigError);
  cfg = small_suite({"congen"});
  cfg.n_instances = 0;
  EXPECT_THROW(run_suite(cfg), ConfigError);
}

TEST(Csv, Format) {
  RunRecord a{.instance_id = 1, .method = "congen", .feasible = true, .alg_value = 12.5, .opt_value = 10.0,
              .approx_percent = 80.0, .iterations = 3};
  RunRecord b{.instance_id = 0, .method = "plain_qaoa", .opt_value = 7.0};
  const std::string csv = records_csv({a, b});
  EXPECT_EQ(csv,
            "instance_id,method,feasible,alg_value,opt_value,approx_percent,iterations,wall_ms\r\n"
            "0,plain_qaoa,0,,7,0,0,0\r\n"
            "1,congen,1,12.5,10,80,3,0\r\n");
}

TEST(Csv, QuotesFields) {
  RunRecord r{.method = "a,\"b\"", .opt_value = 1.0};
  EXPECT_NE(records_csv({r}).find("\"a,\"\"b\"\"\""), std::string::npos);
}

TEST(Csv, SweepAndFile) {
  const std::vector<SweepRow> rows{{.m = 5, .method = "congen", .mean = 91.25, .stddev = 3.5, .n = 4}};
  EXPECT_EQ(sweep_csv(rows), "m,method,mean_approx,stddev,n\r\n5,congen,91.25,3.5,4\r\n");
  const auto path = (std::filesystem::temp_directory_path() / "qcg_sweep_test.csv").string();
  export_csv(rows, path);
  std::ifstream f(path, std::ios::binary);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(f), {}), sweep_csv(rows));
  std::remove(path.c_str());
  EXPECT_THROW(export_csv(rows, "/nonexistent-dir/x.csv"), IoError);
}

TEST(Sweep, PopulationStddev) {
  SolverConfig sc;
  CongenConfig cc;
  cc.q = 32;
  const auto rows = density_sweep({.n_sets = 5, .max_set_size = 3}, {3, 4}, 3, {parse_method("exact_oracle", sc, cc)}, 1);
  ASSERT_EQ(rows.size(), 2U);
  for (const auto& r : rows) {
    EXPECT_EQ(r.n, 3U);
    EXPECT_NEAR(r.mean, 100.0, 1e-9);
    EXPECT_NEAR(r.stddev, 0.0, 1e-9);
  }
}

TEST(Summary, Json) {
  std::map<std::string, MethodSummary> s{{"congen", {.mean_approx = 90.0, .feasibility_rate = 100.0, .n = 2}}};
  EXPECT_EQ(summary_json(s).dump(), R"({"congen":{"mean_approx":90.0,"feasibility_rate":100.0,"n":2}})");
}

}  // namespace
}  // namespace qcg
