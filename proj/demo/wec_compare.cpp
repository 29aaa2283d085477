// Compares plain QAOA on the fully penalized problem against constraint
// generation on a handful of small weighted exact-cover instances.

#include <iostream>

#include "qcg/bench.hpp"

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::stoul(argv[1]) : 5;

  qcg::SolverConfig solver;
  solver.kind = qcg::SolverKind::Qaoa;
  qcg::SuiteConfig sc;
  sc.family = {.n_sets = 8, .n_elements = 10, .max_set_size = 5};
  sc.n_instances = n;
  sc.methods = {qcg::parse_method("plain_qaoa", solver, {}), qcg::parse_method("congen", solver, {})};
  sc.jobs = 4;

  const qcg::SuiteResult res = qcg::run_suite(sc);
  std::cout << qcg::records_csv(res.records);
  std::cout << qcg::summary_json(res.summary).dump(2) << '\n';
}
