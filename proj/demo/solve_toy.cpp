// Runs constraint generation on a three-variable covering problem and prints
// the per-iteration trace.

#include <iostream>

#include "qcg/congen.hpp"

int main() {
  Eigen::MatrixXd A(2, 3);
  A << 1, 0, 1, 0, 1, 1;
  const qcg::BlpInstance inst("toy", Eigen::Vector3d(3, 4, 5), A, Eigen::Vector2d(1, 1));

  qcg::SolverConfig solver;
  solver.kind = qcg::SolverKind::Qaoa;
  qcg::CongenConfig cfg;
  cfg.seed = 7;

  const qcg::RunResult res = qcg::run_congen(inst, solver, cfg);
  std::cout << qcg::trace_jsonl(res.trace);
  std::cout << "status " << qcg::to_string(res.status) << ", calls " << res.total_solver_calls << '\n';
  if (res.best) {
    std::cout << "x =";
    for (int v : res.best->x.to_ints()) std::cout << ' ' << v;
    std::cout << ", value " << res.best->value << '\n';
  }
}
