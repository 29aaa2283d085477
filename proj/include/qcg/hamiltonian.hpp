#pragma once

/// @file hamiltonian.hpp
/// @brief Penalty QUBO over an active constraint subset and its Ising form.
///
/// With Ahat = rows of A listed in the penalty state (all other rows zero),
///
///   QUBO(x)   = x^T (M Ahat^T Ahat) x + (c - 2M Ahat^T bhat)^T x + M bhat^T bhat
///   H(sigma)  = -sigma^T J sigma - mu h^T sigma,        sigma = 2x - 1
///   J         = -(M/4) Ahat^T Ahat
///   h         = c - 2M Ahat^T bhat + M (Ahat^T Ahat) 1
///   mu        = -1/2
///   constant  = (M/4) 1^T Ahat^T Ahat 1 + (1/2) 1^T c - M bhat^T Ahat 1 + M bhat^T bhat
///
/// so that QUBO(x) == H(2x - 1) + constant for every x.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qcg/errors.hpp"
#include "qcg/problem.hpp"

namespace qcg {

/// Zero threshold for couplings and symmetry checks.
inline constexpr double kCouplingEps = 1e-12;

/// Which constraint rows are currently penalized. Rows are 0-based.
class PenaltyState {
 public:
  PenaltyState() = default;
  explicit PenaltyState(std::size_t m) : m_(m) {}
  PenaltyState(std::size_t m, std::vector<std::size_t> rows) : m_(m), active_(std::move(rows)) {
    std::sort(active_.begin(), active_.end());
    active_.erase(std::unique(active_.begin(), active_.end()), active_.end());
    if (!active_.empty() && active_.back() >= m_)
      throw DimensionMismatch("active row " + std::to_string(active_.back()) + " out of range for m = " +
                              std::to_string(m_));
  }

  static PenaltyState all(std::size_t m) {
    std::vector<std::size_t> rows(m);
    for (std::size_t j = 0; j < m; ++j) rows[j] = j;
    return {m, std::move(rows)};
  }

  std::size_t m() const { return m_; }
  const std::vector<std::size_t>& active_rows() const { return active_; }
  bool is_active(std::size_t j) const { return std::binary_search(active_.begin(), active_.end(), j); }

  /// Rows not yet penalized, ascending.
  std::vector<std::size_t> remainder() const {
    std::vector<std::size_t> r;
    r.reserve(m_ - active_.size());
    for (std::size_t j = 0; j < m_; ++j)
      if (!is_active(j)) r.push_back(j);
    return r;
  }

  friend bool operator==(const PenaltyState&, const PenaltyState&) = default;

 private:
  std::size_t m_ = 0;
  std::vector<std::size_t> active_;
};

struct QuboModel {
  Eigen::MatrixXd Q;
  Eigen::VectorXd linear;
  double constant = 0.0;

  std::size_t n() const { return static_cast<std::size_t>(linear.size()); }
};

struct IsingModel {
  Eigen::MatrixXd J;
  Eigen::VectorXd h;
  double mu = -0.5;
  double constant = 0.0;

  std::size_t n() const { return static_cast<std::size_t>(h.size()); }
};

/// Spin configuration, entries in {-1, +1}.
using Spins = std::vector<int>;

inline Spins to_spins(const Assignment& x) {
  Spins s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = 2 * x[i] - 1;
  return s;
}

/// Penalty weight (1/kappa) * sum |c_i|, floored at 1 for an all-zero objective.
inline double compute_big_m(const BlpInstance& inst, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidKappa("kappa must be a positive finite number");
  const double m = inst.c().cwiseAbs().sum() / kappa;
  return m == 0.0 ? 1.0 : m;
}

namespace detail {

inline void check_state(const BlpInstance& inst, const PenaltyState& state) {
  if (state.m() != inst.m())
    throw DimensionMismatch("penalty state has m = " + std::to_string(state.m()) + ", instance has m = " +
                            std::to_string(inst.m()));
}

/// Ahat^T Ahat accumulated over the active rows only.
inline Eigen::MatrixXd gram(const BlpInstance& inst, const PenaltyState& state) {
  const auto n = static_cast<Eigen::Index>(inst.n());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j : state.active_rows()) {
    const Eigen::RowVectorXd a = inst.A().row(static_cast<Eigen::Index>(j));
    G.noalias() += a.transpose() * a;
  }
  return G;
}

/// Ahat^T bhat.
inline Eigen::VectorXd weighted_rows(const BlpInstance& inst, const PenaltyState& state) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inst.n()));
  for (std::size_t j : state.active_rows()) {
    const auto r = static_cast<Eigen::Index>(j);
    v += inst.b()(r) * inst.A().row(r).transpose();
  }
  return v;
}

inline double bhat_sq(const BlpInstance& inst, const PenaltyState& state) {
  double s = 0.0;
  for (std::size_t j : state.active_rows()) s += inst.b()(static_cast<Eigen::Index>(j)) * inst.b()(static_cast<Eigen::Index>(j));
  return s;
}

}  // namespace detail

inline QuboModel build_rqp(const BlpInstance& inst, const PenaltyState& state, double M) {
  detail::check_state(inst, state);
  if (!(M > 0.0)) throw ConfigError("penalty weight M must be positive");
  QuboModel q;
  q.Q = M * detail::gram(inst, state);
  q.linear = inst.c() - 2.0 * M * detail::weighted_rows(inst, state);
  q.constant = M * detail::bhat_sq(inst, state);
  return q;
}

inline double qubo_value(const QuboModel& q, const Assignment& x) {
  if (x.size() != q.n())
    throw DimensionMismatch("assignment has " + std::to_string(x.size()) + " entries, QUBO has " +
                            std::to_string(q.n()));
  const Eigen::VectorXd v = x.as_vector();
  return v.dot(q.Q * v) + q.linear.dot(v) + q.constant;
}

/// Ising form of the QUBO produced by build_rqp(inst, state, M).
inline IsingModel qubo_to_ising(const QuboModel& q, const BlpInstance& inst, const PenaltyState& state, double M) {
  detail::check_state(inst, state);
  if (q.n() != inst.n()) throw DimensionMismatch("QUBO and instance disagree on n");
  const Eigen::MatrixXd G = detail::gram(inst, state);
  const Eigen::VectorXd Ab = detail::weighted_rows(inst, state);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(inst.n()));

  IsingModel model;
  model.J = -0.25 * M * G;
  model.h = inst.c() - 2.0 * M * Ab + M * (G * ones);
  model.mu = -0.5;
  // The b-hat cross term enters with a minus sign; re-deriving from
  // x = (sigma + 1)/2 and the exhaustive equivalence tests both pin it.
  model.constant = 0.25 * M * G.sum() + 0.5 * inst.c().sum() - M * Ab.sum() + M * detail::bhat_sq(inst, state);
  return model;
}

/// Convenience: build_rqp followed by qubo_to_ising.
inline IsingModel build_ising(const BlpInstance& inst, const PenaltyState& state, double M) {
  return qubo_to_ising(build_rqp(inst, state, M), inst, state, M);
}

/// -sigma^T J sigma - mu h^T sigma. The additive constant is not included.
inline double ising_energy(const IsingModel& model, const Spins& sigma) {
  if (sigma.size() != model.n())
    throw DimensionMismatch("spin vector has " + std::to_string(sigma.size()) + " entries, model has " +
                            std::to_string(model.n()));
  Eigen::VectorXd s(static_cast<Eigen::Index>(sigma.size()));
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i] != 1 && sigma[i] != -1) throw InvalidSpin("spin entries must be -1 or +1");
    s(static_cast<Eigen::Index>(i)) = sigma[i];
  }
  return -s.dot(model.J * s) - model.mu * model.h.dot(s);
}

/// Number of strictly upper-triangular couplings with |J_ij| > 1e-12.
inline std::size_t coupling_count(const IsingModel& model) {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < model.J.rows(); ++i)
    for (Eigen::Index j = i + 1; j < model.J.cols(); ++j)
      if (std::abs(model.J(i, j)) > kCouplingEps) ++count;
  return count;
}

}  // namespace qcg
