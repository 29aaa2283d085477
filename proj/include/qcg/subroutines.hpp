#pragma once

/// @file subroutines.hpp
/// @brief Ground-state subroutines that turn an Ising model into a
/// sampleable distribution over basis states.
///
/// Three implementations share one interface: exact diagonalization of the
/// diagonal cost operator, a p-layer QAOA statevector simulation with a
/// budgeted Nelder-Mead outer loop (warm-startable), and a single-spin-flip
/// Metropolis sampler. Distributions are dense vectors over 2^n basis states
/// using the Assignment bit convention (bit i of the index is x_i, and
/// x_i = 1 is spin +1).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcg/errors.hpp"
#include "qcg/hamiltonian.hpp"
#include "qcg/nelder_mead.hpp"
#include "qcg/problem.hpp"
#include "qcg/rng.hpp"

namespace qcg {

inline constexpr std::size_t kDefaultMaxQubits = 16;
inline constexpr std::size_t kHardMaxQubits = 24;

/// Statevector qubit cap: QCG_MAX_QUBITS if set (clamped to 24), else 16.
inline std::size_t max_qubits() {
  if (const char* env = std::getenv("QCG_MAX_QUBITS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return std::min<std::size_t>(v, kHardMaxQubits);
  }
  return kDefaultMaxQubits;
}

inline void check_qubits(std::size_t n, std::size_t cap) {
  if (n > std::min(cap, kHardMaxQubits))
    throw TooLarge("model has " + std::to_string(n) + " qubits, cap is " + std::to_string(std::min(cap, kHardMaxQubits)));
}

/// Ising energy of every computational basis state.
struct CostSpectrum {
  std::size_t n = 0;
  std::vector<double> energies;

  double min() const { return *std::min_element(energies.begin(), energies.end()); }
  double max() const { return *std::max_element(energies.begin(), energies.end()); }
  double mean() const {
    double s = 0.0;
    for (double e : energies) s += e;
    return s / static_cast<double>(energies.size());
  }
};

inline CostSpectrum cost_spectrum(const IsingModel& model, std::size_t cap = max_qubits()) {
  const std::size_t n = model.n();
  check_qubits(n, cap);
  CostSpectrum spec;
  spec.n = n;
  const std::uint64_t dim = std::uint64_t{1} << n;
  spec.energies.resize(dim);
  std::vector<double> s(n);
  for (std::uint64_t z = 0; z < dim; ++z) {
    for (std::size_t i = 0; i < n; ++i) s[i] = ((z >> i) & 1U) ? 1.0 : -1.0;
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += model.J(ii, static_cast<Eigen::Index>(j)) * s[j];
      quad += s[i] * row;
      lin += model.h(ii) * s[i];
    }
    spec.energies[z] = -quad - model.mu * lin;
  }
  return spec;
}

// ---------------------------------------------------------------------------
// QAOA statevector simulation

struct QaoaParams {
  std::vector<double> gamma;
  std::vector<double> beta;

  QaoaParams() = default;
  QaoaParams(std::vector<double> g, std::vector<double> b) : gamma(std::move(g)), beta(std::move(b)) {
    if (gamma.size() != beta.size()) throw ConfigError("QAOA gamma and beta must have equal length");
  }
  static QaoaParams constant(std::size_t p, double angle) {
    return {std::vector<double>(p, angle), std::vector<double>(p, angle)};
  }

  std::size_t p() const { return gamma.size(); }
  friend bool operator==(const QaoaParams&, const QaoaParams&) = default;
};

using StateVector = std::vector<std::complex<double>>;

/// prod_l exp(-i beta_l B) exp(-i gamma_l C) |+>^n with C = diag(energies), B = sum_i X_i.
inline StateVector qaoa_evolve(const CostSpectrum& spec, const QaoaParams& params) {
  if (params.gamma.size() != params.beta.size()) throw ConfigError("QAOA gamma and beta must have equal length");
  const std::size_t dim = spec.energies.size();
  StateVector psi(dim, std::complex<double>(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
  for (std::size_t l = 0; l < params.p(); ++l) {
    const double g = params.gamma[l];
    for (std::size_t z = 0; z < dim; ++z) psi[z] *= std::polar(1.0, -g * spec.energies[z]);

    const double c = std::cos(params.beta[l]);
    const std::complex<double> ms(0.0, -std::sin(params.beta[l]));
    for (std::size_t q = 0; q < spec.n; ++q) {
      const std::size_t bit = std::size_t{1} << q;
      for (std::size_t z = 0; z < dim; ++z) {
        if (z & bit) continue;
        const auto a = psi[z];
        const auto b = psi[z | bit];
        psi[z] = c * a + ms * b;
        psi[z | bit] = ms * a + c * b;
      }
    }
  }
  return psi;
}

inline double norm(const StateVector& psi) {
  double s = 0.0;
  for (const auto& a : psi) s += std::norm(a);
  return std::sqrt(s);
}

/// <psi| C |psi>.
inline double expectation(const StateVector& psi, const CostSpectrum& spec) {
  if (psi.size() != spec.energies.size()) throw DimensionMismatch("state and spectrum sizes differ");
  if (std::abs(norm(psi) - 1.0) > 1e-6) throw NotNormalized("state norm deviates from 1 by more than 1e-6");
  double e = 0.0;
  for (std::size_t z = 0; z < psi.size(); ++z) e += std::norm(psi[z]) * spec.energies[z];
  return e;
}

struct SolverOutput {
  /// Probability of each basis state; sums to 1.
  std::vector<double> distribution;
  std::optional<QaoaParams> params;
  double mean_energy = 0.0;
  double best_energy_seen = 0.0;
};

namespace detail {

inline double lowest_supported_energy(const std::vector<double>& dist, const CostSpectrum& spec) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < dist.size(); ++z)
    if (dist[z] > 0.0) best = std::min(best, spec.energies[z]);
  return best;
}

inline std::vector<double> probabilities(const StateVector& psi) {
  std::vector<double> p(psi.size());
  double total = 0.0;
  for (std::size_t z = 0; z < psi.size(); ++z) total += (p[z] = std::norm(psi[z]));
  for (double& v : p) v /= total;
  return p;
}

}  // namespace detail

inline constexpr double kDefaultInitialAngle = 0.01;

/// Minimizes the QAOA energy expectation over (gamma, beta) in [-pi, pi]^{2p}.
///
/// Starts from `init` when given (warm start), else from all angles 0.01.
/// The initial simplex offsets are 0.1 rad with a sign pattern drawn from
/// `seed`. `budget` counts expectation evaluations.
inline SolverOutput optimize_qaoa(const CostSpectrum& spec, std::size_t p, const std::optional<QaoaParams>& init,
                                  std::size_t budget, std::uint64_t seed) {
  if (p < 1) throw ConfigError("QAOA needs p >= 1");
  if (budget < 1) throw ConfigError("QAOA optimizer budget must be >= 1");
  if (init && init->p() != p)
    throw ConfigError("warm-start parameters have p = " + std::to_string(init->p()) + ", expected " + std::to_string(p));

  const QaoaParams start = init ? *init : QaoaParams::constant(p, kDefaultInitialAngle);
  std::vector<double> x0(start.gamma);
  x0.insert(x0.end(), start.beta.begin(), start.beta.end());

  Rng rng(seed);
  NelderMeadOptions opt;
  opt.budget = budget;
  opt.lower = -std::numbers::pi;
  opt.upper = std::numbers::pi;
  opt.steps.resize(2 * p);
  for (double& s : opt.steps) s = (rng() & 1U) ? 0.1 : -0.1;

  auto unpack = [p](const std::vector<double>& v) {
    return QaoaParams(std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(p)),
                      std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(p), v.end()));
  };
  const auto result = nelder_mead(
      [&](const std::vector<double>& v) { return expectation(qaoa_evolve(spec, unpack(v)), spec); }, x0, opt);

  SolverOutput out;
  out.params = unpack(result.x);
  const StateVector psi = qaoa_evolve(spec, *out.params);
  out.distribution = detail::probabilities(psi);
  out.mean_energy = result.value;
  out.best_energy_seen = detail::lowest_supported_energy(out.distribution, spec);
  return out;
}

/// Point mass on the minimum-energy basis state (lowest index on ties).
inline SolverOutput solve_exact(const IsingModel& model, std::size_t cap = max_qubits()) {
  const CostSpectrum spec = cost_spectrum(model, cap);
  std::size_t arg = 0;
  for (std::size_t z = 1; z < spec.energies.size(); ++z)
    if (spec.energies[z] < spec.energies[arg]) arg = z;
  SolverOutput out;
  out.distribution.assign(spec.energies.size(), 0.0);
  out.distribution[arg] = 1.0;
  out.mean_energy = spec.energies[arg];
  out.best_energy_seen = spec.energies[arg];
  return out;
}

struct TemperatureSchedule {
  double t_start = 50.0;
  double t_end = 0.1;
};

/// Single-spin-flip Metropolis with random site selection.
///
/// The first sweeps/2 sweeps cool geometrically from t_start to t_end; the
/// remaining sweeps run at t_end and every state they visit (the starting
/// state and the state after each attempted flip) is tallied into the
/// returned empirical distribution. A sweep is n attempted flips.
inline SolverOutput solve_metropolis(const IsingModel& model, std::size_t sweeps, TemperatureSchedule schedule,
                                     std::uint64_t seed, std::size_t cap = max_qubits()) {
  if (sweeps < 1) throw ConfigError("Metropolis needs sweeps >= 1");
  if (!(schedule.t_start > 0.0) || !(schedule.t_end > 0.0)) throw ConfigError("temperatures must be positive");
  const CostSpectrum spec = cost_spectrum(model, cap);
  const std::size_t n = model.n();
  Rng rng(seed);

  // Symmetrized couplings for the flip delta: dE_k = 2 s_k (sum_{j!=k} (J_kj + J_jk) s_j + mu h_k).
  const Eigen::MatrixXd Js = model.J + model.J.transpose();
  std::vector<int> s(n);
  std::uint64_t z = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool up = rng() & 1U;
    s[i] = up ? 1 : -1;
    if (up) z |= std::uint64_t{1} << i;
  }

  const std::size_t cooling = sweeps / 2;
  const std::size_t sampling = sweeps - cooling;
  std::vector<std::uint64_t> counts(spec.energies.size(), 0);
  std::uint64_t tally = 0;
  double best = spec.energies[z];

  auto attempt = [&](double temperature) {
    const auto k = static_cast<std::size_t>(uniform_int(rng, 0, n - 1));
    const auto kk = static_cast<Eigen::Index>(k);
    double field = model.mu * model.h(kk);
    for (std::size_t j = 0; j < n; ++j)
      if (j != k) field += Js(kk, static_cast<Eigen::Index>(j)) * s[j];
    const double delta = 2.0 * s[k] * field;
    const double u = uniform01(rng);
    if (delta <= 0.0 || u < std::exp(-delta / temperature)) {
      s[k] = -s[k];
      z ^= std::uint64_t{1} << k;
      best = std::min(best, spec.energies[z]);
    }
  };

  for (std::size_t sw = 0; sw < cooling; ++sw) {
    const double frac = cooling > 1 ? static_cast<double>(sw) / static_cast<double>(cooling - 1) : 1.0;
    const double temperature = schedule.t_start * std::pow(schedule.t_end / schedule.t_start, frac);
    for (std::size_t a = 0; a < n; ++a) attempt(temperature);
  }
  ++counts[z];
  ++tally;
  for (std::size_t sw = 0; sw < sampling; ++sw) {
    for (std::size_t a = 0; a < n; ++a) {
      attempt(schedule.t_end);
      ++counts[z];
      ++tally;
    }
  }

  SolverOutput out;
  out.distribution.resize(counts.size());
  out.mean_energy = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.distribution[i] = static_cast<double>(counts[i]) / static_cast<double>(tally);
    out.mean_energy += out.distribution[i] * spec.energies[i];
  }
  out.best_energy_seen = best;
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

/// q draws aggregated into distinct bitstrings (ascending basis index).
struct SampleSet {
  std::size_t n = 0;
  std::vector<std::uint64_t> indices;
  std::vector<Assignment> X;
  std::vector<std::size_t> omega;
  std::size_t q = 0;

  std::size_t s() const { return X.size(); }
};

/// Builds a SampleSet from explicit (assignment, count) pairs.
inline SampleSet make_sample_set(std::size_t n, const std::vector<std::pair<Assignment, std::size_t>>& draws) {
  std::map<std::uint64_t, std::size_t> agg;
  for (const auto& [x, count] : draws) {
    if (x.size() != n) throw DimensionMismatch("sample width differs from n");
    if (count == 0) continue;
    agg[x.to_index()] += count;
  }
  SampleSet set;
  set.n = n;
  for (const auto& [z, count] : agg) {
    set.indices.push_back(z);
    set.X.push_back(Assignment::from_index(z, n));
    set.omega.push_back(count);
    set.q += count;
  }
  return set;
}

/// Inverse-CDF sampling of q basis states from out.distribution.
inline SampleSet sample_state(const SolverOutput& out, std::size_t q, std::uint64_t seed) {
  if (q < 1) throw ConfigError("sample count q must be >= 1");
  const std::size_t dim = out.distribution.size();
  if (dim == 0 || (dim & (dim - 1)) != 0) throw DimensionMismatch("distribution length must be a power of two");
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;

  std::vector<double> cdf(dim);
  double acc = 0.0;
  for (std::size_t z = 0; z < dim; ++z) cdf[z] = (acc += out.distribution[z]);

  Rng rng(seed);
  std::map<std::uint64_t, std::size_t> agg;
  for (std::size_t k = 0; k < q; ++k) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    // Skip zero-probability states sharing the same cumulative value.
    auto z = static_cast<std::size_t>(it - cdf.begin());
    while (out.distribution[z] <= 0.0 && z + 1 < dim) ++z;
    ++agg[z];
  }
  SampleSet set;
  set.n = n;
  set.q = q;
  for (const auto& [z, count] : agg) {
    set.indices.push_back(z);
    set.X.push_back(Assignment::from_index(z, n));
    set.omega.push_back(count);
  }
  return set;
}

// ---------------------------------------------------------------------------
// Pluggable subroutine interface

enum class SolverKind { Exact, Qaoa, Metropolis };

inline std::string_view to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Exact: return "exact";
    case SolverKind::Qaoa: return "qaoa";
    case SolverKind::Metropolis: return "metropolis";
  }
  return "?";
}

inline SolverKind parse_solver_kind(std::string_view s) {
  if (s == "exact") return SolverKind::Exact;
  if (s == "qaoa") return SolverKind::Qaoa;
  if (s == "metropolis") return SolverKind::Metropolis;
  throw ConfigError("unknown solver \"" + std::string(s) + "\" (expected exact, qaoa or metropolis)");
}

struct SolverConfig {
  SolverKind kind = SolverKind::Exact;
  std::size_t p = 2;
  std::size_t budget = 300;
  std::size_t sweeps = 2000;
  TemperatureSchedule schedule;
  std::size_t max_qubits = qcg::max_qubits();
};

/// A ground-state subroutine. Implementations may keep state across calls
/// within one run (QAOA keeps its last optimum as the next warm start).
class GroundStateSolver {
 public:
  virtual ~GroundStateSolver() = default;
  virtual SolverOutput solve(const IsingModel& model, std::uint64_t seed) = 0;
  virtual std::string_view name() const = 0;
};

class ExactSolver final : public GroundStateSolver {
 public:
  explicit ExactSolver(std::size_t cap = max_qubits()) : cap_(cap) {}
  SolverOutput solve(const IsingModel& model, std::uint64_t) override { return solve_exact(model, cap_); }
  std::string_view name() const override { return "exact"; }

 private:
  std::size_t cap_;
};

class QaoaSolver final : public GroundStateSolver {
 public:
  QaoaSolver(std::size_t p, std::size_t budget, std::size_t cap = max_qubits()) : p_(p), budget_(budget), cap_(cap) {}

  SolverOutput solve(const IsingModel& model, std::uint64_t seed) override {
    SolverOutput out = optimize_qaoa(cost_spectrum(model, cap_), p_, warm_, budget_, seed);
    warm_ = out.params;
    return out;
  }
  std::string_view name() const override { return "qaoa"; }

  const std::optional<QaoaParams>& warm_start() const { return warm_; }
  void set_warm_start(std::optional<QaoaParams> params) { warm_ = std::move(params); }

 private:
  std::size_t p_;
  std::size_t budget_;
  std::size_t cap_;
  std::optional<QaoaParams> warm_;
};

class MetropolisSolver final : public GroundStateSolver {
 public:
  MetropolisSolver(std::size_t sweeps, TemperatureSchedule schedule, std::size_t cap = max_qubits())
      : sweeps_(sweeps), schedule_(schedule), cap_(cap) {}
  SolverOutput solve(const IsingModel& model, std::uint64_t seed) override {
    return solve_metropolis(model, sweeps_, schedule_, seed, cap_);
  }
  std::string_view name() const override { return "metropolis"; }

 private:
  std::size_t sweeps_;
  TemperatureSchedule schedule_;
  std::size_t cap_;
};

inline std::unique_ptr<GroundStateSolver> make_solver(const SolverConfig& cfg) {
  switch (cfg.kind) {
    case SolverKind::Exact: return std::make_unique<ExactSolver>(cfg.max_qubits);
    case SolverKind::Qaoa: return std::make_unique<QaoaSolver>(cfg.p, cfg.budget, cfg.max_qubits);
    case SolverKind::Metropolis: return std::make_unique<MetropolisSolver>(cfg.sweeps, cfg.schedule, cfg.max_qubits);
  }
  throw ConfigError("unknown solver kind");
}

}  // namespace qcg
