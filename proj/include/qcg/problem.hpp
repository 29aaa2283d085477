#pragma once

/// @file problem.hpp
/// @brief Binary linear programs min{ c^T x | Ax = b, x in {0,1}^n }.
///
/// Holds the instance type, feasibility/objective evaluation, the weighted
/// exact cover generator, the exhaustive reference solver and the JSON
/// instance format.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qcg/errors.hpp"
#include "qcg/rng.hpp"

namespace qcg {

/// Residual tolerance used when A or b carry non-integer entries.
inline constexpr double kFeasEps = 1e-9;

/// Largest n accepted by the enumeration oracle.
inline constexpr std::size_t kMaxEnumerationVars = 24;

/// A point of {0,1}^n.
///
/// Basis-index convention shared by every module: bit i of a basis index
/// (least significant bit = variable 0) is x_i, and x_i = 1 <=> spin +1.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::size_t n) : bits_(n, 0) {}
  Assignment(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) push_checked(b);
  }
  explicit Assignment(const std::vector<int>& bits) {
    bits_.reserve(bits.size());
    for (int b : bits) push_checked(b);
  }

  static Assignment from_index(std::uint64_t index, std::size_t n) {
    Assignment x(n);
    for (std::size_t i = 0; i < n; ++i) x.bits_[i] = static_cast<std::uint8_t>((index >> i) & 1U);
    return x;
  }

  std::uint64_t to_index() const {
    std::uint64_t z = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) z |= (std::uint64_t{1} << i);
    return z;
  }

  std::size_t size() const { return bits_.size(); }
  int operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool v) { bits_.at(i) = v ? 1 : 0; }

  Eigen::VectorXd as_vector() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(bits_.size()));
    for (std::size_t i = 0; i < bits_.size(); ++i) v(static_cast<Eigen::Index>(i)) = bits_[i];
    return v;
  }

  std::vector<int> to_ints() const { return {bits_.begin(), bits_.end()}; }

  friend bool operator==(const Assignment&, const Assignment&) = default;
  /// Lexicographic with x_0 most significant.
  friend auto operator<=>(const Assignment& a, const Assignment& b) { return a.bits_ <=> b.bits_; }

 private:
  void push_checked(int b) {
    if (b != 0 && b != 1) throw ConfigError("assignment entries must be 0 or 1");
    bits_.push_back(static_cast<std::uint8_t>(b));
  }

  std::vector<std::uint8_t> bits_;
};

/// Immutable binary linear program with equality constraints.
class BlpInstance {
 public:
  BlpInstance(std::string name, Eigen::VectorXd c, Eigen::MatrixXd A, Eigen::VectorXd b)
      : name_(std::move(name)), c_(std::move(c)), A_(std::move(A)), b_(std::move(b)) {
    if (c_.size() < 1) throw DimensionMismatch("instance needs at least one variable");
    // An m = 0 matrix built as MatrixXd(0, 0) is accepted for any n.
    if (A_.rows() == 0) A_.resize(0, c_.size());
    if (A_.cols() != c_.size())
      throw DimensionMismatch("A has " + std::to_string(A_.cols()) + " columns but |c| = " +
                              std::to_string(c_.size()));
    if (A_.rows() != b_.size())
      throw DimensionMismatch("A has " + std::to_string(A_.rows()) + " rows but |b| = " +
                              std::to_string(b_.size()));
    if (!c_.allFinite() || !A_.allFinite() || !b_.allFinite())
      throw ConfigError("instance entries must be finite");
    integral_ = is_integral(A_) && is_integral(b_);
  }

  const std::string& name() const { return name_; }
  const Eigen::VectorXd& c() const { return c_; }
  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  std::size_t n() const { return static_cast<std::size_t>(c_.size()); }
  std::size_t m() const { return static_cast<std::size_t>(A_.rows()); }
  /// True when every entry of A and b is an integer; feasibility is then exact.
  bool integral() const { return integral_; }

  friend bool operator==(const BlpInstance& x, const BlpInstance& y) {
    return x.name_ == y.name_ && x.c_ == y.c_ && x.A_.rows() == y.A_.rows() &&
           x.A_.cols() == y.A_.cols() && x.A_ == y.A_ && x.b_ == y.b_;
  }

 private:
  template <typename Derived>
  static bool is_integral(const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double v = m.reshaped()(i);
      if (v != std::floor(v)) return false;
    }
    return true;
  }

  std::string name_;
  Eigen::VectorXd c_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  bool integral_ = true;
};

inline void check_dims(const BlpInstance& inst, const Assignment& x) {
  if (x.size() != inst.n())
    throw DimensionMismatch("assignment has " + std::to_string(x.size()) + " entries, instance has n = " +
                            std::to_string(inst.n()));
}

/// c^T x, summed in ascending index order.
inline double objective(const BlpInstance& inst, const Assignment& x) {
  check_dims(inst, x);
  double s = 0.0;
  for (std::size_t i = 0; i < inst.n(); ++i)
    if (x[i]) s += inst.c()(static_cast<Eigen::Index>(i));
  return s;
}

/// Ax - b.
inline Eigen::VectorXd residual(const BlpInstance& inst, const Assignment& x) {
  check_dims(inst, x);
  Eigen::VectorXd r = -inst.b();
  for (std::size_t i = 0; i < inst.n(); ++i)
    if (x[i]) r += inst.A().col(static_cast<Eigen::Index>(i));
  return r;
}

/// Whether a single residual entry counts as a violation.
inline bool violates(const BlpInstance& inst, double residual_entry) {
  return inst.integral() ? residual_entry != 0.0 : std::abs(residual_entry) > kFeasEps;
}

inline bool is_feasible(const BlpInstance& inst, const Assignment& x) {
  const Eigen::VectorXd r = residual(inst, x);
  for (Eigen::Index j = 0; j < r.size(); ++j)
    if (violates(inst, r(j))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Reference oracle

struct OptResult {
  enum class Status { Optimal, Infeasible };
  Status status = Status::Infeasible;
  std::optional<Assignment> x;
  std::optional<double> value;

  bool optimal() const { return status == Status::Optimal; }
};

/// Exhaustive enumeration of all 2^n assignments. Ties go to the
/// lexicographically smallest x (x_0 most significant).
inline OptResult brute_force_opt(const BlpInstance& inst) {
  const std::size_t n = inst.n();
  if (n > kMaxEnumerationVars)
    throw TooLarge("brute_force_opt: n = " + std::to_string(n) + " exceeds " +
                   std::to_string(kMaxEnumerationVars));
  OptResult best;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t z = 0; z < count; ++z) {
    const Assignment x = Assignment::from_index(z, n);
    if (!is_feasible(inst, x)) continue;
    const double v = objective(inst, x);
    if (!best.optimal() || v < *best.value || (v == *best.value && x < *best.x)) {
      best.status = OptResult::Status::Optimal;
      best.x = x;
      best.value = v;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Weighted exact cover generator

struct WecConfig {
  std::size_t n_sets = 8;
  std::size_t n_elements = 25;
  std::size_t max_set_size = 12;
  std::int64_t weight_min = 1;
  std::int64_t weight_max = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_sets < 2) throw ConfigError("n_sets must be at least 2");
    if (n_elements < 1) throw ConfigError("n_elements must be at least 1");
    if (max_set_size < 1 || max_set_size > n_elements)
      throw ConfigError("max_set_size must lie in [1, n_elements]");
    if (weight_min < 1 || weight_min > weight_max)
      throw ConfigError("weights must satisfy 1 <= weight_min <= weight_max");
    if (n_sets * max_set_size < n_elements)
      throw ConfigError("cannot plant a partition: n_sets * max_set_size < n_elements");
  }
};

/// Random weighted exact cover instance with at least one feasible solution.
///
/// A partition of the universe is planted over a random subset of the sets;
/// every other set receives between 1 and max_set_size random elements.
/// Row j of A is element j, column i is set i.
inline BlpInstance generate_wec(const WecConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::size_t n = cfg.n_sets;
  const std::size_t m = cfg.n_elements;
  const std::size_t cap = cfg.max_set_size;

  const std::size_t k_min = (m + cap - 1) / cap;
  const std::size_t k_max = std::min(n, m);
  const auto k = static_cast<std::size_t>(uniform_int(rng, k_min, k_max));

  std::vector<std::size_t> set_order(n);
  for (std::size_t i = 0; i < n; ++i) set_order[i] = i;
  shuffle(set_order, rng);

  std::vector<std::size_t> elements(m);
  for (std::size_t j = 0; j < m; ++j) elements[j] = j;
  shuffle(elements, rng);

  // Sizes of the planted blocks: one element each, then spread the rest.
  std::vector<std::size_t> block_size(k, 1);
  for (std::size_t e = k; e < m; ++e) {
    std::vector<std::size_t> open;
    for (std::size_t b = 0; b < k; ++b)
      if (block_size[b] < cap) open.push_back(b);
    const auto pick = static_cast<std::size_t>(uniform_int(rng, 0, open.size() - 1));
    ++block_size[open[pick]];
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  std::size_t cursor = 0;
  for (std::size_t b = 0; b < k; ++b) {
    const auto col = static_cast<Eigen::Index>(set_order[b]);
    for (std::size_t t = 0; t < block_size[b]; ++t)
      A(static_cast<Eigen::Index>(elements[cursor++]), col) = 1.0;
  }

  for (std::size_t s = k; s < n; ++s) {
    const auto col = static_cast<Eigen::Index>(set_order[s]);
    const auto size = static_cast<std::size_t>(uniform_int(rng, 1, cap));
    std::vector<std::size_t> pool(m);
    for (std::size_t j = 0; j < m; ++j) pool[j] = j;
    shuffle(pool, rng);
    for (std::size_t t = 0; t < size; ++t) A(static_cast<Eigen::Index>(pool[t]), col) = 1.0;
  }

  Eigen::VectorXd c(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    c(static_cast<Eigen::Index>(i)) = static_cast<double>(uniform_int(
        rng, static_cast<std::uint64_t>(cfg.weight_min), static_cast<std::uint64_t>(cfg.weight_max)));

  std::ostringstream name;
  name << "WEC-" << n << '-' << m << '-' << cap << "-s" << cfg.seed;
  return BlpInstance(name.str(), std::move(c), std::move(A),
                     Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m)));
}

// ---------------------------------------------------------------------------
// JSON instance format: {"name": str, "c": [..], "A": [[..]..], "b": [..]}

namespace detail {

inline nlohmann::ordered_json number_json(double v) {
  if (std::floor(v) == v && std::abs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  return v;
}

inline double number_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError("field " + where + ": expected a number, got " + j.type_name());
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError("field " + where + ": number is not finite");
  return v;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError("field " + where + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = number_from_json(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

}  // namespace detail

inline std::string save_instance(const BlpInstance& inst) {
  nlohmann::ordered_json doc;
  doc["name"] = inst.name();
  auto c = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < inst.c().size(); ++i) c.push_back(detail::number_json(inst.c()(i)));
  doc["c"] = std::move(c);
  auto A = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < inst.A().rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index k = 0; k < inst.A().cols(); ++k) row.push_back(detail::number_json(inst.A()(r, k)));
    A.push_back(std::move(row));
  }
  doc["A"] = std::move(A);
  auto b = nlohmann::ordered_json::array();
  for (Eigen::Index j = 0; j < inst.b().size(); ++j) b.push_back(detail::number_json(inst.b()(j)));
  doc["b"] = std::move(b);
  return doc.dump();
}

inline BlpInstance load_instance(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("instance document must be a JSON object");
  for (const auto& item : doc.items()) {
    const auto& key = item.key();
    if (key != "name" && key != "c" && key != "A" && key != "b") throw ParseError("unexpected key \"" + key + "\"");
  }
  for (const char* key : {"name", "c", "A", "b"})
    if (!doc.contains(key)) throw ParseError(std::string("missing key \"") + key + "\"");
  if (!doc["name"].is_string()) throw ParseError("field name: expected a string");

  const Eigen::VectorXd c = detail::vector_from_json(doc["c"], "c");
  const Eigen::VectorXd b = detail::vector_from_json(doc["b"], "b");
  const auto& rows = doc["A"];
  if (!rows.is_array()) throw ParseError("field A: expected an array of rows");
  if (rows.size() != static_cast<std::size_t>(b.size()))
    throw DimensionMismatch("A has " + std::to_string(rows.size()) + " rows but |b| = " + std::to_string(b.size()));
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), c.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Eigen::VectorXd row = detail::vector_from_json(rows[r], "A[" + std::to_string(r) + "]");
    if (row.size() != c.size())
      throw DimensionMismatch("A[" + std::to_string(r) + "] has " + std::to_string(row.size()) +
                              " entries but |c| = " + std::to_string(c.size()));
    A.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return BlpInstance(doc["name"].get<std::string>(), c, A, b);
}

}  // namespace qcg
