#pragma once

// Discrete Lojasiewicz summability: hypothesis checks, constructive
// (c, alpha) extraction and extremal/random admissible sequence generators.
//
// A sequence x_1 >= x_2 >= ... > 0 is admissible for (C, tau) when
//   x_{j+1}^{1+tau} <= C (x_j - x_{j+1})   for every j,
// and for such sequences with x_1 <= 1 the square-root difference sum
//   S = sum_j |x_j - x_{j+1}|^{1/2}
// is bounded by c * x_1^alpha with constants depending only on (C, tau).

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace lojlab::seq {

/// Relative tolerance for near-equality in the admissibility inequality.
inline constexpr double kAdmissibleRelTol = 1e-12;

/// Positive, non-increasing finite sequence x_1..x_N (stored 0-based).
class MonotoneSequence {
 public:
  /// Throws InvalidInputError unless values are non-empty, finite, strictly
  /// positive and non-increasing.
  explicit MonotoneSequence(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double front() const noexcept { return values_.front(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// First n entries (n >= 1).
  MonotoneSequence truncated(std::size_t n) const;

 private:
  std::vector<double> values_;
};

struct DiscreteHypothesisReport {
  double C = 1.0;
  double tau = 0.5;
  /// per_index_ok[j] refers to the pair (x_{j+1}, x_{j+2}) in 1-based terms.
  std::vector<bool> per_index_ok;
  /// 1-based index j of the first pair (x_j, x_{j+1}) that fails.
  std::optional<std::size_t> first_violation;
  double sqrt_diff_sum = 0.0;

  bool ok() const noexcept { return !first_violation.has_value(); }
};

struct ConstructiveBound {
  double C = 1.0;
  double tau = 0.5;
  double c = 0.0;
  double alpha = 0.0;
  /// 1/tau = 1 + 3 delta.
  double delta = 0.0;
  /// sum_{j>=1} (1 + j/(12C))^{-1-delta}, accurate to 1e-10 absolute.
  double tail_sum = 0.0;
  /// Rigorous upper bound on the truncation error of tail_sum.
  double tail_error = 0.0;

  double bound(double x1) const;
};

/// Result of applying a ConstructiveBound to one sequence.
struct Certificate {
  DiscreteHypothesisReport hypothesis;
  ConstructiveBound constants;
  /// sqrt_diff_sum, plus sqrt(x_N) when the sequence is closed off by a
  /// terminal zero (the crossing point in the split cases).
  double sum = 0.0;
  double bound = 0.0;
  bool terminal_zero = false;
  bool holds = false;
};

/// Throws ParameterError unless C >= 1 and tau in (1/3, 1).
void validate_parameters(double C, double tau);

DiscreteHypothesisReport check_hypothesis(const MonotoneSequence& seq, double C, double tau);

/// Tolerant form of the admissibility inequality for one pair.
bool admissible_pair(double xj, double xnext, double C, double tau);

ConstructiveBound constructive_bound(double C, double tau);

/// Checks the hypothesis and compares the square-root sum with the bound.
/// Requires x_1 <= 1 (InvalidInputError otherwise).
Certificate certify(const MonotoneSequence& seq, double C, double tau, bool terminal_zero = false);

/// Unique positive root t of t^{1+tau} + C t = C x, as the step d = x - t.
/// Returned as x - d so that the gap is resolved to full precision.
double extremal_successor(double x, double C, double tau);

/// Sequence saturating the hypothesis with equality; N + 1 values x_1..x_{N+1}.
MonotoneSequence extremal_sequence(double C, double tau, double x1, std::size_t N);

/// Random admissible sequence of N + 1 values. x_1 is uniform in (0, 1]; each
/// successor is drawn from (0, x*] where x* is the extremal successor, biased
/// towards x* by a per-sequence spread parameter so near-extremal and
/// fast-decaying sequences are both produced. Stops early before underflow.
MonotoneSequence random_admissible(double C, double tau, std::size_t N, std::mt19937_64& rng);

struct ElemeResult {
  bool hypothesis_holds = false;
  bool gap_exceeds = false;
};

/// Two-point calculus lemma: b^{1+tau} <= C (a - b) implies
/// b^{-tau} - a^{-tau} > 1/(12 C). Requires 0 < b < a <= 1, C >= 1 and
/// tau in (1/3, 1].
ElemeResult check_eleme(double a, double b, double C, double tau);

/// Parses newline/whitespace separated decimals or a JSON array of numbers.
MonotoneSequence parse_sequence(const std::string& text);

}  // namespace lojlab::seq
