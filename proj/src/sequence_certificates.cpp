#include "lojlab/sequence_certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lojlab/errors.hpp"

namespace lojlab::seq {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double sqrt_diff_sum_of(std::span<const double> x) {
  CompensatedSum s;
  for (std::size_t j = 0; j + 1 < x.size(); ++j) s.add(std::sqrt(x[j] - x[j + 1]));
  return s.value();
}

}  // namespace

MonotoneSequence::MonotoneSequence(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidInputError("sequence is empty");
  for (std::size_t j = 0; j < values_.size(); ++j) {
    const double v = values_[j];
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw InvalidInputError("sequence value at index " + std::to_string(j + 1) +
                              " is not a positive finite number");
    }
    if (j > 0 && v > values_[j - 1]) {
      throw InvalidInputError("sequence increases at index " + std::to_string(j + 1));
    }
  }
}

MonotoneSequence MonotoneSequence::truncated(std::size_t n) const {
  if (n == 0 || n > values_.size()) throw InvalidInputError("truncation length out of range");
  return MonotoneSequence(std::vector<double>(values_.begin(), values_.begin() + static_cast<long>(n)));
}

void validate_parameters(double C, double tau) {
  if (!(C >= 1.0) || !std::isfinite(C)) throw ParameterError("C must be a finite value >= 1");
  if (!(tau > 1.0 / 3.0 && tau < 1.0)) throw ParameterError("tau must lie in (1/3, 1)");
}

bool admissible_pair(double xj, double xnext, double C, double tau) {
  const double lhs = std::pow(xnext, 1.0 + tau);
  const double rhs = C * (xj - xnext);
  // The difference x_j - x_{j+1} carries rounding noise of order ulp(x_j), so
  // the tolerance is scaled by C x_j, which also dominates both sides.
  return lhs <= rhs + kAdmissibleRelTol * std::max(lhs, C * xj);
}

DiscreteHypothesisReport check_hypothesis(const MonotoneSequence& seq, double C, double tau) {
  validate_parameters(C, tau);
  DiscreteHypothesisReport report;
  report.C = C;
  report.tau = tau;
  const auto x = seq.values();
  report.per_index_ok.reserve(x.size() > 0 ? x.size() - 1 : 0);
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    const bool ok = admissible_pair(x[j], x[j + 1], C, tau);
    report.per_index_ok.push_back(ok);
    if (!ok && !report.first_violation) report.first_violation = j + 1;
  }
  report.sqrt_diff_sum = sqrt_diff_sum_of(x);
  return report;
}

double ConstructiveBound::bound(double x1) const { return c * std::pow(x1, alpha); }

ConstructiveBound constructive_bound(double C, double tau) {
  validate_parameters(C, tau);
  ConstructiveBound out;
  out.C = C;
  out.tau = tau;
  out.delta = (1.0 / tau - 1.0) / 3.0;
  out.alpha = tau * out.delta / 2.0;

  // T = sum_{j>=1} f(j), f(x) = (1 + x/a)^{-p}: direct summation up to M,
  // Euler-Maclaurin remainder beyond. f is completely monotone, so the
  // remainder after the f''' term is bounded by the f^(5) term.
  const double a = 12.0 * C;
  const double p = 1.0 + out.delta;
  const auto M = static_cast<std::size_t>(std::max(1.0e4, 100.0 * a));
  auto f = [&](double x) { return std::pow(1.0 + x / a, -p); };
  auto deriv = [&](int order, double x) {
    double coef = 1.0;
    for (int i = 0; i < order; ++i) coef *= -(p + i) / a;
    return coef * std::pow(1.0 + x / a, -p - order);
  };

  CompensatedSum direct;
  for (std::size_t j = M; j >= 1; --j) direct.add(f(static_cast<double>(j)));
  const double Md = static_cast<double>(M);
  const double integral = a / out.delta * std::pow(1.0 + Md / a, -out.delta);
  const double remainder = integral - f(Md) / 2.0 - deriv(1, Md) / 12.0 + deriv(3, Md) / 720.0;
  out.tail_sum = direct.value() + remainder;
  out.tail_error = 2.0 * std::abs(deriv(5, Md)) / 30240.0 +
                   8.0 * std::numeric_limits<double>::epsilon() * out.tail_sum;

  const double tail_upper = out.tail_sum + out.tail_error;
  // S^2 < (2/delta) * (x_1 + 2 (12C)^delta x_1^{tau delta} T), and x_1 <= x_1^{tau delta}.
  const double inner = 1.0 + 2.0 * std::pow(a, out.delta) * tail_upper;
  out.c = std::sqrt(2.0 / out.delta * inner) * (1.0 + 1e-12);
  return out;
}

Certificate certify(const MonotoneSequence& seq, double C, double tau, bool terminal_zero) {
  if (seq.front() > 1.0) throw InvalidInputError("certificate input requires x_1 <= 1");
  Certificate cert;
  cert.hypothesis = check_hypothesis(seq, C, tau);
  cert.constants = constructive_bound(C, tau);
  cert.terminal_zero = terminal_zero;
  cert.sum = cert.hypothesis.sqrt_diff_sum;
  if (terminal_zero) cert.sum += std::sqrt(seq.values().back());
  cert.bound = cert.constants.bound(seq.front());
  cert.holds = cert.hypothesis.ok() && cert.sum <= cert.bound;
  return cert;
}

double extremal_successor(double x, double C, double tau) {
  if (!(x > 0.0) || !std::isfinite(x)) throw InvalidInputError("extremal successor needs x > 0");
  const double p = 1.0 + tau;
  // g(d) = (x - d)^p - C d is convex and decreasing on [0, x]; Newton from the
  // left increases monotonically to the root.
  double d = 0.0;
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    const double t = x - d;
    const double g = std::pow(t, p) - C * d;
    const double dg = -p * std::pow(t, p - 1.0) - C;
    const double next = std::clamp(d - g / dg, 0.0, x);
    if (std::abs(next - d) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(d, 1e-300)) {
      d = next;
      converged = true;
      break;
    }
    d = next;
  }
  if (!converged) throw NumericError("extremal root-finder did not converge");

  // Snap to the largest representable t with t^p <= C (x - t) as evaluated.
  auto ok = [&](double t) { return std::pow(t, p) <= C * (x - t); };
  double t = x - d;
  for (int i = 0; i < 64 && !ok(t); ++i) t = std::nextafter(t, 0.0);
  for (int i = 0; i < 64; ++i) {
    const double up = std::nextafter(t, x);
    if (up >= x || !ok(up)) break;
    t = up;
  }
  if (!(t > 0.0) || !ok(t)) throw NumericError("extremal root-finder lost the bracket");
  return t;
}

MonotoneSequence extremal_sequence(double C, double tau, double x1, std::size_t N) {
  if (!(x1 > 0.0 && x1 <= 1.0)) throw InvalidInputError("x1 must lie in (0, 1]");
  if (N < 1) throw InvalidInputError("N must be at least 1");
  if (!(C >= 1.0) || !(tau > 0.0 && tau <= 1.0)) throw ParameterError("need C >= 1, tau in (0, 1]");
  std::vector<double> x;
  x.reserve(N + 1);
  x.push_back(x1);
  for (std::size_t j = 0; j < N; ++j) x.push_back(extremal_successor(x.back(), C, tau));
  return MonotoneSequence(std::move(x));
}

MonotoneSequence random_admissible(double C, double tau, std::size_t N, std::mt19937_64& rng) {
  validate_parameters(C, tau);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x;
  x.reserve(N + 1);
  x.push_back(1.0 - unit(rng));  // (0, 1]
  const double spread = 1.0 - unit(rng);
  for (std::size_t j = 0; j < N; ++j) {
    const double star = extremal_successor(x.back(), C, tau);
    const double next = star * (1.0 - spread * unit(rng));
    if (!(next > 1e-250)) break;
    x.push_back(next);
  }
  return MonotoneSequence(std::move(x));
}

ElemeResult check_eleme(double a, double b, double C, double tau) {
  if (!(b > 0.0) || !(b < a) || !(a <= 1.0)) {
    throw InvalidInputError("check_eleme requires 0 < b < a <= 1");
  }
  if (!(C >= 1.0) || !(tau > 1.0 / 3.0 && tau <= 1.0)) {
    throw ParameterError("check_eleme requires C >= 1 and tau in (1/3, 1]");
  }
  ElemeResult r;
  r.hypothesis_holds = std::pow(b, 1.0 + tau) <= C * (a - b);
  r.gap_exceeds = std::pow(b, -tau) - std::pow(a, -tau) > 1.0 / (12.0 * C);
  return r;
}

MonotoneSequence parse_sequence(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw InvalidInputError("empty sequence input");
  std::vector<double> values;
  if (text[first] == '[') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInputError(std::string("malformed JSON sequence: ") + e.what());
    }
    if (!j.is_array()) throw InvalidInputError("JSON sequence must be an array");
    for (const auto& v : j) {
      if (!v.is_number()) throw InvalidInputError("JSON sequence entries must be numbers");
      values.push_back(v.get<double>());
    }
  } else {
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        throw InvalidInputError("not a number: '" + token + "'");
      }
      if (used != token.size()) throw InvalidInputError("not a number: '" + token + "'");
      values.push_back(v);
    }
  }
  return MonotoneSequence(std::move(values));
}

}  // namespace lojlab::seq
