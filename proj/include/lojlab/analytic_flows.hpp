#pragma once

// Finite-dimensional gradient flows of functions satisfying a gradient
// Lojasiewicz inequality |F(x) - F(0)|^{1+tau} <= |grad F(x)|^2 near 0.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lojlab/errors.hpp"
#include "lojlab/sequence_certificates.hpp"

namespace lojlab::flows {

using Vector = std::vector<double>;

struct GradientProblem {
  std::string name;
  std::size_t dimension = 1;
  std::function<double(std::span<const double>)> F;
  std::function<void(std::span<const double>, std::span<double>)> grad;
  /// F(0).
  double critical_value = 0.0;
  double tau = 0.5;
  /// Radius of the ball on which the Lojasiewicz inequality holds.
  double ball_radius = 1.0;

  double value(std::span<const double> x) const { return F(x); }
  Vector gradient(std::span<const double> x) const;
};

/// The problem for -F (time-reversed flows).
GradientProblem negated(const GradientProblem& problem);

/// quartic1d, sextic1d, quartic2d (x^4 + y^4), aniso2d (x^4 + y^6) and
/// saddle2d (x^2 - y^2, whose flow lines cross the critical level).
std::vector<GradientProblem> builtin_problems();

/// Throws InvalidInputError for unknown names.
GradientProblem builtin_problem(std::string_view name);

/// sum_i a_i x_i^2 + b_i x_i^4 with random a_i, b_i; tau = 1/2 on the unit ball.
GradientProblem random_quadratic_quartic(std::size_t dimension, std::mt19937_64& rng);

struct SpotCheckResult {
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// max over samples of |F - F0|^{1+tau} / |grad F|^2.
  double worst_ratio = 0.0;
};

/// Samples the Lojasiewicz inequality uniformly in the validity ball.
SpotCheckResult lojasiewicz_spot_check(const GradientProblem& problem, std::size_t samples,
                                       std::mt19937_64& rng);

struct GradientCheckResult {
  std::size_t points = 0;
  double max_rel_error = 0.0;
};

/// Compares grad F with central differences of F (step 1e-4 |x|), norm-wise.
GradientCheckResult gradient_consistency(const GradientProblem& problem, std::size_t points,
                                         std::mt19937_64& rng);

/// Time-stamped polyline of a gradient flow. Samples are integrator step ends
/// plus dense-output samples at the mark times.
struct Trajectory {
  std::size_t dimension = 1;
  std::vector<double> times;
  std::vector<Vector> points;
  std::vector<double> F_values;
  /// step_lengths[i] = |points[i+1] - points[i]|.
  std::vector<double> step_lengths;
  /// Sample indices at t = t0, t0 + 1, t0 + 2, ... up to the mark cap.
  std::vector<std::size_t> unit_marks;
  /// Sample indices at t0 + cap * 2^k beyond the unit-mark cap.
  std::vector<std::size_t> block_marks;
  double critical_value = 0.0;
  double tol = 1e-10;
  bool exited_ball = false;

  std::size_t size() const noexcept { return times.size(); }
  double start_time() const { return times.front(); }
  double end_time() const { return times.back(); }
  double length() const;
  /// Chordal length between two sample indices.
  double length_between(std::size_t from, std::size_t to) const;
};

/// Step-size collapse during integration; carries the valid prefix.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, Trajectory partial)
      : Error(ErrorKind::Stiffness, what), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

struct IntegrateOptions {
  std::size_t unit_mark_cap = 10000;
};

/// Integrates gamma' = -grad F(gamma) from x0 over [0, t_end] with adaptive
/// Dormand-Prince 5(4) stepping. tol bounds the local error per step relative
/// to max(|x|, |x0|). Stops early (exited_ball) if the flow leaves the
/// validity ball; the exit point is located on the dense output.
Trajectory integrate(const GradientProblem& problem, std::span<const double> x0, double t_end,
                     double tol, const IntegrateOptions& options = {});

/// State at time t (inside the trajectory) by re-integration from the
/// preceding sample.
Vector state_at(const GradientProblem& problem, const Trajectory& traj, double t);

/// Keeps samples up to and including unit mark m.
Trajectory truncated_at_mark(const Trajectory& traj, std::size_t m);

/// Reversed parameterization of a trajectory that ends on a unit mark, as a
/// flow line of -F re-based to start at t = 0.
Trajectory time_reversed(const Trajectory& traj);

struct SqrtSumResult {
  /// sum over integer marks of [F(i) - F(i+1)]^{1/2}; when block marks are
  /// present their contribution is replaced by the Cauchy-Schwarz bound
  /// sqrt(m * drop) per block of m unit segments, so sum is an upper bound.
  double sum = 0.0;
  double block_bound = 0.0;
  std::size_t segments = 0;
  bool segments_ok = true;
  /// max over unit segments of length - sqrt(drop).
  double worst_excess = 0.0;
  /// Set when the trajectory is shorter than one unit of time.
  bool empty_warning = false;
};

SqrtSumResult sqrt_segment_sum(const Trajectory& traj);

/// f(t) <= (f(0)^{-tau} + tau t)^{-1/tau} at every sample, with f = F - F0.
/// Throws EnvelopeNotApplicableError when f <= 0 somewhere.
bool decay_envelope_check(const Trajectory& traj, double tau);

enum class BoundCase { Above, Below, Crossing };
const char* to_string(BoundCase c);

struct EffectiveBoundReport {
  BoundCase case_tag = BoundCase::Above;
  double t1 = 0.0;
  double t2 = 0.0;
  std::optional<double> crossing_time;
  double length = 0.0;
  double sqrt_sum = 0.0;
  double bound_value = 0.0;
  bool holds = false;
  double c = 0.0;
  double alpha = 0.0;
  /// Every monotone part passed the discrete hypothesis with C = 1 and the
  /// square-root sum of each part is within its share of the bound.
  bool certificates_ok = true;
  std::vector<seq::Certificate> parts;
};

/// Three-case length bound over [t1, t2] where t1 is the trajectory start and
/// t2 its last unit mark. Throws PreconditionError unless both endpoints lie
/// in B_{1/4} with |F - F0| < epsilon.
EffectiveBoundReport effective_bound(const GradientProblem& problem, const Trajectory& traj,
                                     double epsilon);

/// Largest unit mark m whose state satisfies the endpoint conditions of
/// effective_bound, if any.
std::optional<std::size_t> last_admissible_mark(const Trajectory& traj, double epsilon);

/// Radius rho such that |F - F0| < epsilon/2 on sampled points of B_rho.
double epsilon_ball_radius(const GradientProblem& problem, double epsilon, std::mt19937_64& rng);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace lojlab::flows
