#include "lojlab/analytic_flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/numeric/odeint.hpp>

namespace lojlab::flows {

namespace odeint = boost::numeric::odeint;

namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

GradientProblem monomial_sum(std::string name, std::vector<int> powers, double tau, double radius) {
  GradientProblem p;
  p.name = std::move(name);
  p.dimension = powers.size();
  p.tau = tau;
  p.ball_radius = radius;
  p.F = [powers](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < powers.size(); ++i) s += std::pow(x[i], powers[i]);
    return s;
  };
  p.grad = [powers](std::span<const double> x, std::span<double> g) {
    for (std::size_t i = 0; i < powers.size(); ++i) {
      g[i] = powers[i] * std::pow(x[i], powers[i] - 1);
    }
  };
  return p;
}

struct GradientSystem {
  const GradientProblem* problem;
  void operator()(const Vector& x, Vector& dxdt, double /*t*/) const {
    problem->grad(x, dxdt);
    for (double& v : dxdt) v = -v;
  }
};

using Stepper = odeint::runge_kutta_dopri5<Vector>;

class Recorder {
 public:
  Recorder(const GradientProblem& problem, Trajectory& traj) : problem_(problem), traj_(traj) {}

  void push(double t, const Vector& x) {
    if (!traj_.times.empty()) {
      if (t <= traj_.times.back()) return;
      traj_.step_lengths.push_back(distance(traj_.points.back(), x));
    }
    traj_.times.push_back(t);
    traj_.points.push_back(x);
    traj_.F_values.push_back(problem_.value(x));
  }

 private:
  const GradientProblem& problem_;
  Trajectory& traj_;
};

// Mark times t0 + 0, 1, ..., cap followed by t0 + cap * 2^k.
class MarkSchedule {
 public:
  MarkSchedule(double t0, double t_end, std::size_t cap) : t0_(t0), t_end_(t_end), cap_(cap) {}

  bool has_next() const { return next_time() <= t_end_ + 1e-12 * std::max(1.0, std::abs(t_end_)); }
  double next_time() const {
    if (index_ <= cap_) return t0_ + static_cast<double>(index_);
    return t0_ + static_cast<double>(cap_) * std::ldexp(1.0, static_cast<int>(index_ - cap_));
  }
  bool next_is_unit() const { return index_ <= cap_; }
  void advance() { ++index_; }

 private:
  double t0_;
  double t_end_;
  std::size_t cap_;
  std::size_t index_ = 0;
};

}  // namespace

Vector GradientProblem::gradient(std::span<const double> x) const {
  Vector g(dimension);
  grad(x, g);
  return g;
}

GradientProblem negated(const GradientProblem& problem) {
  GradientProblem p = problem;
  p.name = "neg_" + problem.name;
  auto F = problem.F;
  auto grad = problem.grad;
  p.F = [F](std::span<const double> x) { return -F(x); };
  p.grad = [grad](std::span<const double> x, std::span<double> g) {
    grad(x, g);
    for (double& v : g) v = -v;
  };
  p.critical_value = -problem.critical_value;
  return p;
}

std::vector<GradientProblem> builtin_problems() {
  std::vector<GradientProblem> out;
  // |x|^{2p} has |F|^{1+tau} = |x|^{2p(1+tau)} <= (2p)^2 |x|^{4p-2} for tau = 1 - 1/p.
  out.push_back(monomial_sum("quartic1d", {4}, 0.5, 2.0));
  out.push_back(monomial_sum("sextic1d", {6}, 2.0 / 3.0, 2.0));
  out.push_back(monomial_sum("quartic2d", {4, 4}, 0.5, 2.0));
  // The y^6 direction forces tau = 2/3; the x^4 direction needs |x| <= 1.
  out.push_back(monomial_sum("aniso2d", {4, 6}, 2.0 / 3.0, 1.0));

  GradientProblem saddle;
  saddle.name = "saddle2d";
  saddle.dimension = 2;
  saddle.tau = 0.5;
  saddle.ball_radius = 2.0;
  saddle.F = [](std::span<const double> x) { return x[0] * x[0] - x[1] * x[1]; };
  saddle.grad = [](std::span<const double> x, std::span<double> g) {
    g[0] = 2.0 * x[0];
    g[1] = -2.0 * x[1];
  };
  out.push_back(std::move(saddle));
  return out;
}

GradientProblem builtin_problem(std::string_view name) {
  for (auto& p : builtin_problems()) {
    if (p.name == name) return p;
  }
  throw InvalidInputError("unknown problem '" + std::string(name) + "'");
}

GradientProblem random_quadratic_quartic(std::size_t dimension, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> quad(0.1, 1.0);
  std::uniform_real_distribution<double> quart(0.5, 1.5);
  std::vector<double> a(dimension), b(dimension);
  for (std::size_t i = 0; i < dimension; ++i) {
    a[i] = quad(rng);
    b[i] = quart(rng);
  }
  GradientProblem p;
  p.name = "quadquartic" + std::to_string(dimension) + "d";
  p.dimension = dimension;
  p.tau = 0.5;
  p.ball_radius = 1.0;
  p.F = [a, b](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double x2 = x[i] * x[i];
      s += a[i] * x2 + b[i] * x2 * x2;
    }
    return s;
  };
  p.grad = [a, b](std::span<const double> x, std::span<double> g) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      g[i] = 2.0 * a[i] * x[i] + 4.0 * b[i] * x[i] * x[i] * x[i];
    }
  };
  return p;
}

namespace {

Vector uniform_in_ball(std::size_t n, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector x(n);
  double r2 = 0.0;
  do {
    r2 = 0.0;
    for (double& v : x) {
      v = gauss(rng);
      r2 += v * v;
    }
  } while (r2 == 0.0);
  const double scale = radius * std::pow(unit(rng), 1.0 / static_cast<double>(n)) / std::sqrt(r2);
  for (double& v : x) v *= scale;
  return x;
}

}  // namespace

SpotCheckResult lojasiewicz_spot_check(const GradientProblem& problem, std::size_t samples,
                                       std::mt19937_64& rng) {
  SpotCheckResult r;
  Vector g(problem.dimension);
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector x = uniform_in_ball(problem.dimension, problem.ball_radius, rng);
    problem.grad(x, g);
    const double lhs = std::pow(std::abs(problem.value(x) - problem.critical_value), 1.0 + problem.tau);
    const double rhs = norm(g) * norm(g);
    ++r.samples;
    if (lhs > rhs) ++r.violations;
    if (rhs > 0.0) r.worst_ratio = std::max(r.worst_ratio, lhs / rhs);
  }
  return r;
}

GradientCheckResult gradient_consistency(const GradientProblem& problem, std::size_t points,
                                         std::mt19937_64& rng) {
  GradientCheckResult r;
  Vector g(problem.dimension), fd(problem.dimension);
  for (std::size_t s = 0; s < points; ++s) {
    Vector x = uniform_in_ball(problem.dimension, problem.ball_radius, rng);
    const double step = 1e-4 * norm(x);
    if (step == 0.0) continue;
    problem.grad(x, g);
    for (std::size_t i = 0; i < problem.dimension; ++i) {
      const double keep = x[i];
      x[i] = keep + step;
      const double fp = problem.value(x);
      x[i] = keep - step;
      const double fm = problem.value(x);
      x[i] = keep;
      fd[i] = (fp - fm) / (2.0 * step);
    }
    const double gn = norm(g);
    if (gn == 0.0) continue;
    ++r.points;
    r.max_rel_error = std::max(r.max_rel_error, distance(g, fd) / gn);
  }
  return r;
}

double Trajectory::length() const {
  double s = 0.0;
  for (double l : step_lengths) s += l;
  return s;
}

double Trajectory::length_between(std::size_t from, std::size_t to) const {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += step_lengths[i];
  return s;
}

Trajectory integrate(const GradientProblem& problem, std::span<const double> x0, double t_end,
                     double tol, const IntegrateOptions& options) {
  if (x0.size() != problem.dimension) throw InvalidInputError("x0 has the wrong dimension");
  if (!(tol > 0.0)) throw InvalidInputError("tol must be positive");
  if (!(t_end >= 0.0)) throw InvalidInputError("t_end must be non-negative");
  if (norm(x0) > problem.ball_radius) throw PreconditionError("x0 lies outside the validity ball");

  Trajectory traj;
  traj.dimension = problem.dimension;
  traj.critical_value = problem.critical_value;
  traj.tol = tol;
  Recorder rec(problem, traj);
  MarkSchedule marks(0.0, t_end, options.unit_mark_cap);

  Vector x(x0.begin(), x0.end());
  auto record_mark = [&](double t, const Vector& state) {
    rec.push(t, state);
    auto& list = marks.next_is_unit() ? traj.unit_marks : traj.block_marks;
    list.push_back(traj.size() - 1);
    marks.advance();
  };

  const Vector g0 = problem.gradient(x);
  if (max_abs(g0) == 0.0) {
    while (marks.has_next()) record_mark(marks.next_time(), x);
    if (traj.end_time() < t_end) rec.push(t_end, x);
    return traj;
  }

  const double scale = max_abs(x);
  auto stepper = odeint::make_dense_output(tol * scale, tol, Stepper());
  const GradientSystem system{&problem};
  const double dt0 = std::min(1e-3, 0.1 * scale / max_abs(g0));
  stepper.initialize(x, 0.0, dt0);
  record_mark(0.0, x);

  Vector probe(problem.dimension);
  while (stepper.current_time() < t_end) {
    std::pair<double, double> span;
    try {
      span = stepper.do_step(system);
    } catch (const odeint::step_adjustment_error& e) {
      throw StiffnessError(std::string("step adjustment failed: ") + e.what(), traj);
    }
    const auto [t_prev, t_cur] = span;
    if (!(t_cur - t_prev > 1e-14 * std::max(1.0, std::abs(t_cur)))) {
      throw StiffnessError("step size underflow at t = " + std::to_string(t_prev), traj);
    }
    const double t_stop = std::min(t_cur, t_end);

    // Exit from the validity ball: bisect on the dense output.
    stepper.calc_state(t_stop, probe);
    double t_limit = t_stop;
    if (norm(probe) > problem.ball_radius) {
      double lo = t_prev, hi = t_stop;
      for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, probe);
        (norm(probe) > problem.ball_radius ? hi : lo) = mid;
      }
      t_limit = lo;
      traj.exited_ball = true;
    }

    while (marks.has_next() && marks.next_time() <= t_limit) {
      stepper.calc_state(marks.next_time(), probe);
      record_mark(marks.next_time(), probe);
    }
    stepper.calc_state(t_limit, probe);
    rec.push(t_limit, probe);
    if (traj.exited_ball) break;
    for (double v : probe) {
      if (!std::isfinite(v)) throw StiffnessError("non-finite state", traj);
    }
  }
  return traj;
}

Vector state_at(const GradientProblem& problem, const Trajectory& traj, double t) {
  if (t < traj.start_time() || t > traj.end_time()) throw InvalidInputError("time outside trajectory");
  auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  const auto i = static_cast<std::size_t>(std::distance(traj.times.begin(), it)) - 1;
  Vector x = traj.points[i];
  const double dt = t - traj.times[i];
  if (dt <= 0.0) return x;
  const double scale = std::max(max_abs(x), 1e-300);
  odeint::integrate_adaptive(odeint::make_controlled(traj.tol * scale, traj.tol, Stepper()),
                             GradientSystem{&problem}, x, 0.0, dt, dt / 16.0);
  return x;
}

Trajectory truncated_at_mark(const Trajectory& traj, std::size_t m) {
  if (m >= traj.unit_marks.size()) throw InvalidInputError("mark index out of range");
  const std::size_t last = traj.unit_marks[m];
  Trajectory out;
  out.dimension = traj.dimension;
  out.critical_value = traj.critical_value;
  out.tol = traj.tol;
  out.times.assign(traj.times.begin(), traj.times.begin() + static_cast<long>(last + 1));
  out.points.assign(traj.points.begin(), traj.points.begin() + static_cast<long>(last + 1));
  out.F_values.assign(traj.F_values.begin(), traj.F_values.begin() + static_cast<long>(last + 1));
  out.step_lengths.assign(traj.step_lengths.begin(), traj.step_lengths.begin() + static_cast<long>(last));
  out.unit_marks.assign(traj.unit_marks.begin(), traj.unit_marks.begin() + static_cast<long>(m + 1));
  return out;
}

Trajectory time_reversed(const Trajectory& traj) {
  if (traj.unit_marks.empty() || traj.unit_marks.back() != traj.size() - 1 || !traj.block_marks.empty()) {
    throw PreconditionError("time reversal needs a trajectory ending on its last unit mark");
  }
  const std::size_t n = traj.size();
  const double t_last = traj.end_time();
  const double t_first = traj.start_time();
  Trajectory out;
  out.dimension = traj.dimension;
  out.critical_value = -traj.critical_value;
  out.tol = traj.tol;
  for (std::size_t i = n; i-- > 0;) {
    out.times.push_back(t_last - traj.times[i]);
    out.points.push_back(traj.points[i]);
    out.F_values.push_back(-traj.F_values[i]);
  }
  out.step_lengths.assign(traj.step_lengths.rbegin(), traj.step_lengths.rend());
  for (std::size_t m = traj.unit_marks.size(); m-- > 0;) {
    out.unit_marks.push_back(n - 1 - traj.unit_marks[m]);
  }
  // The re-based marks sit at integer times only when the span is integral.
  const double span = t_last - t_first;
  if (std::abs(span - std::round(span)) > 1e-9) {
    throw PreconditionError("time reversal needs an integral time span");
  }
  return out;
}

SqrtSumResult sqrt_segment_sum(const Trajectory& traj) {
  SqrtSumResult r;
  const auto& marks = traj.unit_marks;
  if (marks.size() < 2) {
    r.empty_warning = true;
    return r;
  }
  for (std::size_t m = 0; m + 1 < marks.size(); ++m) {
    const std::size_t a = marks[m], b = marks[m + 1];
    const double drop = std::max(0.0, traj.F_values[a] - traj.F_values[b]);
    const double root = std::sqrt(drop);
    r.sum += root;
    ++r.segments;
    const double len = traj.length_between(a, b);
    double scale = 0.0;
    for (std::size_t i = a; i <= b; ++i) scale = std::max(scale, max_abs(traj.points[i]));
    const double excess = len - root;
    r.worst_excess = std::max(r.worst_excess, excess);
    if (excess > 10.0 * traj.tol * scale) r.segments_ok = false;
  }
  // Blocks of m unit segments beyond the cap: sum sqrt(drop_i) <= sqrt(m * sum drop_i).
  std::size_t prev = marks.back();
  double prev_t = traj.times[prev];
  for (std::size_t idx : traj.block_marks) {
    const double m = std::ceil(traj.times[idx] - prev_t);
    const double drop = std::max(0.0, traj.F_values[prev] - traj.F_values[idx]);
    r.block_bound += std::sqrt(m * drop);
    prev = idx;
    prev_t = traj.times[idx];
  }
  r.sum += r.block_bound;
  return r;
}

bool decay_envelope_check(const Trajectory& traj, double tau) {
  const double f0 = traj.F_values.front() - traj.critical_value;
  bool ok = true;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double f = traj.F_values[i] - traj.critical_value;
    if (!(f > 0.0)) {
      throw EnvelopeNotApplicableError("F reaches the critical value at t = " + std::to_string(traj.times[i]));
    }
    const double t = traj.times[i] - traj.start_time();
    const double envelope = std::pow(std::pow(f0, -tau) + tau * t, -1.0 / tau);
    if (f * (1.0 - 10.0 * traj.tol) > envelope) ok = false;
  }
  return ok;
}

const char* to_string(BoundCase c) {
  switch (c) {
    case BoundCase::Above: return "above";
    case BoundCase::Below: return "below";
    case BoundCase::Crossing: return "crossing";
  }
  return "unknown";
}

namespace {

// Cumulative minimum absorbs integrator noise of size ~tol on flat stretches.
std::vector<double> monotone_envelope(std::vector<double> v) {
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::min(v[i], v[i - 1]);
  return v;
}

// Certifies a positive non-increasing part, dropping trailing zeros.
std::optional<seq::Certificate> certify_part(std::vector<double> values, double tau, bool terminal_zero) {
  values = monotone_envelope(std::move(values));
  while (!values.empty() && !(values.back() > 0.0)) {
    values.pop_back();
    terminal_zero = true;
  }
  if (values.empty()) return std::nullopt;
  return seq::certify(seq::MonotoneSequence(std::move(values)), 1.0, tau, terminal_zero);
}

}  // namespace

std::optional<std::size_t> last_admissible_mark(const Trajectory& traj, double epsilon) {
  for (std::size_t m = traj.unit_marks.size(); m-- > 0;) {
    const std::size_t i = traj.unit_marks[m];
    if (norm(traj.points[i]) < 0.25 && std::abs(traj.F_values[i] - traj.critical_value) < epsilon) return m;
  }
  return std::nullopt;
}

EffectiveBoundReport effective_bound(const GradientProblem& problem, const Trajectory& traj,
                                     double epsilon) {
  if (traj.unit_marks.empty()) throw PreconditionError("trajectory has no unit marks");
  const double F0 = problem.critical_value;
  const std::size_t first = traj.unit_marks.front();
  const std::size_t last = traj.unit_marks.back();
  for (std::size_t i : {first, last}) {
    if (!(norm(traj.points[i]) < 0.25)) throw PreconditionError("endpoint outside B_{1/4}");
    if (!(std::abs(traj.F_values[i] - F0) < epsilon)) throw PreconditionError("|F - F0| >= epsilon at an endpoint");
  }

  EffectiveBoundReport r;
  r.t1 = traj.times[first];
  r.t2 = traj.times[last];
  r.length = traj.length_between(first, last);
  const seq::ConstructiveBound cb = seq::constructive_bound(1.0, problem.tau);
  r.c = cb.c;
  r.alpha = cb.alpha;

  std::vector<double> f;  // F - F0 at unit marks
  for (std::size_t i : traj.unit_marks) f.push_back(traj.F_values[i] - F0);
  for (std::size_t m = 0; m + 1 < f.size(); ++m) r.sqrt_sum += std::sqrt(std::max(0.0, f[m] - f[m + 1]));

  const double f1 = f.front(), f2 = f.back();
  if (f2 >= 0.0) {
    r.case_tag = BoundCase::Above;
    if (auto cert = certify_part(f, problem.tau, false)) r.parts.push_back(*cert);
    r.bound_value = cb.c * std::pow(std::abs(f1), cb.alpha);
  } else if (f1 <= 0.0) {
    r.case_tag = BoundCase::Below;
    std::vector<double> rev;
    for (std::size_t m = f.size(); m-- > 0;) rev.push_back(-f[m]);
    if (auto cert = certify_part(rev, problem.tau, false)) r.parts.push_back(*cert);
    r.bound_value = cb.c * std::pow(std::abs(f2), cb.alpha);
  } else {
    r.case_tag = BoundCase::Crossing;
    std::size_t split = 0;
    while (f[split + 1] > 0.0) ++split;
    // Crossing between marks split and split + 1, located on the dense output.
    double lo = traj.times[traj.unit_marks[split]], hi = traj.times[traj.unit_marks[split + 1]];
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Vector x = state_at(problem, traj, mid);
      (problem.value(x) - F0 > 0.0 ? lo : hi) = mid;
    }
    r.crossing_time = 0.5 * (lo + hi);
    std::vector<double> above(f.begin(), f.begin() + static_cast<long>(split + 1));
    std::vector<double> below;
    for (std::size_t m = f.size(); m-- > split + 1;) below.push_back(-f[m]);
    if (auto cert = certify_part(above, problem.tau, true)) r.parts.push_back(*cert);
    if (auto cert = certify_part(below, problem.tau, true)) r.parts.push_back(*cert);
    r.bound_value = cb.c * std::pow(f1, cb.alpha) + cb.c * std::pow(-f2, cb.alpha);
  }
  for (const auto& p : r.parts) r.certificates_ok = r.certificates_ok && p.holds;
  r.holds = r.length <= r.bound_value && r.sqrt_sum <= r.bound_value;
  return r;
}

double epsilon_ball_radius(const GradientProblem& problem, double epsilon, std::mt19937_64& rng) {
  std::vector<Vector> dirs;
  std::normal_distribution<double> gauss;
  for (int s = 0; s < 256; ++s) {
    Vector d(problem.dimension);
    for (double& v : d) v = gauss(rng);
    const double n = norm(d);
    for (double& v : d) v /= n;
    dirs.push_back(std::move(d));
  }
  auto fits = [&](double rho) {
    for (const auto& d : dirs) {
      for (double frac : {0.25, 0.5, 0.75, 1.0}) {
        Vector x = d;
        for (double& v : x) v *= rho * frac;
        if (!(std::abs(problem.value(x) - problem.critical_value) < 0.5 * epsilon)) return false;
      }
    }
    return true;
  };
  double hi = std::min(0.25, problem.ball_radius);
  if (fits(hi)) return hi;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fits(mid) ? lo : hi) = mid;
    if (hi - lo <= 1e-6 * hi) break;
  }
  return lo;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t";
  for (std::size_t d = 0; d < traj.dimension; ++d) out << ",x_" << (d + 1);
  out << ",F\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << traj.times[i];
    for (double v : traj.points[i]) out << ',' << v;
    out << ',' << traj.F_values[i] << '\n';
  }
  out.precision(old);
}

}  // namespace lojlab::flows
