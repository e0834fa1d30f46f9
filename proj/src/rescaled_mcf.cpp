#include "lojlab/rescaled_mcf.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "lojlab/kernels/kernels.hpp"

namespace lojlab::mcf {

namespace {

constexpr double kTimeEps = 1e-9;

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(x));
  }
  return m;
}

void eval_rhs(const CylinderGraph& g, std::span<const double> u, std::vector<double>& out) {
  kernels::RhsParams p{g.h(), g.spec().radius, g.spec().k};
  out.resize(u.size());
  const double min_r = kernels::active().rhs(u.data(), g.z().data(), u.size(), p, out.data());
  if (!(min_r > 0.0)) throw GeometryError("radius reached zero: the graph description breaks down");
}

// One SSP-RK3 (Shu-Osher) step on u in place.
void rk3(const CylinderGraph& g, std::vector<double>& u, double dt) {
  const auto& K = kernels::active();
  const std::size_t n = u.size();
  std::vector<double> k, u1(u), u2;
  eval_rhs(g, u, k);
  K.axpby(dt, k.data(), 1.0, u1.data(), n);
  eval_rhs(g, u1, k);
  u2 = u1;
  K.axpby(dt, k.data(), 1.0, u2.data(), n);
  K.axpby(0.75, u.data(), 0.25, u2.data(), n);
  eval_rhs(g, u2, k);
  K.axpby(dt, k.data(), 1.0, u2.data(), n);
  K.axpby(1.0 / 3.0, u.data(), 2.0 / 3.0, u2.data(), n);
  u.swap(u2);
}

bool is_integer_time(double t) { return std::abs(t - std::round(t)) < kTimeEps; }

}  // namespace

std::vector<double> rhs(const CylinderGraph& g) {
  std::vector<double> out;
  eval_rhs(g, g.u(), out);
  return out;
}

StepResult step(const FlowState& state, double dt) {
  if (!(dt > 0.0)) throw InvalidInputError("time step must be positive");
  const CylinderGraph& g = state.graph;
  std::vector<double> full(g.u_vec());
  rk3(g, full, dt);
  std::vector<double> half(g.u_vec());
  rk3(g, half, 0.5 * dt);
  rk3(g, half, 0.5 * dt);

  StepResult r{state, 0.0, 0.0, dt / (0.5 * g.h() * g.h())};
  r.max_abs_u = max_abs(half);
  if (!std::isfinite(r.max_abs_u)) throw BlowUpError("non-finite profile values", state);
  r.error_estimate = kernels::active().max_abs_diff(full.data(), half.data(), half.size());
  std::copy(half.begin(), half.end(), r.state.graph.u_mut().begin());
  r.state.t = state.t + dt;
  return r;
}

const char* to_string(ExitReason r) {
  switch (r) {
    case ExitReason::Completed: return "completed";
    case ExitReason::DistanceExceeded: return "distance-exceeded";
    case ExitReason::GeometryFailure: return "geometry-failure";
  }
  return "unknown";
}

std::optional<std::size_t> FlowHistory::index_at(double t) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (std::abs(states[i].t - t) < kTimeEps) return i;
  }
  return std::nullopt;
}

FlowHistory evolve(const FlowState& initial, const Controls& c) {
  if (!(c.stride > 0.0) || !is_integer_time(1.0 / c.stride)) {
    throw InvalidInputError("stride must divide one time unit");
  }
  if (!(c.dt_max > 0.0) || !(c.tol > 0.0)) throw InvalidInputError("dt_max and tol must be positive");
  initial.graph.validate();

  const CylinderGraph& g0 = initial.graph;
  FlowHistory hist;
  hist.F_cylinder = cyl::graph_F(CylinderGraph(g0.spec(), g0.R_dom(), g0.h()));
  hist.states.push_back(initial);
  hist.F_series.push_back(cyl::graph_F(g0));

  const double dt_cap = std::min(c.dt_max, 0.5 * g0.h() * g0.h());
  const double dt_min = 1e-6 * dt_cap;
  double dt = dt_cap;
  FlowState cur = initial;
  std::size_t store_count = 1;
  std::deque<double> recent;

  while (cur.t < c.t_end - kTimeEps) {
    const double target = std::min(initial.t + static_cast<double>(store_count) * c.stride, c.t_end);
    // Land exactly on store times; never leave a sliver shorter than a step.
    // A remainder just above the cap is split in two rather than stretched.
    const double remaining = target - cur.t;
    const bool clipped = cur.t + 1.01 * dt >= target && remaining <= dt_cap;
    const double dt_try = clipped ? remaining : std::min(dt, 0.5 * remaining);

    std::optional<StepResult> attempt;
    try {
      attempt = step(cur, dt_try);
    } catch (const GeometryError& e) {
      hist.exit = ExitReason::GeometryFailure;
      hist.exit_detail = e.what();
      break;
    }
    StepResult& s = *attempt;
    const double err = s.error_estimate / 7.0;
    const double factor = err > 0.0 ? std::clamp(0.9 * std::pow(c.tol / err, 0.25), 0.2, 2.0) : 2.0;
    if (err > c.tol && dt_try > dt_min) {
      ++hist.rejected_steps;
      dt = std::max(dt_min, dt_try * factor);
      continue;
    }
    dt = clipped ? std::max(dt, std::min(dt_cap, dt_try * factor)) : std::min(dt_cap, dt_try * factor);

    if (clipped) s.state.t = target;
    recent.push_back(s.max_abs_u);
    if (recent.size() > 10) recent.pop_front();
    if (s.max_abs_u > c.blowup_floor && recent.size() == 10 && s.max_abs_u >= 2.0 * recent.front()) {
      throw BlowUpError("max |u| doubled within 10 steps", cur);
    }
    cur = std::move(s.state);
    hist.steps.push_back({cur.t, dt_try, s.max_abs_u, s.cfl});

    if (clipped) {
      hist.states.push_back(cur);
      try {
        hist.F_series.push_back(cyl::graph_F(cur.graph));
      } catch (const GeometryError& e) {
        hist.states.pop_back();
        hist.exit = ExitReason::GeometryFailure;
        hist.exit_detail = e.what();
        break;
      }
      ++store_count;
      if (c.stop_dist > 0.0) {
        const double d = cyl::dist_R(cur.graph, c.stop_R).dist;
        if (d > c.stop_dist) {
          hist.exit = ExitReason::DistanceExceeded;
          hist.exit_detail = "dist_R(Sigma_t, C) = " + std::to_string(d) + " at t = " + std::to_string(cur.t);
          break;
        }
      }
    }
  }
  return hist;
}

ProfileKind parse_profile_kind(const std::string& name) {
  if (name == "zero") return ProfileKind::Zero;
  if (name == "bump") return ProfileKind::Bump;
  if (name == "stable_bump") return ProfileKind::StableBump;
  if (name == "random_bump") return ProfileKind::RandomBump;
  throw InvalidInputError("unknown profile kind '" + name + "'");
}

const char* to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Zero: return "zero";
    case ProfileKind::Bump: return "bump";
    case ProfileKind::StableBump: return "stable_bump";
    case ProfileKind::RandomBump: return "random_bump";
  }
  return "unknown";
}

namespace {

// Symmetrized interior block of the discrete linearization: the operator is
// D^{-1} S D with S symmetric tridiagonal; eigenvectors of the operator are
// D^{-1} v, and it is self-adjoint for the weights d_i^2.
struct Symmetrized {
  std::vector<double> diag, off, d;
};

Symmetrized symmetrize(const CylinderGraph& g) {
  const std::size_t m = g.size() - 2;
  const double h = g.h();
  const double ih2 = 1.0 / (h * h);
  auto z = g.z();
  Symmetrized s;
  s.diag.assign(m, 1.0 - 2.0 * ih2);
  s.off.resize(m - 1);
  std::vector<double> logd(m, 0.0);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double up = ih2 - z[j + 1] / (4.0 * h);   // row j, column j+1
    const double low = ih2 + z[j + 2] / (4.0 * h);  // row j+1, column j
    s.off[j] = std::sqrt(up * low);
    logd[j + 1] = logd[j] + 0.5 * std::log(up / low);
  }
  const double top = *std::max_element(logd.begin(), logd.end());
  s.d.resize(m);
  for (std::size_t j = 0; j < m; ++j) s.d[j] = std::exp(logd[j] - top);
  return s;
}

struct Modes {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // column-major m x count, matching values
};

Modes top_modes(const Symmetrized& s, std::size_t count) {
  const auto m = static_cast<lapack_int>(s.diag.size());
  if (count == 0 || static_cast<lapack_int>(count) > m) throw InvalidInputError("bad mode count");
  std::vector<double> d(s.diag), e(s.off);
  e.push_back(0.0);
  lapack_int found = 0;
  std::vector<double> w(m), zv(static_cast<std::size_t>(m) * count);
  std::vector<lapack_int> isuppz(2 * count);
  const lapack_int il = m - static_cast<lapack_int>(count) + 1;
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', m, d.data(), e.data(), 0.0, 0.0, il, m,
                                         0.0, &found, w.data(), zv.data(), m, isuppz.data());
  if (info != 0 || found != static_cast<lapack_int>(count)) throw NumericError("tridiagonal eigensolver failed");
  Modes out;
  for (std::size_t c = count; c-- > 0;) {
    out.values.push_back(w[c]);
    // Fix the sign so the largest-magnitude entry is positive.
    const double* col = zv.data() + c * static_cast<std::size_t>(m);
    double big = 0.0;
    for (lapack_int i = 0; i < m; ++i) {
      if (std::abs(col[i]) > std::abs(big)) big = col[i];
    }
    const double sign = big < 0.0 ? -1.0 : 1.0;
    for (lapack_int i = 0; i < m; ++i) out.vectors.push_back(sign * col[i]);
  }
  return out;
}

double weighted_coefficient(const Symmetrized& s, const Modes& modes, std::size_t c, std::span<const double> u) {
  const std::size_t m = s.d.size();
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) acc += s.d[j] * u[j + 1] * modes.vectors[c * m + j];
  return acc;
}

// Adds localized multiples of z^j exp(-z^2/2) so the profile has no component
// along the modes with eigenvalue >= -1/4.
void remove_unstable(CylinderGraph& g) {
  const Symmetrized s = symmetrize(g);
  const Modes probe = top_modes(s, 6);
  std::size_t count = 0;
  while (count < probe.values.size() && probe.values[count] >= -0.25) ++count;
  if (count == 0) return;
  const Modes modes = top_modes(s, count);

  auto z = g.z();
  std::vector<std::vector<double>> basis(count, std::vector<double>(g.size(), 0.0));
  for (std::size_t b = 0; b < count; ++b) {
    for (std::size_t i = 1; i + 1 < g.size(); ++i) basis[b][i] = std::pow(z[i], static_cast<double>(b)) * std::exp(-0.5 * z[i] * z[i]);
  }
  const auto n = static_cast<lapack_int>(count);
  std::vector<double> A(count * count), rhs_v(count);
  for (std::size_t mode = 0; mode < count; ++mode) {
    rhs_v[mode] = -weighted_coefficient(s, modes, mode, g.u());
    for (std::size_t b = 0; b < count; ++b) A[b * count + mode] = weighted_coefficient(s, modes, mode, basis[b]);
  }
  std::vector<lapack_int> ipiv(count);
  if (LAPACKE_dgesv(LAPACK_COL_MAJOR, n, 1, A.data(), n, ipiv.data(), rhs_v.data(), n) != 0) {
    throw NumericError("mode-removal system is singular");
  }
  auto u = g.u_mut();
  for (std::size_t b = 0; b < count; ++b) {
    for (std::size_t i = 1; i + 1 < g.size(); ++i) u[i] += rhs_v[b] * basis[b][i];
  }
}

void normalize_sup(CylinderGraph& g, double amplitude) {
  const double m = max_abs(g.u());
  if (m == 0.0) return;
  auto u = g.u_mut();
  const double s = amplitude / m;
  for (double& x : u) x *= s;
}

}  // namespace

std::vector<double> linearized_spectrum(const CylinderGraph& g, std::size_t count) {
  return top_modes(symmetrize(g), count).values;
}

std::vector<double> modal_coefficients(const CylinderGraph& g, std::size_t count) {
  const Symmetrized s = symmetrize(g);
  const Modes modes = top_modes(s, count);
  std::vector<double> out(count);
  for (std::size_t c = 0; c < count; ++c) out[c] = weighted_coefficient(s, modes, c, g.u());
  return out;
}

CylinderGraph make_profile(const cyl::CylinderSpec& spec, double R_dom, double h, const ProfileSpec& p) {
  if (!std::isfinite(p.amplitude) || p.amplitude < 0.0) throw InvalidInputError("amplitude must be finite and >= 0");
  switch (p.kind) {
    case ProfileKind::Zero:
      return CylinderGraph(spec, R_dom, h);
    case ProfileKind::Bump: {
      const double a = p.amplitude;
      return CylinderGraph::from_profile(spec, R_dom, h, [a](double z) { return a * std::exp(-z * z); });
    }
    case ProfileKind::StableBump: {
      auto g = CylinderGraph::from_profile(spec, R_dom, h, [](double z) { return std::exp(-z * z); });
      remove_unstable(g);
      normalize_sup(g, p.amplitude);
      return g;
    }
    case ProfileKind::RandomBump: {
      std::mt19937_64 rng(p.seed);
      std::uniform_real_distribution<double> weight(-1.0, 1.0), center(-1.5, 1.5), width(0.6, 1.4);
      double w[3], c[3], s[3];
      for (int i = 0; i < 3; ++i) {
        w[i] = weight(rng);
        c[i] = center(rng);
        s[i] = width(rng);
      }
      auto g = CylinderGraph::from_profile(spec, R_dom, h, [&](double z) {
        double v = 0.0;
        for (int i = 0; i < 3; ++i) v += w[i] * std::exp(-(z - c[i]) * (z - c[i]) / (s[i] * s[i]));
        return v;
      });
      remove_unstable(g);
      normalize_sup(g, p.amplitude);
      return g;
    }
  }
  throw InvalidInputError("unknown profile kind");
}

LojasiewiczFit lojasiewicz_fit(const FlowHistory& history, const FitOptions& o) {
  const double F_C = history.F_cylinder;
  std::vector<bool> near(history.states.size());
  for (std::size_t i = 0; i < near.size(); ++i) {
    near[i] = cyl::dist_R(history.states[i].graph, o.R_bar).dist < o.epsilon;
  }

  LojasiewiczFit fit;
  for (std::size_t i = 0; i < history.states.size(); ++i) {
    const double t = history.states[i].t;
    if (!is_integer_time(t)) continue;
    const auto before = history.index_at(t - 1.0);
    const auto after = history.index_at(t + 1.0);
    if (!before || !after) continue;
    bool ok = true;
    for (std::size_t j = *before; j <= *after; ++j) ok = ok && near[j];
    if (!ok) continue;
    FitWindow w;
    w.t = t;
    w.drop = history.F_series[*before] - history.F_series[*after];
    w.deviation = std::abs(history.F_series[i] - F_C);
    fit.windows.push_back(w);
  }
  if (fit.windows.size() < o.min_windows) {
    throw InsufficientDataError("only " + std::to_string(fit.windows.size()) + " admissible windows, need " +
                                std::to_string(o.min_windows));
  }

  auto min_C = [&](double tau) {
    double C = 0.0;
    for (const auto& w : fit.windows) {
      const double lhs = std::pow(w.deviation, 1.0 + tau);
      if (lhs == 0.0) continue;
      if (!(w.drop > 0.0)) return std::numeric_limits<double>::infinity();
      C = std::max(C, lhs / w.drop);
    }
    return C;
  };

  bool found = false;
  double tau = o.tau_min;
  double C = 0.0;
  for (int i = 0;; ++i) {
    tau = o.tau_min + i * o.tau_step;
    if (tau >= 1.0 - 1e-12) break;
    C = min_C(tau);
    if (C <= o.C_cap) {
      found = true;
      break;
    }
  }
  if (!found) {
    tau = o.tau_min + std::floor((1.0 - 1e-12 - o.tau_min) / o.tau_step) * o.tau_step;
    C = min_C(tau);
    fit.cap_exceeded = true;
  }
  // Rounding in C * drop must not flip a tight window negative.
  if (std::isfinite(C) && C > 0.0) C *= 1.0 + 1e-12;
  fit.tau = tau;
  fit.C = C;
  fit.tau_in_range = tau > 1.0 / 3.0 && tau < 1.0;
  fit.tau_certified = std::max(tau, 1.0 / 3.0 + 0.01);
  for (auto& w : fit.windows) w.slack = C * w.drop - std::pow(w.deviation, 1.0 + tau);
  return fit;
}

SplitSequence split_cases(const std::vector<double>& x) {
  if (x.empty()) throw InvalidInputError("empty F-value sequence");
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    if (!(x[j + 1] <= x[j])) throw InvalidInputError("F-value sequence is not non-increasing");
  }
  SplitSequence s;
  if (x.back() >= 0.0) {
    s.tag = flows::BoundCase::Above;
  } else if (x.front() <= 0.0) {
    s.tag = flows::BoundCase::Below;
  } else {
    s.tag = flows::BoundCase::Crossing;
  }
  for (double v : x) {
    if (v > 0.0) s.above.push_back(v);
  }
  for (auto it = x.rbegin(); it != x.rend(); ++it) {
    if (*it < 0.0) s.below.push_back(-*it);
  }
  return s;
}

CloseReport close_from_history(const CloseConfig& cfg, const FlowHistory& hist) {
  CloseReport r;
  r.config = cfg;
  r.exit = hist.exit;
  r.t_reached = hist.t_last();
  r.F_cylinder = hist.F_cylinder;

  const auto i1 = hist.index_at(cfg.t1);
  const auto i2 = hist.index_at(cfg.t2);
  const auto i_ref = hist.index_at(cfg.t1 + 1.0);
  if (!i1 || !i2 || !i_ref || cfg.t2 < cfg.t1 + 2.0) {
    r.hypothesis_detail = "flow is not defined on [t1, t2] (reached t = " + std::to_string(r.t_reached) + ")";
    return r;
  }

  r.initial_dist = 0.0;
  for (const auto& s : hist.states) {
    if (s.t >= cfg.t1 - kTimeEps && s.t <= cfg.t1 + 2.0 + kTimeEps) {
      r.initial_dist = std::max(r.initial_dist, cyl::dist_R(s.graph, cfg.R1).dist);
    }
  }
  r.dF1 = hist.F_series[*i1] - hist.F_cylinder;
  r.dF2 = hist.F_series[*i2] - hist.F_cylinder;
  r.hypothesis_close = r.initial_dist < cfg.eps1;
  r.hypothesis_level = std::abs(r.dF1) < cfg.eps2 && std::abs(r.dF2) < cfg.eps2;
  r.hypotheses_ok = r.hypothesis_close && r.hypothesis_level;
  if (!r.hypothesis_close) r.hypothesis_detail += "dist_R1 on [t1, t1+2] is not below eps1; ";
  if (!r.hypothesis_level) r.hypothesis_detail += "|F - F(C)| at t1 or t2 is not below eps2; ";

  // Distances are measured regardless so failing runs still report them.
  const CylinderGraph& ref = hist.states[*i_ref].graph;
  for (const auto& s : hist.states) {
    if (s.t >= cfg.t1 + 1.0 - kTimeEps && s.t <= cfg.t2 + kTimeEps) {
      r.max_dist = std::max(r.max_dist, cyl::dist_between(s.graph, ref, cfg.R2).dist);
    }
  }
  for (double t = cfg.t1 + 1.0; t + 1.0 <= cfg.t2 + kTimeEps; t += 1.0) {
    const auto a = hist.index_at(t), b = hist.index_at(t + 1.0);
    if (a && b) r.unit_sqrt_sum += std::sqrt(std::max(0.0, hist.F_series[*a] - hist.F_series[*b]));
  }
  if (!r.hypotheses_ok) return r;

  try {
    r.fit = lojasiewicz_fit(hist, cfg.fit);
  } catch (const InsufficientDataError& e) {
    r.hypothesis_detail += std::string("fit: ") + e.what();
    return r;
  }

  for (int j = 1;; ++j) {
    const double t = cfg.t1 + 2.0 * j - 1.0;
    if (t > cfg.t2 + kTimeEps) break;
    const auto idx = hist.index_at(t);
    if (!idx) break;
    r.sequence.push_back(hist.F_series[*idx] - hist.F_cylinder);
  }

  const SplitSequence split = split_cases(r.sequence);
  r.tag = split.tag;
  const double C_cert = std::max(1.0, r.fit.C);
  const double tau = r.fit.tau_certified;
  const bool terminal = split.tag == flows::BoundCase::Crossing;
  r.certificates_ok = std::isfinite(C_cert);
  if (r.certificates_ok) {
    for (const auto* part : {&split.above, &split.below}) {
      if (part->empty()) continue;
      auto cert = seq::certify(seq::MonotoneSequence(*part), C_cert, tau, terminal);
      r.certificates_ok = r.certificates_ok && cert.holds;
      r.sqrt_sum += cert.sum;
      r.parts.push_back(std::move(cert));
    }
    const auto cb = seq::constructive_bound(C_cert, tau);
    r.certified_bound = cb.bound(std::abs(r.dF1)) + cb.bound(std::abs(r.dF2));
  }

  if (r.sqrt_sum > 0.0) {
    r.promotion_constant = r.max_dist / r.sqrt_sum;
  } else {
    r.promotion_constant = r.max_dist > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  r.bound_value = r.promotion_constant * r.certified_bound;
  r.bound_holds = r.certificates_ok && std::isfinite(r.promotion_constant) && r.max_dist <= r.bound_value;
  return r;
}

CloseReport close_experiment(const CloseConfig& cfg) {
  const auto spec = cyl::CylinderSpec::make(cfg.k);
  FlowState init{make_profile(spec, cfg.R_dom, cfg.h, cfg.profile), 0.0};
  Controls c;
  c.t_end = cfg.t2;
  c.dt_max = cfg.dt_max;
  c.tol = cfg.tol;
  c.stride = cfg.stride;
  c.stop_dist = cfg.stop_dist;
  c.stop_R = cfg.R1;
  const FlowHistory hist = evolve(init, c);
  return close_from_history(cfg, hist);
}

}  // namespace lojlab::mcf
