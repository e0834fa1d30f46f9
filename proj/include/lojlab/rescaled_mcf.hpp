#pragma once

// Rescaled mean curvature flow of rotationally symmetric graphs over the
// cylinder, Lojasiewicz constant fitting, and the closeness experiment.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lojlab/analytic_flows.hpp"
#include "lojlab/cylinder_geometry.hpp"
#include "lojlab/errors.hpp"
#include "lojlab/sequence_certificates.hpp"

namespace lojlab::mcf {

using cyl::CylinderGraph;

struct FlowState {
  CylinderGraph graph;
  double t = 0.0;
};

/// Raised when the solution stops being trustworthy; carries the last state
/// that passed all checks.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, FlowState last_valid)
      : Error(ErrorKind::BlowUp, what), last_valid_(std::move(last_valid)) {}
  const FlowState& last_valid() const noexcept { return last_valid_; }

 private:
  FlowState last_valid_;
};

/// Normal velocity in graph form, u_t = u_zz/(1+u_z^2) - k/r + r/2 - (z/2) u_z
/// with r = sqrt(2k) + u; zero at the pinned ends. Throws GeometryError if r <= 0.
std::vector<double> rhs(const CylinderGraph& g);

struct StepResult {
  FlowState state;
  /// max |two half steps - one full step|.
  double error_estimate = 0.0;
  double max_abs_u = 0.0;
  /// dt / (h^2/2).
  double cfl = 0.0;
};

/// One SSP-RK3 step of size dt taken as two half steps, with the full step as
/// error reference. Throws GeometryError if r <= 0, BlowUpError on non-finite values.
StepResult step(const FlowState& state, double dt);

struct Controls {
  double t_end = 1.0;
  double dt_max = 0.01;
  /// Local error tolerance (max norm).
  double tol = 1e-9;
  /// States are stored every `stride` time units (must divide 1).
  double stride = 0.25;
  /// Stop once dist_{stop_R}(Sigma_t, C) exceeds this (<= 0 disables).
  double stop_dist = 0.0;
  double stop_R = 5.0;
  /// Lower floor for the doubling blow-up test on max |u|.
  double blowup_floor = 1e-3;
};

enum class ExitReason { Completed, DistanceExceeded, GeometryFailure };
const char* to_string(ExitReason r);

struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  double max_abs_u = 0.0;
  double cfl = 0.0;
};

struct FlowHistory {
  /// Stored states at multiples of the stride (integer times included).
  std::vector<FlowState> states;
  /// F at each stored state.
  std::vector<double> F_series;
  /// Discrete F of the zero profile on the same grid.
  double F_cylinder = 0.0;
  std::vector<StepRecord> steps;
  std::size_t rejected_steps = 0;
  ExitReason exit = ExitReason::Completed;
  std::string exit_detail;

  /// Index of the stored state at time t, if any.
  std::optional<std::size_t> index_at(double t) const;
  double t_last() const { return states.empty() ? 0.0 : states.back().t; }
};

FlowHistory evolve(const FlowState& initial, const Controls& controls);

/// Initial profiles.
enum class ProfileKind { Zero, Bump, StableBump, RandomBump };
ProfileKind parse_profile_kind(const std::string& name);
const char* to_string(ProfileKind kind);

struct ProfileSpec {
  ProfileKind kind = ProfileKind::StableBump;
  /// Sup norm of the profile.
  double amplitude = 0.01;
  std::uint64_t seed = 1;
};

/// Profiles localized near z = 0, scaled to sup norm `amplitude`. StableBump
/// and RandomBump carry no component along the discrete linearized modes with
/// eigenvalue >= -1/4; RandomBump is a seeded sum of three Gaussians.
CylinderGraph make_profile(const cyl::CylinderSpec& spec, double R_dom, double h, const ProfileSpec& p);

/// Largest eigenvalues of the linearized operator u'' - (z/2) u' + u with
/// Dirichlet ends, discretized as in rhs (descending).
std::vector<double> linearized_spectrum(const CylinderGraph& g, std::size_t count);

/// Component of u along the discrete linearized eigenmodes, in the inner product
/// that symmetrizes the operator; normalized eigenvectors, descending eigenvalue.
std::vector<double> modal_coefficients(const CylinderGraph& g, std::size_t count);

struct FitOptions {
  double R_bar = 5.0;
  double epsilon = 0.2;
  double C_cap = 1e3;
  double tau_min = 0.05;
  double tau_step = 0.01;
  std::size_t min_windows = 5;
};

struct FitWindow {
  double t = 0.0;
  /// F(t-1) - F(t+1).
  double drop = 0.0;
  /// |F(t) - F_C|.
  double deviation = 0.0;
  /// C drop - deviation^{1+tau} at the fitted constants.
  double slack = 0.0;
};

struct LojasiewiczFit {
  /// Smallest C with nonnegative slack at tau (may be below 1; certificates use max(1, C)).
  double C = 1.0;
  double tau = 0.5;
  /// tau clipped to the certifiable range (1/3, 1).
  double tau_certified = 0.5;
  bool tau_in_range = false;
  /// No tau on the grid gives C <= C_cap; tau is the largest grid value.
  bool cap_exceeded = false;
  std::vector<FitWindow> windows;
};

/// Fits |F(t) - F_C|^{1+tau} <= C (F(t-1) - F(t+1)) over admissible windows.
/// Throws InsufficientDataError if fewer than min_windows windows qualify.
LojasiewiczFit lojasiewicz_fit(const FlowHistory& history, const FitOptions& options);

struct CloseConfig {
  int k = 1;
  double R_dom = 20.0;
  double h = 0.05;
  double dt_max = 0.01;
  double tol = 1e-9;
  ProfileSpec profile;
  double t1 = 0.0;
  double t2 = 6.0;
  double eps1 = 0.2;
  double eps2 = 0.05;
  double R1 = 6.0;
  double R2 = 5.0;
  double stride = 0.25;
  /// Flow stops once dist_{R1}(Sigma_t, C) exceeds this.
  double stop_dist = 1.0;
  FitOptions fit;
};

struct SplitSequence {
  flows::BoundCase tag = flows::BoundCase::Above;
  /// Positive part (Cases 1 and 3).
  std::vector<double> above;
  /// |negative part| in reversed order (Cases 2 and 3).
  std::vector<double> below;
};

/// Splits x_j = F(Sigma_{t1+2j-1}) - F_C into the monotone sequences the
/// certificates run on. Throws InvalidInputError if x is not non-increasing.
SplitSequence split_cases(const std::vector<double>& x);

struct CloseReport {
  CloseConfig config;
  ExitReason exit = ExitReason::Completed;
  double t_reached = 0.0;
  double F_cylinder = 0.0;
  /// max over stored t in [t1, t1+2] of dist_{R1}(Sigma_t, C).
  double initial_dist = 0.0;
  double dF1 = 0.0;
  double dF2 = 0.0;
  bool hypothesis_close = false;
  bool hypothesis_level = false;
  bool hypotheses_ok = false;
  std::string hypothesis_detail;

  LojasiewiczFit fit;
  std::vector<double> sequence;
  flows::BoundCase tag = flows::BoundCase::Above;
  std::vector<seq::Certificate> parts;
  bool certificates_ok = false;
  /// Sum of sqrt drops of the two-spaced sequence (plus terminal terms in Case 3).
  double sqrt_sum = 0.0;
  double certified_bound = 0.0;
  /// Unit-spaced sum of sqrt(F(t) - F(t+1)) over [t1+1, t2].
  double unit_sqrt_sum = 0.0;
  /// max over stored t in [t1+1, t2] of dist_{R2}(Sigma_t, Sigma_{t1+1}).
  double max_dist = 0.0;
  /// max_dist / sqrt_sum for this run.
  double promotion_constant = 0.0;
  double bound_value = 0.0;
  bool bound_holds = false;
};

/// Evolves the configured profile to t2 and runs every check of the closeness
/// statement on the history.
CloseReport close_experiment(const CloseConfig& config);

/// Same checks on an existing history (states must include t1 .. t2).
CloseReport close_from_history(const CloseConfig& config, const FlowHistory& history);

}  // namespace lojlab::mcf
