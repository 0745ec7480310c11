#pragma once

// Method-of-steps RK4 integration of x'(t) = f(x(t), x(t - tau)) with cubic
// Hermite dense output, and Poincare-section detection of the limit behaviour.

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pbcert::dde {

using State = std::vector<double>;

enum class HistoryRule { Linear, Constant };

struct DdeProblem {
  int dim = 0;
  double delay = 0.0;
  std::function<void(std::span<const double> x, std::span<const double> x_delayed, std::span<double> dx)> rhs;
  /// Samples uniformly spaced on [-delay, 0]; front() is at -delay, back() at 0.
  std::vector<State> history;
  /// Linear: piecewise-linear interpolation. Constant: piecewise constant,
  /// holding each sample until the next one.
  HistoryRule rule = HistoryRule::Linear;

  void validate() const;
  State history_at(double s) const;
};

class DdeTrajectory {
 public:
  DdeTrajectory(DdeProblem problem, double step, int nodes);

  int dim() const { return problem_.dim; }
  double step() const { return step_; }
  double delay() const { return problem_.delay; }
  double horizon() const { return step_ * (nodes_ - 1); }
  int nodes() const { return nodes_; }
  const DdeProblem& problem() const { return problem_; }

  double time(int i) const { return step_ * i; }
  std::span<const double> state(int i) const { return {states_.data() + static_cast<std::size_t>(i) * dim(), static_cast<std::size_t>(dim())}; }
  std::span<const double> derivative(int i) const { return {derivs_.data() + static_cast<std::size_t>(i) * dim(), static_cast<std::size_t>(dim())}; }

  /// Solution at any t in [-delay, horizon]; history for t <= 0, Hermite cubic otherwise.
  State dense(double t) const;
  /// Hermite cubic on mesh interval m at fraction theta in [0, 1].
  void hermite(int m, double theta, std::span<double> out) const;

 private:
  friend DdeTrajectory integrate(const DdeProblem& problem, double h, double T);

  DdeProblem problem_;
  double step_;
  int nodes_;
  std::vector<double> states_;
  std::vector<double> derivs_;
};

/// Classical RK4 with h adjusted to delay / ceil(delay / h) so mesh nodes hit
/// every multiple of the delay. Throws CertError(NonfiniteState) on blow-up.
DdeTrajectory integrate(const DdeProblem& problem, double h, double T);

/// Poincare section {x_component = level} crossed in the given direction (+1 or -1).
struct SectionSpec {
  int component = 2;
  double level = 0.0;
  int direction = 1;
};

struct DetectOptions {
  /// Returns before this time are ignored for the period estimate.
  double transient_skip = 0.0;
  double point_tolerance = 1e-6;
  double ratio_threshold = 0.98;
  int min_returns = 5;
  /// Return distances below noise_floor * scale are treated as converged.
  double noise_floor = 1e-8;
  /// Latest return distance must be below this (relative to scale) for a periodic verdict.
  double converged_tolerance = 1e-4;
};

enum class VerdictKind { ConvergedToPoint, ConvergedToPeriodicOrbit, Inconclusive };

struct OrbitVerdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  double period = 0.0;
  /// Largest ratio of successive return distances in the contracting run.
  double contraction_ratio = 0.0;
  State section_anchor;
  State limit_state;
  double final_distance = 0.0;
  int returns = 0;
  std::vector<double> return_times;
};

std::string to_string(VerdictKind kind);

OrbitVerdict detect_limit(const DdeTrajectory& traj, std::span<const double> phi0, const SectionSpec& section,
                          const DetectOptions& options = {});

/// Goodwin right-hand side with g(s) = 1 / (1 + |s|^3).
DdeProblem goodwin_problem(double tau, double lambda, std::vector<State> history);
DdeProblem goodwin_problem(double tau, double lambda, const State& constant_history);

/// Bounds of W_beta: (beta lambda)^{-j} g(sigma_beta) < x_j < (beta / lambda)^j g(0), j = 1..3.
struct BoxBounds {
  State lower;
  State upper;
};
BoxBounds invariant_box(double beta, double lambda);

/// True iff every mesh state stays in W_beta and in the non-negative cone.
/// Throws CertError(InvalidInput) if the initial history is not inside W_beta.
bool check_invariance(const DdeTrajectory& traj, double beta, double lambda);

struct InvarianceJob {
  double tau = 1.0;
  double lambda = 1.0;
  double beta = 1.5;
  std::vector<State> history;
};

/// Integrates every job and checks invariance; OpenMP-parallel over jobs.
std::vector<char> invariance_batch(const std::vector<InvarianceJob>& jobs, double h, double horizon_in_delays,
                                   int workers);
/// Single-threaded reference for invariance_batch.
std::vector<char> invariance_batch_serial(const std::vector<InvarianceJob>& jobs, double h,
                                          double horizon_in_delays);

void write_csv(const DdeTrajectory& traj, std::ostream& out);

}  // namespace pbcert::dde
