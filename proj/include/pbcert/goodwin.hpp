#pragma once

// Goodwin delay system with n = 3 and g(s) = 1 / (1 + |s|^3):
//
//     x1' = g(x3(t - tau)) - lambda x1,   x2' = x1 - lambda x2,   x3' = x2 - lambda x3.
//
// Model constants, Lur'e forms shifted by rho, classification of a (tau, lambda)
// point, and the parameter-plane sweep.

#include <optional>
#include <string>
#include <vector>

#include "pbcert/charroots.hpp"
#include "pbcert/freqcheck.hpp"

namespace pbcert::goodwin {

/// Constant of the sufficient frequency inequality rho tau^3 exp(lambda tau) < 84.2.
inline constexpr double kFrequencyBound = 84.2;

double g(double s);
/// g'(s) = -3 s^2 / (1 + s^3)^2 for s >= 0.
double g_prime(double s);

/// kappa0 = sup_{s > 0} -g'(s) = (4/3) 2^{-2/3}, attained at s = 2^{-1/3}.
double compute_kappa0();
/// Argmax of -g' on (0, inf).
double kappa0_argmax();

/// Unique eta0 > 0 with g(eta0) = lambda^3 eta0.
double solve_eta0(double lambda);
/// Unique theta1 in (0, pi/3) with tau lambda tan(theta1) = pi - 3 theta1.
double solve_theta1(double tau, double lambda);

struct GoodwinParams {
  double tau = 1.0;
  double lambda = 1.0;
  double beta = 1.5;
  double rho = 0.5;
};

struct MeasurementRange {
  double lower = 0.0;
  double upper = 0.0;
};

/// Range of x3 over the closure of W_beta: [(beta lambda)^{-3} g(sigma_beta), (beta/lambda)^3 g(0)].
MeasurementRange measurement_range(double beta, double lambda);

/// delta_beta = sup of g' over the measurement range (strictly negative).
/// Throws CertError(DegenerateRange) when the range is empty.
double compute_delta_beta(const GoodwinParams& params);
double compute_delta_beta(double beta, double lambda);
/// max of g' over [range.lower, range.upper]; g'(lower) when the range is a point.
double sup_g_prime(const MeasurementRange& range);

struct GoodwinConstants {
  double kappa0 = 0.0;
  double eta0 = 0.0;
  double sigma_beta = 0.0;
  double delta_beta = 0.0;
  double theta1 = 0.0;
  /// -(lambda sec theta1)^3
  double terminal_threshold = 0.0;
  /// g'(eta0)
  double g_prime_eta0 = 0.0;
};

GoodwinConstants compute_constants(const GoodwinParams& params);

/// Stationary point (lambda^2 eta0, lambda eta0, eta0).
std::vector<double> stationary_point(double lambda);

/// Linear part of the rho-shifted Lur'e form: -lambda on the diagonal, unit
/// sub-diagonal coupling and -rho x3(t - tau) into x1.
DelayLinearPart lure_linear_part(double tau, double lambda, double rho);
/// Full Lur'e system with B = e1, C x = x3(t - tau) and the given Lipschitz constant.
LurjeDelaySystem lure_system(double tau, double lambda, double rho, double lipschitz);
/// Closed form W_rho(p) = -1 / ((lambda + p)^3 exp(p tau) + rho).
cplx transfer(double tau, double lambda, double rho, cplx p);
/// W_rho along Re p = -lambda with the closed-form tail bound 1 / (exp(-lambda tau) w^3 - rho).
LineTransfer transfer_on_line(double tau, double lambda, double rho);
/// Linearisation at the stationary point: characteristic function -((p + lambda)^3 - g'(eta0) exp(-p tau)).
QuasiPolynomial linearization(double tau, double lambda);

/// Lipschitz constant of F(s) = g_beta(s) + rho s: max(|rho - kappa0|, |rho + delta_beta|).
double shifted_lipschitz(double rho, double kappa0, double delta_beta);

enum class PointLabel { StablePoint, StablePeriodicOrbit, Uncertified };
enum class UncertifiedReason { None, NoCandidate, NonHyperbolic, UnexpectedRootCount };

std::string to_string(PointLabel label);
std::string to_string(UncertifiedReason reason);

struct CandidateResult {
  double beta = 0.0;
  double rho = 0.0;
  double delta_beta = 0.0;
  /// rho tau^3 exp(lambda tau)
  double df1_value = 0.0;
  bool df1 = false;
  std::optional<FrequencySweepReport> df2;
  std::optional<RootCount> dichotomy;
  bool certified = false;
  std::string note;
};

struct Witness {
  double rho = 0.0;
  double beta = 0.0;
};

struct PointClassification {
  double tau = 0.0;
  double lambda = 0.0;
  PointLabel label = PointLabel::Uncertified;
  UncertifiedReason reason = UncertifiedReason::NoCandidate;
  std::optional<Witness> witness;
  /// DF2 infimum of the certifying candidate.
  double margin = 0.0;
  std::optional<int> root_count_at_phi0;
  std::optional<RootCount> phi0_roots;
  /// g'(eta0) + (lambda sec theta1)^3
  double hyperbolicity = 0.0;
  GoodwinConstants constants;
  std::vector<CandidateResult> candidates;
};

struct ClassifyOptions {
  std::vector<double> beta_set{1.5, 3.0};
  /// Overrides the per-beta default rho scan when set.
  std::optional<std::vector<double>> rho_set;
  SweepOptions sweep;
  RootCountOptions roots;
  double hyperbolicity_margin = 1e-8;
  /// Lower end of the default rho scan is -delta_beta + rho_epsilon.
  double rho_epsilon = 1e-9;
  /// Keep every evaluated candidate in the classification (otherwise only the witness).
  bool record_candidates = false;
};

/// kappa0/2 + 1e-3 followed by 8 log-spaced values in [-delta_beta + eps, kappa0].
std::vector<double> default_rho_set(double delta_beta, double rho_epsilon = 1e-9);

/// Checks (DF1), the 2-root dichotomy on Re p = -lambda and (DF2) for one (beta, rho).
CandidateResult evaluate_candidate(double tau, double lambda, double beta, double rho, double kappa0,
                                   double delta_beta, const ClassifyOptions& options);

PointClassification classify_point(double tau, double lambda, const ClassifyOptions& options = {});

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;

  /// Lattice node i; n == 1 gives the midpoint.
  double at(int i) const { return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1); }
  double spacing() const { return n == 1 ? (hi - lo) : (hi - lo) / (n - 1); }
};

struct RegionCell {
  PointLabel label = PointLabel::Uncertified;
  UncertifiedReason reason = UncertifiedReason::NoCandidate;
  std::optional<Witness> witness;
  double margin = 0.0;
};

/// Cells are stored lambda-major: cell(i_tau, j_lambda) = cells[j * tau.n + i].
struct RegionGrid {
  AxisRange tau;
  AxisRange lambda;
  std::vector<RegionCell> cells;

  const RegionCell& cell(int i_tau, int j_lambda) const { return cells[static_cast<std::size_t>(j_lambda) * tau.n + i_tau]; }
};

RegionCell to_cell(const PointClassification& pc);

/// OpenMP-parallel sweep; `workers` sets the thread count. Results do not
/// depend on the worker count.
RegionGrid sweep_region(const AxisRange& tau, const AxisRange& lambda, const ClassifyOptions& options,
                        int workers);
/// Single-threaded reference sweep.
RegionGrid sweep_region_serial(const AxisRange& tau, const AxisRange& lambda, const ClassifyOptions& options);

}  // namespace pbcert::goodwin
