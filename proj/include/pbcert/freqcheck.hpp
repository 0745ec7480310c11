#pragma once

// Transfer functions of Lur'e delay systems and frequency-domain inequalities
// along vertical lines Re p = -nu.
//
// Strict "for all omega" inequalities are certified by a finite adaptive sweep
// over [0, cutoff] (real coefficients give conjugate symmetry) together with an
// analytic bound on the tail |omega| > cutoff, and a configurable safety margin.

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pbcert/charroots.hpp"

namespace pbcert {

/// x'(t) = sum_k A_k x(t - tau_k) + B F(C x_t),  C x_t = sum_k C_k x(t - tau_k),
/// with |F(s1) - F(s2)|_1 <= Lambda |s1 - s2|_2 in the norms |u|_i^2 = u* M_i u.
class LurjeDelaySystem {
 public:
  LurjeDelaySystem(DelayLinearPart linear, Eigen::MatrixXd B, std::vector<DelayTerm> C, double lipschitz,
                   Eigen::MatrixXd M1, Eigen::MatrixXd M2);
  /// Euclidean weights.
  LurjeDelaySystem(DelayLinearPart linear, Eigen::MatrixXd B, std::vector<DelayTerm> C, double lipschitz);

  const QuasiPolynomial& quasi_polynomial() const { return qp_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const std::vector<DelayTerm>& C() const { return C_; }
  double lipschitz() const { return lipschitz_; }
  const Eigen::MatrixXd& M1() const { return M1_; }
  const Eigen::MatrixXd& M2() const { return M2_; }
  int inputs() const { return static_cast<int>(B_.cols()); }
  int outputs() const { return static_cast<int>(C_.front().matrix.rows()); }

  /// gamma(p) = sum_k C_k exp(-p tau_k).
  Eigen::MatrixXcd gamma(cplx p) const;

 private:
  QuasiPolynomial qp_;
  Eigen::MatrixXd B_;
  std::vector<DelayTerm> C_;
  double lipschitz_;
  Eigen::MatrixXd M1_;
  Eigen::MatrixXd M2_;
};

/// W(p) = gamma(p) (alpha(p) - p I)^{-1} B. Throws CertError(SingularAtP) at poles.
Eigen::MatrixXcd eval_transfer(const LurjeDelaySystem& sys, cplx p);

/// Upper-triangular Cholesky factor U with M = U^T U and positive diagonal.
/// Throws CertError(InvalidInput) if M is not symmetric positive definite.
Eigen::MatrixXd upper_cholesky(const Eigen::MatrixXd& M);

/// Operator norm of W from (C^m, |.|_1) to (C^r, |.|_2): sigma_max(U2 W U1^{-1}).
double weighted_norm(const Eigen::MatrixXcd& W, const Eigen::MatrixXd& M1, const Eigen::MatrixXd& M2);

struct SweepOptions {
  int initial_grid = 512;
  double safety_margin = 1e-6;
  /// Golden-section refinement stops once the bracket is below this width
  /// (relative to max(1, |omega|)).
  double bracket_tol = 1e-10;
  int refine_peaks = 3;
  /// Largest admissible cutoff; beyond it the tail cannot be closed.
  double max_cutoff = 1e7;
  /// Cap for the uniform part of the grid that resolves exp(i omega tau) ripples.
  int max_uniform = 1 << 18;
};

enum class SweepKind { Gain, Circle };

struct FrequencySweepReport {
  SweepKind kind = SweepKind::Gain;
  double abscissa = 0.0;  ///< nu, the sweep runs along Re p = -nu
  /// Gain: sup of the weighted norm. Circle: inf of the circle expression.
  double extremum = 0.0;
  double extremum_omega = 0.0;
  /// Gain: 1 / Lambda. Circle: 0.
  double threshold = 0.0;
  /// Gain: threshold - extremum. Circle: extremum.
  double margin = 0.0;
  double cutoff = 0.0;
  /// Gain: bound on the norm for |omega| > cutoff. Circle: lower bound on the
  /// expression for |omega| > cutoff.
  double tail_bound = 0.0;
  double safety_margin = 0.0;
  long samples = 0;
  bool passed = false;
};

struct SweepExtremum {
  double value = 0.0;
  double omega = 0.0;
  long samples = 0;
};

enum class Extremum { Max, Min };

/// Sweep engine: extremum of f over [0, cutoff] from a log-spaced grid (plus a
/// uniform grid with `ripple_period / 16` spacing when ripple_period > 0),
/// refined by golden-section search around the best local extrema.
SweepExtremum sweep_extremum(const std::function<double(double)>& f, double cutoff, Extremum kind,
                             double ripple_period, const SweepOptions& options);

/// Bound on sup_{|omega| >= w} of the weighted transfer norm along Re p = -nu,
/// from ||gamma|| ||B|| / (|p| - sum ||A_k|| exp(nu tau_k)); +inf where unavailable.
double transfer_tail_bound(const LurjeDelaySystem& sys, double nu, double w);

/// sup_omega |W(-nu + i omega)| < Lambda^{-1}. Throws PoleOnLine if the line
/// carries a characteristic root, TailBoundUnavailable if no finite cutoff works.
FrequencySweepReport check_gain_condition(const LurjeDelaySystem& sys, double nu, const SweepOptions& options = {});

/// Scalar transfer function restricted to a vertical line.
struct LineTransfer {
  std::function<cplx(double)> eval;
  /// tail(w) >= sup_{|omega| >= w} |W(omega)|, non-increasing; +inf if unknown.
  std::function<double(double)> tail;
  /// Largest delay; sets the ripple resolution of the grid (0 for none).
  double ripple_delay = 0.0;
  double abscissa = 0.0;
};

/// Builds the line transfer of a SISO system along Re p = -nu.
LineTransfer line_transfer(const LurjeDelaySystem& sys, double nu);

/// inf_omega Re[(1 + a W)^* (1 + b W)] > 0.
FrequencySweepReport check_circle_condition(const LineTransfer& W, double a, double b,
                                            const SweepOptions& options = {});

}  // namespace pbcert
