#pragma once

// Frequency conditions for diagonal models of semilinear parabolic equations
// u' = -A u + F(u) with A = diag(lambda_k), F Lipschitz from H_alpha to H_0.

#include <functional>
#include <vector>

#include "pbcert/freqcheck.hpp"

namespace pbcert::parabolic {

struct DiagonalParabolicModel {
  /// 0 < lambda_1 <= lambda_2 <= ..., a finite truncation of the spectrum.
  std::vector<double> eigenvalues;
  double alpha = 0.0;
  double lipschitz = 1.0;
  /// Intended unstable dimension, 1-based: the gap sits between lambda_j and lambda_{j+1}.
  int j = 1;

  /// Throws CertError(InvalidInput) on malformed data and CertError(NoGap) if lambda_j == lambda_{j+1}.
  void validate() const;
  double lambda_j() const { return eigenvalues[j - 1]; }
  double lambda_next() const { return eigenvalues[j]; }
};

/// (lambda_{j+1} - lambda_j) / (lambda_j^alpha + lambda_{j+1}^alpha).
double gap_value(const DiagonalParabolicModel& model);

/// max_k lambda_k^alpha / |lambda_k - nu + i omega|.
double resolvent_norm_at(const DiagonalParabolicModel& model, double nu, double omega);

/// sup over omega of resolvent_norm_at, which is attained at omega = 0.
/// Throws CertError(OnEigenvalue) when nu hits the spectrum.
double resolvent_sup_norm(const DiagonalParabolicModel& model, double nu);

struct GapReport {
  double gap = 0.0;
  bool passed = false;
  /// Minimiser of the resolvent sup over (lambda_j, lambda_{j+1}).
  double nu = 0.0;
  double resolvent_sup = 0.0;
  /// Resolvent condition at nu: resolvent_sup < 1 / Lambda.
  bool resolvent_passed = false;
  /// Last eigenvalue within 10x of nu, so the truncation may hide the tail.
  bool tail_warning = false;
};

GapReport spectral_gap_check(const DiagonalParabolicModel& model);

/// General condition sup_omega norm(omega) < 1 / Lambda for a user-supplied
/// scalar function along Re p = -nu. `tail(w)` must bound norm on |omega| >= w.
FrequencySweepReport check_user_condition(const std::function<double(double)>& norm,
                                          const std::function<double(double)>& tail, double nu, double lipschitz,
                                          double ripple_period = 0.0, const SweepOptions& options = {});

}  // namespace pbcert::parabolic
