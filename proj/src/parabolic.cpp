#include "pbcert/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pbcert/error.hpp"

namespace pbcert::parabolic {

void DiagonalParabolicModel::validate() const {
  if (eigenvalues.size() < 2) throw CertError(ErrorCode::InvalidInput, "need at least two eigenvalues");
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    const double l = eigenvalues[k];
    if (!(l > 0.0) || !std::isfinite(l)) throw CertError(ErrorCode::InvalidInput, "eigenvalues must be positive");
    if (k > 0 && l < eigenvalues[k - 1]) throw CertError(ErrorCode::InvalidInput, "eigenvalues must be non-decreasing");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) throw CertError(ErrorCode::InvalidInput, "alpha must lie in [0, 1)");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) throw CertError(ErrorCode::InvalidInput, "Lambda must be positive");
  if (j < 1 || j >= static_cast<int>(eigenvalues.size()))
    throw CertError(ErrorCode::InvalidInput, "j must index a pair of consecutive eigenvalues");
  if (!(lambda_j() < lambda_next())) throw CertError(ErrorCode::NoGap, "lambda_j equals lambda_{j+1}");
}

double gap_value(const DiagonalParabolicModel& model) {
  model.validate();
  const double a = model.lambda_j(), b = model.lambda_next();
  return (b - a) / (std::pow(a, model.alpha) + std::pow(b, model.alpha));
}

double resolvent_norm_at(const DiagonalParabolicModel& model, double nu, double omega) {
  double best = 0.0;
  for (double l : model.eigenvalues) best = std::max(best, std::pow(l, model.alpha) / std::hypot(l - nu, omega));
  return best;
}

double resolvent_sup_norm(const DiagonalParabolicModel& model, double nu) {
  for (double l : model.eigenvalues)
    if (std::abs(l - nu) <= 1e-14 * std::max(1.0, l)) throw CertError(ErrorCode::OnEigenvalue, "nu is an eigenvalue");
  const double sup = resolvent_norm_at(model, nu, 0.0);
  // Every term decreases in |omega|; spot-check that on a log grid.
  const double scale = std::max(1.0, std::abs(nu));
  for (int i = 0; i <= 48; ++i) {
    const double w = scale * std::pow(10.0, -6.0 + 12.0 * i / 48.0);
    if (resolvent_norm_at(model, nu, w) > sup * (1.0 + 1e-12))
      throw CertError(ErrorCode::NoConvergence, "resolvent norm exceeds its omega = 0 value");
  }
  return sup;
}

GapReport spectral_gap_check(const DiagonalParabolicModel& model) {
  GapReport rep;
  rep.gap = gap_value(model);
  rep.passed = rep.gap > model.lipschitz;
  // Terms below j increase in nu and terms above j+1 decrease, so the optimum
  // balances the two neighbours of the gap.
  const double a = model.lambda_j(), b = model.lambda_next();
  const double pa = std::pow(a, model.alpha), pb = std::pow(b, model.alpha);
  rep.nu = (a * pb + b * pa) / (pa + pb);
  rep.resolvent_sup = resolvent_sup_norm(model, rep.nu);
  rep.resolvent_passed = rep.resolvent_sup * model.lipschitz < 1.0;
  rep.tail_warning = model.eigenvalues.back() <= 10.0 * rep.nu;
  return rep;
}

FrequencySweepReport check_user_condition(const std::function<double(double)>& norm,
                                          const std::function<double(double)>& tail, double nu, double lipschitz,
                                          double ripple_period, const SweepOptions& options) {
  if (!norm || !tail) throw CertError(ErrorCode::InvalidInput, "norm and tail functions are required");
  if (!(lipschitz > 0.0)) throw CertError(ErrorCode::InvalidInput, "Lambda must be positive");
  FrequencySweepReport rep;
  rep.kind = SweepKind::Gain;
  rep.abscissa = nu;
  rep.threshold = 1.0 / lipschitz;
  rep.safety_margin = options.safety_margin;
  double cutoff = 1.0;
  while (!(tail(cutoff) < rep.threshold)) {
    cutoff *= 2.0;
    if (cutoff > options.max_cutoff)
      throw CertError(ErrorCode::TailBoundUnavailable, "tail bound never drops below 1 / Lambda");
  }
  rep.cutoff = cutoff;
  rep.tail_bound = tail(cutoff);
  const auto ext = sweep_extremum(norm, cutoff, Extremum::Max, ripple_period, options);
  rep.extremum = ext.value;
  rep.extremum_omega = ext.omega;
  rep.samples = ext.samples;
  rep.margin = rep.threshold - rep.extremum;
  rep.passed = rep.margin > options.safety_margin;
  return rep;
}

}  // namespace pbcert::parabolic
