#include "pbcert/goodwin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pbcert/error.hpp"
#include "search.hpp"

namespace pbcert::goodwin {

namespace {

constexpr double kPi = std::numbers::pi;

double kappa0_closed_form() { return (4.0 / 3.0) * std::pow(2.0, -2.0 / 3.0); }

Eigen::MatrixXd chain_matrix(double lambda) {
  Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(3, 3);
  a0.diagonal().setConstant(-lambda);
  a0(1, 0) = 1.0;
  a0(2, 1) = 1.0;
  return a0;
}

Eigen::MatrixXd feedback_matrix(double gain) {
  Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(3, 3);
  a1(0, 2) = gain;
  return a1;
}

}  // namespace

double g(double s) {
  const double a = std::abs(s);
  return 1.0 / (1.0 + a * a * a);
}

double g_prime(double s) {
  const double a = std::abs(s);
  const double d = 1.0 + a * a * a;
  const double v = -3.0 * a * a / (d * d);
  return s < 0.0 ? -v : v;
}

double kappa0_argmax() { return std::pow(2.0, -1.0 / 3.0); }

double compute_kappa0() {
  static const double kappa0 = [] {
    const double closed = kappa0_closed_form();
    const auto [arg, val] = detail::golden_min([](double s) { return g_prime(s); }, 0.0, 4.0, 1e-12);
    (void)arg;
    if (std::abs(-val - closed) > 1e-10)
      throw CertError(ErrorCode::NoConvergence, "golden-section check of kappa0 disagrees with the closed form");
    return closed;
  }();
  return kappa0;
}

double solve_eta0(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw CertError(ErrorCode::InvalidInput, "lambda must be positive");
  const double l3 = lambda * lambda * lambda;
  auto h = [l3](double eta) { return g(eta) - l3 * eta; };
  return detail::bisect(h, 0.0, 1.0 / l3);
}

double solve_theta1(double tau, double lambda) {
  const double tl = tau * lambda;
  if (!(tl > 0.0) || !std::isfinite(tl)) throw CertError(ErrorCode::InvalidInput, "tau * lambda must be positive");
  auto h = [tl](double th) { return tl * std::tan(th) - kPi + 3.0 * th; };
  return detail::bisect(h, 0.0, kPi / 3.0);
}

MeasurementRange measurement_range(double beta, double lambda) {
  const double ratio = beta / lambda;
  const double sigma_beta = ratio * ratio * ratio * g(0.0);
  const double bl = beta * lambda;
  return MeasurementRange{g(sigma_beta) / (bl * bl * bl), sigma_beta};
}

double compute_delta_beta(double beta, double lambda) {
  if (!(beta > 0.0) || !(lambda > 0.0)) throw CertError(ErrorCode::InvalidInput, "need beta > 0 and lambda > 0");
  return sup_g_prime(measurement_range(beta, lambda));
}

double sup_g_prime(const MeasurementRange& range) {
  if (!(range.lower > 0.0) || !std::isfinite(range.upper))
    throw CertError(ErrorCode::InvalidInput, "measurement range must be positive and finite");
  if (range.lower > range.upper)
    throw CertError(ErrorCode::DegenerateRange, "measurement range of W_beta is empty");
  if (range.lower == range.upper) return g_prime(range.lower);

  // g' is negative with a single interior minimum, so the sup sits at an
  // endpoint; the grid search is kept as a check on that shape.
  double best = std::max(g_prime(range.lower), g_prime(range.upper));
  constexpr int kGrid = 1024;
  const double h = (range.upper - range.lower) / kGrid;
  int best_i = 0;
  double grid_best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double v = g_prime(range.lower + h * i);
    if (v > grid_best) {
      grid_best = v;
      best_i = i;
    }
  }
  const double a = range.lower + h * std::max(0, best_i - 1);
  const double b = range.lower + h * std::min(kGrid, best_i + 1);
  const auto [arg, val] = detail::golden_min([](double s) { return -g_prime(s); }, a, b, 1e-14 * std::max(1.0, b));
  (void)arg;
  best = std::max({best, grid_best, -val});
  return best;
}

double compute_delta_beta(const GoodwinParams& params) { return compute_delta_beta(params.beta, params.lambda); }

GoodwinConstants compute_constants(const GoodwinParams& params) {
  GoodwinConstants c;
  c.kappa0 = compute_kappa0();
  c.eta0 = solve_eta0(params.lambda);
  c.sigma_beta = measurement_range(params.beta, params.lambda).upper;
  c.delta_beta = compute_delta_beta(params);
  c.theta1 = solve_theta1(params.tau, params.lambda);
  const double s = params.lambda / std::cos(c.theta1);
  c.terminal_threshold = -(s * s * s);
  c.g_prime_eta0 = g_prime(c.eta0);
  return c;
}

std::vector<double> stationary_point(double lambda) {
  const double eta0 = solve_eta0(lambda);
  return {lambda * lambda * eta0, lambda * eta0, eta0};
}

DelayLinearPart lure_linear_part(double tau, double lambda, double rho) {
  return DelayLinearPart(3, {DelayTerm{0.0, chain_matrix(lambda)}, DelayTerm{tau, feedback_matrix(-rho)}});
}

LurjeDelaySystem lure_system(double tau, double lambda, double rho, double lipschitz) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 1);
  B(0, 0) = 1.0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(1, 3);
  C(0, 2) = 1.0;
  return LurjeDelaySystem(lure_linear_part(tau, lambda, rho), B, {DelayTerm{tau, C}}, lipschitz);
}

cplx transfer(double tau, double lambda, double rho, cplx p) {
  const cplx s = lambda + p;
  return -1.0 / (s * s * s * std::exp(p * tau) + rho);
}

LineTransfer transfer_on_line(double tau, double lambda, double rho) {
  LineTransfer lt;
  lt.abscissa = lambda;
  lt.ripple_delay = tau;
  lt.eval = [tau, lambda, rho](double w) {
    const cplx iw{0.0, w};
    const cplx d = iw * iw * iw * std::exp(cplx{-lambda, w} * tau) + rho;
    if (std::abs(d) < 1e-300) throw CertError(ErrorCode::PoleOnLine, "W_rho has a pole on Re p = -lambda");
    return -1.0 / d;
  };
  const double decay = std::exp(-lambda * tau);
  lt.tail = [decay, rho](double w) {
    const double m = decay * w * w * w - std::abs(rho);
    return m > 0.0 ? 1.0 / m : std::numeric_limits<double>::infinity();
  };
  return lt;
}

QuasiPolynomial linearization(double tau, double lambda) {
  const double slope = g_prime(solve_eta0(lambda));
  return QuasiPolynomial(DelayLinearPart(3, {DelayTerm{0.0, chain_matrix(lambda)}, DelayTerm{tau, feedback_matrix(slope)}}));
}

double shifted_lipschitz(double rho, double kappa0, double delta_beta) {
  return std::max(std::abs(rho - kappa0), std::abs(rho + delta_beta));
}

std::string to_string(PointLabel label) {
  switch (label) {
    case PointLabel::StablePoint: return "StablePoint";
    case PointLabel::StablePeriodicOrbit: return "StablePeriodicOrbit";
    case PointLabel::Uncertified: return "Uncertified";
  }
  return "Uncertified";
}

std::string to_string(UncertifiedReason reason) {
  switch (reason) {
    case UncertifiedReason::None: return "None";
    case UncertifiedReason::NoCandidate: return "NoCandidate";
    case UncertifiedReason::NonHyperbolic: return "NonHyperbolic";
    case UncertifiedReason::UnexpectedRootCount: return "UnexpectedRootCount";
  }
  return "None";
}

std::vector<double> default_rho_set(double delta_beta, double rho_epsilon) {
  const double kappa0 = compute_kappa0();
  const double lower = -delta_beta;
  std::vector<double> out;
  const double smith = 0.5 * kappa0 + 1e-3;
  if (smith > lower && smith <= kappa0) out.push_back(smith);
  const double lo = lower + rho_epsilon;
  if (lo >= kappa0) return out;
  constexpr int kCount = 8;
  for (int i = 0; i < kCount; ++i) {
    const double v = i == kCount - 1 ? kappa0 : lo * std::pow(kappa0 / lo, static_cast<double>(i) / (kCount - 1));
    out.push_back(v);
  }
  return out;
}

CandidateResult evaluate_candidate(double tau, double lambda, double beta, double rho, double kappa0,
                                   double delta_beta, const ClassifyOptions& options) {
  CandidateResult r;
  r.beta = beta;
  r.rho = rho;
  r.delta_beta = delta_beta;
  r.df1_value = rho * tau * tau * tau * std::exp(lambda * tau);
  if (!(rho > -delta_beta && rho <= kappa0)) {
    r.note = "rho outside (-delta_beta, kappa0]";
    return r;
  }
  r.df1 = r.df1_value < kFrequencyBound;
  if (!r.df1) {
    r.note = "DF1 fails";
    return r;
  }

  try {
    r.df2 = check_circle_condition(transfer_on_line(tau, lambda, rho), rho - kappa0, rho + delta_beta, options.sweep);
  } catch (const CertError& e) {
    r.note = e.what();
    return r;
  }
  if (!r.df2->passed) {
    r.note = "DF2 fails";
    return r;
  }

  try {
    r.dichotomy = count_roots_right_of(QuasiPolynomial(lure_linear_part(tau, lambda, rho)), -lambda, options.roots);
  } catch (const CertError& e) {
    r.note = e.what();
    return r;
  }
  if (r.dichotomy->count != 2) {
    r.note = "dichotomy has " + std::to_string(r.dichotomy->count) + " roots right of -lambda";
    return r;
  }
  r.certified = true;
  return r;
}

PointClassification classify_point(double tau, double lambda, const ClassifyOptions& options) {
  if (!(tau > 0.0) || !(lambda > 0.0)) throw CertError(ErrorCode::InvalidInput, "tau and lambda must be positive");
  if (options.beta_set.empty()) throw CertError(ErrorCode::InvalidInput, "beta set is empty");
  if (options.rho_set && options.rho_set->empty()) throw CertError(ErrorCode::InvalidInput, "rho set is empty");

  PointClassification pc;
  pc.tau = tau;
  pc.lambda = lambda;
  const double kappa0 = compute_kappa0();

  for (const double beta : options.beta_set) {
    if (!(beta > 1.0)) throw CertError(ErrorCode::InvalidInput, "beta must exceed 1");
    double delta = 0.0;
    try {
      delta = compute_delta_beta(beta, lambda);
    } catch (const CertError& e) {
      if (e.code() != ErrorCode::DegenerateRange) throw;
      continue;
    }
    const auto rhos = options.rho_set ? *options.rho_set : default_rho_set(delta, options.rho_epsilon);
    for (const double rho : rhos) {
      auto cand = evaluate_candidate(tau, lambda, beta, rho, kappa0, delta, options);
      const bool ok = cand.certified;
      if (ok) {
        pc.witness = Witness{rho, beta};
        pc.margin = cand.df2->margin;
      }
      if (options.record_candidates || ok) pc.candidates.push_back(std::move(cand));
      if (ok) break;
    }
    if (pc.witness) break;
  }

  pc.constants = compute_constants(GoodwinParams{tau, lambda, pc.witness ? pc.witness->beta : options.beta_set.front(),
                                                 pc.witness ? pc.witness->rho : 0.0});
  pc.hyperbolicity = pc.constants.g_prime_eta0 - pc.constants.terminal_threshold;

  if (!pc.witness) {
    pc.label = PointLabel::Uncertified;
    pc.reason = UncertifiedReason::NoCandidate;
    return pc;
  }
  if (std::abs(pc.hyperbolicity) <= options.hyperbolicity_margin) {
    pc.label = PointLabel::Uncertified;
    pc.reason = UncertifiedReason::NonHyperbolic;
    return pc;
  }

  try {
    pc.phi0_roots = count_roots_right_of(linearization(tau, lambda), 0.0, options.roots);
  } catch (const CertError& e) {
    pc.label = PointLabel::Uncertified;
    pc.reason = e.code() == ErrorCode::OnAxisRoot ? UncertifiedReason::NonHyperbolic
                                                  : UncertifiedReason::UnexpectedRootCount;
    return pc;
  }
  pc.root_count_at_phi0 = pc.phi0_roots->count;

  // Two unstable roots exactly when g'(eta0) lies below the terminal threshold.
  const bool expect_unstable = pc.hyperbolicity < 0.0;
  if (pc.phi0_roots->count == 2 && expect_unstable) {
    pc.label = PointLabel::StablePeriodicOrbit;
    pc.reason = UncertifiedReason::None;
  } else if (pc.phi0_roots->count == 0 && !expect_unstable) {
    pc.label = PointLabel::StablePoint;
    pc.reason = UncertifiedReason::None;
  } else {
    pc.label = PointLabel::Uncertified;
    pc.reason = UncertifiedReason::UnexpectedRootCount;
  }
  return pc;
}

RegionCell to_cell(const PointClassification& pc) {
  return RegionCell{pc.label, pc.reason, pc.witness, pc.margin};
}

namespace {

RegionGrid make_grid(const AxisRange& tau, const AxisRange& lambda) {
  if (tau.n < 1 || lambda.n < 1) throw CertError(ErrorCode::InvalidInput, "resolution must be >= 1");
  if (!(tau.lo > 0.0) || !(lambda.lo > 0.0) || tau.hi < tau.lo || lambda.hi < lambda.lo)
    throw CertError(ErrorCode::InvalidInput, "ranges must be positive and ordered");
  RegionGrid grid{tau, lambda, {}};
  grid.cells.resize(static_cast<std::size_t>(tau.n) * lambda.n);
  return grid;
}

void validate_options(const ClassifyOptions& options) {
  if (options.beta_set.empty()) throw CertError(ErrorCode::InvalidInput, "beta set is empty");
  for (const double b : options.beta_set)
    if (!(b > 1.0)) throw CertError(ErrorCode::InvalidInput, "beta must exceed 1");
  if (options.rho_set && options.rho_set->empty()) throw CertError(ErrorCode::InvalidInput, "rho set is empty");
}

RegionCell classify_cell(const RegionGrid& grid, long idx, const ClassifyOptions& options) {
  const int i = static_cast<int>(idx % grid.tau.n);
  const int j = static_cast<int>(idx / grid.tau.n);
  try {
    return to_cell(classify_point(grid.tau.at(i), grid.lambda.at(j), options));
  } catch (const CertError&) {
    return RegionCell{PointLabel::Uncertified, UncertifiedReason::UnexpectedRootCount, std::nullopt, 0.0};
  }
}

}  // namespace

RegionGrid sweep_region(const AxisRange& tau, const AxisRange& lambda, const ClassifyOptions& options, int workers) {
  if (workers < 1) throw CertError(ErrorCode::InvalidInput, "worker count must be >= 1");
  validate_options(options);
  RegionGrid grid = make_grid(tau, lambda);
  const long total = static_cast<long>(grid.cells.size());
  ClassifyOptions cell_options = options;
  cell_options.record_candidates = false;
  (void)compute_kappa0();  // initialise the static before threads race for it

#pragma omp parallel for schedule(dynamic, 4) num_threads(workers)
  for (long idx = 0; idx < total; ++idx) grid.cells[static_cast<std::size_t>(idx)] = classify_cell(grid, idx, cell_options);

  return grid;
}

RegionGrid sweep_region_serial(const AxisRange& tau, const AxisRange& lambda, const ClassifyOptions& options) {
  validate_options(options);
  RegionGrid grid = make_grid(tau, lambda);
  ClassifyOptions cell_options = options;
  cell_options.record_candidates = false;
  for (long idx = 0; idx < static_cast<long>(grid.cells.size()); ++idx)
    grid.cells[static_cast<std::size_t>(idx)] = classify_cell(grid, idx, cell_options);
  return grid;
}

}  // namespace pbcert::goodwin
