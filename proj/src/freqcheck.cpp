#include "pbcert/freqcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pbcert/error.hpp"
#include "search.hpp"

namespace pbcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

void require_spd(const Eigen::MatrixXd& M, int size, const char* name) {
  if (M.rows() != size || M.cols() != size)
    throw CertError(ErrorCode::InvalidInput, std::string(name) + " must be " + std::to_string(size) + "x" +
                                                 std::to_string(size));
  (void)upper_cholesky(M);
}

}  // namespace

Eigen::MatrixXd upper_cholesky(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() == 0) throw CertError(ErrorCode::InvalidInput, "weight must be square");
  if (!M.allFinite()) throw CertError(ErrorCode::InvalidInput, "weight has non-finite entries");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw CertError(ErrorCode::InvalidInput, "weight must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw CertError(ErrorCode::InvalidInput, "weight must be positive definite");
  return llt.matrixU();
}

LurjeDelaySystem::LurjeDelaySystem(DelayLinearPart linear, Eigen::MatrixXd B, std::vector<DelayTerm> C,
                                   double lipschitz, Eigen::MatrixXd M1, Eigen::MatrixXd M2)
    : qp_(std::move(linear)),
      B_(std::move(B)),
      C_(std::move(C)),
      lipschitz_(lipschitz),
      M1_(std::move(M1)),
      M2_(std::move(M2)) {
  const int n = qp_.dim();
  if (B_.rows() != n || B_.cols() < 1) throw CertError(ErrorCode::InvalidInput, "B must be n x m with m >= 1");
  if (C_.empty()) throw CertError(ErrorCode::InvalidInput, "C needs at least one term");
  const auto r = C_.front().matrix.rows();
  if (r < 1) throw CertError(ErrorCode::InvalidInput, "C must have at least one row");
  for (std::size_t k = 0; k < C_.size(); ++k) {
    const auto& t = C_[k];
    if (!std::isfinite(t.delay) || t.delay < 0.0)
      throw CertError(ErrorCode::InvalidInput, "C delay " + std::to_string(k) + " must be finite and >= 0");
    if (t.matrix.rows() != r || t.matrix.cols() != n)
      throw CertError(ErrorCode::InvalidInput, "C matrix " + std::to_string(k) + " must be r x n");
  }
  if (!(lipschitz_ > 0.0) || !std::isfinite(lipschitz_))
    throw CertError(ErrorCode::InvalidInput, "Lipschitz constant must be positive");
  require_spd(M1_, static_cast<int>(B_.cols()), "M1");
  require_spd(M2_, static_cast<int>(r), "M2");
}

LurjeDelaySystem::LurjeDelaySystem(DelayLinearPart linear, Eigen::MatrixXd B, std::vector<DelayTerm> C,
                                   double lipschitz)
    : LurjeDelaySystem(std::move(linear), B, C, lipschitz, Eigen::MatrixXd::Identity(B.cols(), B.cols()),
                       Eigen::MatrixXd::Identity(C.empty() ? 1 : C.front().matrix.rows(),
                                                 C.empty() ? 1 : C.front().matrix.rows())) {}

Eigen::MatrixXcd LurjeDelaySystem::gamma(cplx p) const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(C_.front().matrix.rows(), qp_.dim());
  for (const auto& t : C_) {
    const cplx w = t.delay == 0.0 ? cplx{1.0, 0.0} : std::exp(-p * t.delay);
    out += w * t.matrix.cast<cplx>();
  }
  return out;
}

Eigen::MatrixXcd eval_transfer(const LurjeDelaySystem& sys, cplx p) {
  const Eigen::MatrixXcd delta = sys.quasi_polynomial().matrix(p);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(delta);
  double scale = 1.0;
  for (int j = 0; j < delta.cols(); ++j) scale *= std::max(delta.col(j).norm(), 1e-300);
  const cplx det = lu.determinant();
  if (!(std::abs(det) > 1e-14 * scale))
    throw CertError(ErrorCode::SingularAtP, "p = (" + std::to_string(p.real()) + ", " + std::to_string(p.imag()) +
                                                ") is a characteristic root");
  const Eigen::MatrixXcd x = lu.solve(sys.B().cast<cplx>());
  return sys.gamma(p) * x;
}

double weighted_norm(const Eigen::MatrixXcd& W, const Eigen::MatrixXd& M1, const Eigen::MatrixXd& M2) {
  const Eigen::MatrixXd U1 = upper_cholesky(M1);
  const Eigen::MatrixXd U2 = upper_cholesky(M2);
  if (U1.rows() != W.cols() || U2.rows() != W.rows())
    throw CertError(ErrorCode::InvalidInput, "weight sizes do not match the transfer matrix");
  // G = U2 W U1^{-1}, computed as (U1^{-T} (U2 W)^T)^T.
  const Eigen::MatrixXcd U2W = U2.cast<cplx>() * W;
  const Eigen::MatrixXcd G =
      U1.cast<cplx>().transpose().triangularView<Eigen::Lower>().solve(U2W.transpose()).transpose();
  if (G.size() == 1) return std::abs(G(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
  return svd.singularValues()(0);
}

SweepExtremum sweep_extremum(const std::function<double(double)>& f, double cutoff, Extremum kind,
                             double ripple_period, const SweepOptions& options) {
  std::vector<double> grid;
  const int n_log = std::max(options.initial_grid, 8);
  grid.reserve(static_cast<std::size_t>(2 * n_log));
  grid.push_back(0.0);
  const double lo = cutoff * 1e-6;
  for (int i = 0; i < n_log - 1; ++i) grid.push_back(lo * std::pow(cutoff / lo, static_cast<double>(i) / (n_log - 2)));
  int n_uniform = 64;
  if (ripple_period > 0.0) {
    const double want = std::ceil(16.0 * cutoff / ripple_period);
    n_uniform = static_cast<int>(std::clamp(want, 64.0, static_cast<double>(options.max_uniform)));
  }
  for (int i = 1; i < n_uniform; ++i) grid.push_back(cutoff * i / n_uniform);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const double sign = kind == Extremum::Max ? -1.0 : 1.0;  // minimise sign * f
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = sign * f(grid[i]);

  SweepExtremum out;
  out.samples = static_cast<long>(grid.size());
  const auto best_it = std::min_element(vals.begin(), vals.end());
  out.value = *best_it;
  out.omega = grid[static_cast<std::size_t>(best_it - vals.begin())];

  const std::size_t last = grid.size() - 1;
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i <= last; ++i) {
    const bool left = i == 0 || vals[i] <= vals[i - 1];
    const bool right = i == last || vals[i] <= vals[i + 1];
    if (left && right) peaks.push_back(i);
  }
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(options.refine_peaks), peaks.size());
  std::partial_sort(peaks.begin(), peaks.begin() + static_cast<long>(keep), peaks.end(),
                    [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  for (std::size_t k = 0; k < keep; ++k) {
    const std::size_t i = peaks[k];
    const double a = grid[i == 0 ? 0 : i - 1];
    const double b = grid[i == last ? last : i + 1];
    long evals = 0;
    auto g = [&](double w) {
      ++evals;
      return sign * f(w);
    };
    const auto [w, v] = detail::golden_min(g, a, b, options.bracket_tol * std::max(1.0, b));
    out.samples += evals;
    if (v < out.value) {
      out.value = v;
      out.omega = w;
    }
  }
  out.value *= sign;
  return out;
}

namespace {

struct TailTerms {
  double numerator = 0.0;  // kappa ||gamma|| ||B||
  double alpha_bound = 0.0;
};

TailTerms gain_tail_terms(const LurjeDelaySystem& sys, double nu) {
  TailTerms t;
  t.alpha_bound = sys.quasi_polynomial().alpha_norm_bound(-nu);
  double g = 0.0;
  for (const auto& term : sys.C()) g += spectral_norm(term.matrix) * std::exp(nu * term.delay);
  const Eigen::MatrixXd U1 = upper_cholesky(sys.M1());
  const Eigen::MatrixXd U2 = upper_cholesky(sys.M2());
  const Eigen::MatrixXd U1inv =
      U1.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(U1.rows(), U1.cols()));
  t.numerator = spectral_norm(U2) * spectral_norm(U1inv) * g * spectral_norm(sys.B());
  return t;
}

}  // namespace

double transfer_tail_bound(const LurjeDelaySystem& sys, double nu, double w) {
  const auto t = gain_tail_terms(sys, nu);
  if (t.numerator == 0.0) return 0.0;
  const double modp = std::hypot(nu, w);
  return modp > t.alpha_bound ? t.numerator / (modp - t.alpha_bound) : kInf;
}

FrequencySweepReport check_gain_condition(const LurjeDelaySystem& sys, double nu, const SweepOptions& options) {
  const auto& qp = sys.quasi_polynomial();
  const double c = -nu;
  const double line_margin = verify_dichotomy_line(qp, c);
  if (line_margin < 1e-10 * (1.0 + std::abs(qp.det(cplx{c, 0.0}))))
    throw CertError(ErrorCode::PoleOnLine, "characteristic root on Re p = " + std::to_string(c));

  FrequencySweepReport rep;
  rep.kind = SweepKind::Gain;
  rep.abscissa = nu;
  rep.threshold = 1.0 / sys.lipschitz();
  rep.safety_margin = options.safety_margin;

  // Cutoff where the tail bound has dropped to half the threshold.
  const auto tail = gain_tail_terms(sys, nu);
  const double cutoff = tail.alpha_bound + std::max(1.0, 2.0 * tail.numerator * sys.lipschitz());
  if (!std::isfinite(cutoff) || cutoff > options.max_cutoff)
    throw CertError(ErrorCode::TailBoundUnavailable, "cutoff " + std::to_string(cutoff) + " exceeds the maximum");
  rep.cutoff = cutoff;
  rep.tail_bound = transfer_tail_bound(sys, nu, cutoff);

  auto norm_at = [&](double w) {
    try {
      return weighted_norm(eval_transfer(sys, cplx{c, w}), sys.M1(), sys.M2());
    } catch (const CertError& e) {
      if (e.code() == ErrorCode::SingularAtP) throw CertError(ErrorCode::PoleOnLine, e.what());
      throw;
    }
  };
  const double ripple = qp.linear().max_delay();
  double ripple_period = 0.0;
  for (const auto& t : sys.C()) ripple_period = std::max(ripple_period, t.delay);
  ripple_period = std::max(ripple_period, ripple);
  const auto ext = sweep_extremum(norm_at, cutoff, Extremum::Max,
                                  ripple_period > 0.0 ? 2.0 * std::numbers::pi / ripple_period : 0.0, options);
  rep.extremum = ext.value;
  rep.extremum_omega = ext.omega;
  rep.samples = ext.samples;
  rep.margin = rep.threshold - rep.extremum;
  rep.passed = rep.margin > options.safety_margin && rep.tail_bound < rep.threshold;
  return rep;
}

LineTransfer line_transfer(const LurjeDelaySystem& sys, double nu) {
  if (sys.inputs() != 1 || sys.outputs() != 1)
    throw CertError(ErrorCode::InvalidInput, "line transfer requires a single-input single-output system");
  LineTransfer lt;
  lt.abscissa = nu;
  double ripple = sys.quasi_polynomial().linear().max_delay();
  for (const auto& t : sys.C()) ripple = std::max(ripple, t.delay);
  lt.ripple_delay = ripple;
  lt.eval = [sys, nu](double w) {
    try {
      return eval_transfer(sys, cplx{-nu, w})(0, 0);
    } catch (const CertError& e) {
      if (e.code() == ErrorCode::SingularAtP) throw CertError(ErrorCode::PoleOnLine, e.what());
      throw;
    }
  };
  const double s = sys.quasi_polynomial().alpha_norm_bound(-nu);
  double g = 0.0;
  for (const auto& t : sys.C()) g += spectral_norm(t.matrix) * std::exp(nu * t.delay);
  const double num = g * spectral_norm(sys.B());
  lt.tail = [s, num, nu](double w) {
    if (num == 0.0) return 0.0;
    const double modp = std::hypot(nu, w);
    return modp > s ? num / (modp - s) : kInf;
  };
  return lt;
}

FrequencySweepReport check_circle_condition(const LineTransfer& W, double a, double b, const SweepOptions& options) {
  FrequencySweepReport rep;
  rep.kind = SweepKind::Circle;
  rep.abscissa = W.abscissa;
  rep.threshold = 0.0;
  rep.safety_margin = options.safety_margin;

  const double aa = std::abs(a);
  const double bb = std::abs(b);
  auto tail_lower = [&](double w) {
    const double t = W.tail ? W.tail(w) : kInf;
    if (!std::isfinite(t)) return -kInf;
    return 1.0 - (aa + bb) * t - aa * bb * t * t;
  };
  double cutoff = 1.0;
  while (tail_lower(cutoff) < 0.5) {
    cutoff *= 2.0;
    if (cutoff > options.max_cutoff)
      throw CertError(ErrorCode::TailBoundUnavailable, "transfer tail does not decay below the circle bound");
  }
  rep.cutoff = cutoff;
  rep.tail_bound = tail_lower(cutoff);

  auto expr = [&](double w) {
    const cplx v = W.eval(w);
    return std::real(std::conj(1.0 + a * v) * (1.0 + b * v));
  };
  const double ripple_period = W.ripple_delay > 0.0 ? 2.0 * std::numbers::pi / W.ripple_delay : 0.0;
  const auto ext = sweep_extremum(expr, cutoff, Extremum::Min, ripple_period, options);
  rep.extremum = ext.value;
  rep.extremum_omega = ext.omega;
  rep.samples = ext.samples;
  rep.margin = ext.value;
  rep.passed = rep.margin > options.safety_margin && rep.tail_bound > 0.0;
  return rep;
}

}  // namespace pbcert
