#include "pbcert/charroots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pbcert/error.hpp"
#include "search.hpp"

namespace pbcert {

namespace {

constexpr double kPi = std::numbers::pi;

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

DelayLinearPart::DelayLinearPart(int n, std::vector<DelayTerm> terms) : n_(n), terms_(std::move(terms)) {
  if (n_ <= 0) throw CertError(ErrorCode::InvalidInput, "state dimension must be positive");
  if (terms_.empty()) throw CertError(ErrorCode::InvalidInput, "at least one delay term is required");
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const auto& t = terms_[k];
    if (!std::isfinite(t.delay) || t.delay < 0.0)
      throw CertError(ErrorCode::InvalidInput, "delay " + std::to_string(k) + " must be finite and >= 0");
    if (t.matrix.rows() != n_ || t.matrix.cols() != n_)
      throw CertError(ErrorCode::InvalidInput, "matrix " + std::to_string(k) + " must be n x n");
    if (!t.matrix.allFinite())
      throw CertError(ErrorCode::InvalidInput, "matrix " + std::to_string(k) + " has non-finite entries");
    for (std::size_t l = 0; l < k; ++l) {
      if (terms_[l].delay == t.delay) throw CertError(ErrorCode::InvalidInput, "delays must be distinct");
    }
    max_delay_ = std::max(max_delay_, t.delay);
  }
}

QuasiPolynomial::QuasiPolynomial(DelayLinearPart linear) : linear_(std::move(linear)) {
  term_norms_.reserve(linear_.terms().size());
  for (const auto& t : linear_.terms()) term_norms_.push_back(spectral_norm(t.matrix));
}

Eigen::MatrixXcd QuasiPolynomial::alpha(cplx p) const {
  const int n = dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& t : linear_.terms()) {
    const cplx w = t.delay == 0.0 ? cplx{1.0, 0.0} : std::exp(-p * t.delay);
    out += w * t.matrix.cast<cplx>();
  }
  return out;
}

Eigen::MatrixXcd QuasiPolynomial::matrix(cplx p) const {
  Eigen::MatrixXcd m = alpha(p);
  m.diagonal().array() -= p;
  return m;
}

cplx QuasiPolynomial::det(cplx p) const {
  const int n = dim();
  if (n > 3) return Eigen::PartialPivLU<Eigen::MatrixXcd>(matrix(p)).determinant();

  // Small fixed-size path; avoids heap traffic in the contour loops.
  cplx m[3][3] = {};
  for (const auto& t : linear_.terms()) {
    const cplx w = t.delay == 0.0 ? cplx{1.0, 0.0} : std::exp(-p * t.delay);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m[i][j] += w * t.matrix(i, j);
  }
  for (int i = 0; i < n; ++i) m[i][i] -= p;
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

double QuasiPolynomial::alpha_norm_bound(double c) const {
  double s = 0.0;
  const auto& terms = linear_.terms();
  for (std::size_t k = 0; k < terms.size(); ++k) s += term_norms_[k] * std::exp(-c * terms[k].delay);
  return s;
}

double QuasiPolynomial::root_bound(double c) const { return alpha_norm_bound(c) + 1.0; }

Eigen::MatrixXcd eval_char_matrix(const QuasiPolynomial& qp, cplx p) { return qp.matrix(p); }

namespace {

struct PhaseWalk {
  const QuasiPolynomial& qp;
  int max_depth;
  bool hit_zero = false;
  bool depth_exceeded = false;

  double refine(cplx za, cplx fa, cplx zb, cplx fb, int depth) {
    const double d = std::arg(fb / fa);
    if (std::abs(d) < 0.5 * kPi) return d;
    if (depth >= max_depth) {
      depth_exceeded = true;
      return d;
    }
    const cplx zm = 0.5 * (za + zb);
    const cplx fm = qp.det(zm);
    if (fm == cplx{}) {
      hit_zero = true;
      return 0.0;
    }
    return refine(za, fa, zm, fm, depth + 1) + refine(zm, fm, zb, fb, depth + 1);
  }

  // Accumulated arg change of det along the straight segment a -> b.
  double segment(cplx a, cplx b, int samples) {
    double total = 0.0;
    cplx z_prev = a;
    cplx f_prev = qp.det(a);
    if (f_prev == cplx{}) {
      hit_zero = true;
      return 0.0;
    }
    for (int i = 1; i <= samples; ++i) {
      const cplx z = a + (b - a) * (static_cast<double>(i) / samples);
      const cplx f = qp.det(z);
      if (f == cplx{}) {
        hit_zero = true;
        return total;
      }
      total += refine(z_prev, f_prev, z, f, 0);
      z_prev = z;
      f_prev = f;
    }
    return total;
  }
};

}  // namespace

double verify_dichotomy_line(const QuasiPolynomial& qp, double c) {
  const double omega_max = qp.root_bound(c);
  const double tau_max = qp.linear().max_delay();
  const double periods = omega_max * tau_max / (2.0 * kPi);
  const int n = static_cast<int>(std::clamp(std::max({1024.0, 32.0 * periods, 16.0 * omega_max}), 1024.0,
                                            static_cast<double>(1 << 20)));
  auto mag = [&](double w) { return std::abs(qp.det(cplx{c, w})); };

  std::vector<double> vals(n + 1);
  for (int i = 0; i <= n; ++i) vals[i] = mag(omega_max * i / n);

  double best = *std::min_element(vals.begin(), vals.end());
  if (best == 0.0) return 0.0;

  // Refine around the three smallest local minima.
  std::vector<int> minima;
  for (int i = 0; i <= n; ++i) {
    const bool left = i == 0 || vals[i] <= vals[i - 1];
    const bool right = i == n || vals[i] <= vals[i + 1];
    if (left && right) minima.push_back(i);
  }
  std::partial_sort(minima.begin(), minima.begin() + std::min<std::size_t>(3, minima.size()), minima.end(),
                    [&](int a, int b) { return vals[a] < vals[b]; });
  const double h = omega_max / n;
  for (std::size_t k = 0; k < std::min<std::size_t>(3, minima.size()); ++k) {
    const double w = omega_max * minima[k] / n;
    const double lo = std::max(0.0, w - h);
    const double hi = std::min(omega_max, w + h);
    const auto [arg, val] = detail::golden_min(mag, lo, hi, 1e-13 * std::max(1.0, hi));
    (void)arg;
    best = std::min(best, val);
  }
  return best;
}

RootCount count_roots_right_of(const QuasiPolynomial& qp, double c, const RootCountOptions& options) {
  RootCount result;
  result.half_plane_abscissa = c;

  const double margin = verify_dichotomy_line(qp, c);
  const double floor = options.floor_scale * (1.0 + std::abs(qp.det(cplx{c, 0.0})));
  result.margin = margin;
  if (margin < floor) {
    throw CertError(ErrorCode::OnAxisRoot, "min |det| on Re p = " + std::to_string(c) + " is " +
                                               std::to_string(margin) + " (floor " + std::to_string(floor) + ")");
  }

  const double bound = qp.root_bound(c) * options.enlarge;
  const double right = std::max(bound, c + 1.0);
  const double half_height = bound;
  const cplx z0{c, -half_height};
  const cplx z1{right, -half_height};
  const cplx z2{right, half_height};
  const cplx z3{c, half_height};

  PhaseWalk walk{qp, options.max_bisection_depth};
  auto winding = [&](int samples) {
    double total = walk.segment(z0, z1, samples);
    total += walk.segment(z1, z2, samples);
    total += walk.segment(z2, z3, samples);
    total += walk.segment(z3, z0, samples);
    return total / (2.0 * kPi);
  };

  int samples = options.initial_samples;
  double prev = winding(samples);
  for (int r = 0; r < options.max_refinements; ++r) {
    if (walk.hit_zero) throw CertError(ErrorCode::OnAxisRoot, "contour passes through a root");
    samples *= 2;
    walk.depth_exceeded = false;
    const double next = winding(samples);
    const long a = std::lround(prev);
    const long b = std::lround(next);
    if (!walk.depth_exceeded && a == b && std::abs(prev - a) < 0.25 && std::abs(next - b) < 0.25) {
      if (b < 0) break;
      result.count = static_cast<int>(b);
      result.contour = ContourSpec{c, right, half_height, samples};
      return result;
    }
    prev = next;
  }
  throw CertError(ErrorCode::NoConvergence, "winding number not stable under contour refinement");
}

}  // namespace pbcert
