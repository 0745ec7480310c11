#pragma once

// Characteristic quasi-polynomials of linear systems with discrete delays,
//
//     Delta(p) = sum_k A_k exp(-p tau_k) - p I,
//
// and root counting in right half-planes {Re p > c} by the argument principle.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace pbcert {

using cplx = std::complex<double>;

struct DelayTerm {
  double delay = 0.0;
  Eigen::MatrixXd matrix;
};

/// Linear part x'(t) = sum_k A_k x(t - tau_k). Delays are distinct and >= 0;
/// a zero delay term is the instantaneous part.
class DelayLinearPart {
 public:
  DelayLinearPart(int n, std::vector<DelayTerm> terms);

  int dim() const { return n_; }
  const std::vector<DelayTerm>& terms() const { return terms_; }
  double max_delay() const { return max_delay_; }

 private:
  int n_;
  std::vector<DelayTerm> terms_;
  double max_delay_ = 0.0;
};

class QuasiPolynomial {
 public:
  explicit QuasiPolynomial(DelayLinearPart linear);

  const DelayLinearPart& linear() const { return linear_; }
  int dim() const { return linear_.dim(); }

  /// alpha(p) = sum_k A_k exp(-p tau_k).
  Eigen::MatrixXcd alpha(cplx p) const;
  /// Delta(p) = alpha(p) - p I.
  Eigen::MatrixXcd matrix(cplx p) const;
  /// det Delta(p). Uses cofactor expansion for n <= 3, LU otherwise.
  cplx det(cplx p) const;

  /// Every root with Re p > c satisfies |p| <= sum_k ||A_k|| exp(-c tau_k);
  /// returns that bound plus one.
  double root_bound(double c) const;
  /// sum_k ||A_k||_2 exp(-c tau_k), the bound on ||alpha(p)|| along Re p = c.
  double alpha_norm_bound(double c) const;

 private:
  DelayLinearPart linear_;
  std::vector<double> term_norms_;
};

Eigen::MatrixXcd eval_char_matrix(const QuasiPolynomial& qp, cplx p);

struct ContourSpec {
  double abscissa = 0.0;
  double right = 0.0;
  double half_height = 0.0;
  int samples_per_side = 0;
};

struct RootCount {
  double half_plane_abscissa = 0.0;
  int count = 0;
  /// min |det Delta| sampled on the line Re p = c.
  double margin = 0.0;
  ContourSpec contour;
};

struct RootCountOptions {
  int initial_samples = 64;
  int max_refinements = 8;
  int max_bisection_depth = 40;
  /// OnAxisRoot fires when margin < floor_scale * (1 + |det Delta(c)|).
  double floor_scale = 1e-10;
  /// Enlarges the a-priori rectangle; used by tests to check count stability.
  double enlarge = 1.0;
};

/// Number of roots (with multiplicity) of det Delta in {Re p > c}.
/// Throws CertError(OnAxisRoot) or CertError(NoConvergence).
RootCount count_roots_right_of(const QuasiPolynomial& qp, double c,
                               const RootCountOptions& options = {});

/// inf over sampled omega of |det Delta(c + i omega)| for |omega| <= root_bound(c).
double verify_dichotomy_line(const QuasiPolynomial& qp, double c);

}  // namespace pbcert
