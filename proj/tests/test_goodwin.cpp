#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pbcert/error.hpp"
#include "pbcert/goodwin.hpp"

using namespace pbcert;
using namespace pbcert::goodwin;

namespace {

bool certified(PointLabel l) { return l != PointLabel::Uncertified; }

double smith(double tau, double lambda) { return compute_kappa0() * tau * tau * tau * std::exp(lambda * tau); }

}  // namespace

TEST_CASE("kappa0 and its maximiser") {
  const auto ref = oracle::golden([](double s) { return -3.0 * s * s / std::pow(1.0 + s * s * s, 2); }, 0.0, 3.0);
  CHECK(std::abs(compute_kappa0() + ref.second) < 1e-10);
  CHECK(compute_kappa0() == doctest::Approx(4.0 / 3.0 * std::pow(2.0, -2.0 / 3.0)).epsilon(1e-15));
  CHECK(compute_kappa0() == doctest::Approx(0.8399).epsilon(1e-4));
  CHECK(std::abs(kappa0_argmax() - ref.first) < 1e-6);
  // 1 + s^3 = 3 s^3 at the maximiser
  const double s = kappa0_argmax();
  CHECK(std::abs(1.0 + s * s * s - 3.0 * s * s * s) < 1e-14);
  CHECK(-g_prime(s) == doctest::Approx(compute_kappa0()).epsilon(1e-14));
}

TEST_CASE("g and its derivative") {
  CHECK(g(0.0) == 1.0);
  CHECK(g(1.0) == 0.5);
  CHECK(g(-1.0) == 0.5);
  for (double s : {0.1, 0.7, 1.3, 4.0}) {
    const double h = 1e-6;
    CHECK(g_prime(s) == doctest::Approx((g(s + h) - g(s - h)) / (2 * h)).epsilon(1e-8));
  }
}

TEST_CASE("eta0") {
  const double e1 = solve_eta0(1.0);
  CHECK(e1 > 0.7);
  CHECK(e1 < 0.75);
  CHECK(e1 == doctest::Approx(0.7245).epsilon(1e-4));
  CHECK(std::abs(e1 + std::pow(e1, 4) - 1.0) < 1e-12);
  const double e05 = solve_eta0(0.5);
  CHECK(e05 > 1.55);
  CHECK(e05 < 1.60);
  CHECK(std::abs(e05 + std::pow(e05, 4) - 8.0) < 1e-11);

  double prev = std::numeric_limits<double>::infinity();
  for (double lambda = 0.05; lambda < 20.0; lambda *= 1.3) {
    const double e = solve_eta0(lambda);
    CHECK(std::abs(g(e) - lambda * lambda * lambda * e) < 1e-12);
    CHECK(e < prev);
    prev = e;
    // one sign change of the residual on [0, lambda^-3]
    int changes = 0;
    const double hi = 1.0 / (lambda * lambda * lambda);
    double last = g(0.0);
    for (int i = 1; i <= 2000; ++i) {
      const double x = hi * i / 2000.0;
      const double v = g(x) - lambda * lambda * lambda * x;
      if ((v < 0) != (last < 0)) ++changes;
      last = v;
    }
    CHECK(changes == 1);
  }
  CHECK(solve_eta0(1e3) < 1e-8);
}

TEST_CASE("theta1") {
  const double ref = oracle::bisection([](double t) { return std::tan(t) - std::numbers::pi + 3 * t; }, 1e-9, std::numbers::pi / 3);
  CHECK(solve_theta1(1.0, 1.0) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(solve_theta1(1.0, 1.0) == doctest::Approx(0.742).epsilon(1e-3));
  CHECK(solve_theta1(1e-6, 1e-3) == doctest::Approx(std::numbers::pi / 3).epsilon(1e-6));
  CHECK(solve_theta1(1e4, 1e3) < 1e-6);
  for (double tau : {0.05, 0.4, 1.0, 2.2, 3.0})
    for (double lambda : {0.05, 0.3, 0.9, 1.5}) {
      const double t = solve_theta1(tau, lambda);
      CHECK(t > 0.0);
      CHECK(t < std::numbers::pi / 3);
      CHECK(std::abs(tau * lambda * std::tan(t) - std::numbers::pi + 3 * t) < 1e-12);
    }
}

TEST_CASE("delta_beta") {
  // A one-point range.
  CHECK(sup_g_prime({0.8, 0.8}) == g_prime(0.8));

  // beta = 1.01, lambda = 1: the interior minimum of g' lies below both endpoints.
  const auto r = measurement_range(1.01, 1.0);
  const auto grid = oracle::grid_min([](double s) { return -g_prime(s); }, r.lower, r.upper, 100000);
  const double endpoints = std::max(g_prime(r.lower), g_prime(r.upper));
  CHECK(compute_delta_beta(1.01, 1.0) == doctest::Approx(endpoints).epsilon(1e-14));
  CHECK(-grid.second <= endpoints + 1e-15);
  CHECK(r.lower < kappa0_argmax());
  CHECK(r.upper > kappa0_argmax());

  for (double lambda : {0.05, 0.2, 0.5, 1.0, 1.5}) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double beta : {1.01, 1.05, 1.2, 1.5, 2.0, 3.0}) {
      const double d = compute_delta_beta(beta, lambda);
      CHECK(d < 0.0);
      CHECK(d >= -compute_kappa0());
      CHECK(d >= prev);  // wider range, larger sup
      prev = d;
    }
  }

  try {
    compute_delta_beta(0.5, 1.0);
    FAIL("expected DegenerateRange");
  } catch (const CertError& e) {
    CHECK(e.code() == ErrorCode::DegenerateRange);
  }
}

TEST_CASE("constants bundle") {
  const auto c = compute_constants({2.0, 0.5, 1.5, 0.3});
  CHECK(c.eta0 == solve_eta0(0.5));
  CHECK(c.theta1 == solve_theta1(2.0, 0.5));
  CHECK(c.terminal_threshold == doctest::Approx(-std::pow(0.5 / std::cos(c.theta1), 3)));
  CHECK(c.sigma_beta == doctest::Approx(27.0));
  const auto phi = stationary_point(0.5);
  CHECK(phi[2] == c.eta0);
  CHECK(phi[1] == doctest::Approx(0.5 * c.eta0));
  CHECK(phi[0] == doctest::Approx(0.25 * c.eta0));
}

TEST_CASE("linearisation determinant") {
  const double tau = 1.4, lambda = 0.6;
  const auto qp = linearization(tau, lambda);
  const double gp = g_prime(solve_eta0(lambda));
  for (cplx p : {cplx{0.1, 0.3}, cplx{-0.5, 2.0}, cplx{1.0, -4.0}}) {
    const cplx s = p + lambda;
    const cplx expected = -(s * s * s - gp * std::exp(-p * tau));
    CHECK(std::abs(qp.det(p) - expected) < 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("default rho scan") {
  const double d = compute_delta_beta(1.5, 1.0);
  const auto rhos = default_rho_set(d);
  REQUIRE(rhos.size() == 9);
  CHECK(rhos.front() == doctest::Approx(0.5 * compute_kappa0() + 1e-3));
  CHECK(rhos[1] == doctest::Approx(-d + 1e-9));
  CHECK(rhos.back() == compute_kappa0());
  for (double r : rhos) {
    CHECK(r > -d);
    CHECK(r <= compute_kappa0());
  }
}

TEST_CASE("classification examples") {
  const auto blue = classify_point(0.01, 0.1);
  CHECK(blue.label == PointLabel::StablePoint);
  CHECK(blue.root_count_at_phi0 == 0);
  CHECK(blue.hyperbolicity > 0.0);

  const auto orange = classify_point(2.8, 0.5);
  CHECK(orange.label == PointLabel::StablePeriodicOrbit);
  CHECK(orange.root_count_at_phi0 == 2);
  CHECK(orange.hyperbolicity < 0.0);
  REQUIRE(orange.witness);
  CHECK(orange.witness->rho * 2.8 * 2.8 * 2.8 * std::exp(0.5 * 2.8) < kFrequencyBound);

  // Every admissible rho fails DF1 here.
  CHECK(smith(3.0, 1.5) > 84.2 * 10);
  const auto grey = classify_point(3.0, 1.5);
  CHECK(grey.label == PointLabel::Uncertified);
  CHECK(grey.reason == UncertifiedReason::NoCandidate);
}

TEST_CASE("certified labels carry the right unstable count under denser contours") {
  RootCountOptions dense;
  dense.initial_samples = 256;
  for (auto [tau, lambda] : {std::pair{0.5, 1.0}, {1.0, 0.5}, {2.0, 0.2}, {2.6, 0.45}, {2.9, 0.3}, {2.4, 0.55}}) {
    const auto pc = classify_point(tau, lambda);
    REQUIRE(certified(pc.label));
    const int count = count_roots_right_of(linearization(tau, lambda), 0.0, dense).count;
    CHECK(count == (pc.label == PointLabel::StablePoint ? 0 : 2));
  }
}

TEST_CASE("adding candidates never loses a certificate") {
  ClassifyOptions narrow;
  narrow.beta_set = {1.5};
  ClassifyOptions wide;
  wide.beta_set = {1.05, 1.5, 3.0};
  ClassifyOptions one_rho;
  one_rho.rho_set = std::vector<double>{0.5 * compute_kappa0() + 1e-3};
  ClassifyOptions more_rho;
  more_rho.rho_set = std::vector<double>{0.5 * compute_kappa0() + 1e-3, 0.1, 0.3, 0.8};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ut(0.05, 3.0), ul(0.05, 1.5);
  for (int k = 0; k < 25; ++k) {
    const double tau = ut(rng), lambda = ul(rng);
    if (certified(classify_point(tau, lambda, narrow).label)) CHECK(certified(classify_point(tau, lambda, wide).label));
    if (certified(classify_point(tau, lambda, one_rho).label)) CHECK(certified(classify_point(tau, lambda, more_rho).label));
  }
}

TEST_CASE("region sweep") {
  ClassifyOptions opts;
  const auto one = sweep_region_serial({1.0, 1.0, 1}, {0.5, 0.5, 1}, opts);
  REQUIRE(one.cells.size() == 1);
  const auto pc = classify_point(1.0, 0.5, opts);
  CHECK(one.cells[0].label == pc.label);
  CHECK(one.cells[0].margin == pc.margin);

  const AxisRange tr{0.05, 3.0, 9}, lr{0.05, 1.5, 9};
  const auto serial = sweep_region_serial(tr, lr, opts);
  for (int workers : {1, 3, 8}) {
    const auto par = sweep_region(tr, lr, opts, workers);
    REQUIRE(par.cells.size() == serial.cells.size());
    for (std::size_t i = 0; i < par.cells.size(); ++i) {
      CHECK(par.cells[i].label == serial.cells[i].label);
      CHECK(par.cells[i].margin == serial.cells[i].margin);
    }
  }
  CHECK(serial.cell(0, 0).label == classify_point(0.05, 0.05, opts).label);
  CHECK(serial.cell(8, 8).label == classify_point(3.0, 1.5, opts).label);
}

TEST_CASE("refinement changes the region only next to its boundary") {
  ClassifyOptions opts;
  const int n = 11;
  const AxisRange tc{0.05, 3.0, n}, lc{0.05, 1.5, n};
  const AxisRange tf{0.05, 3.0, 2 * n - 1}, lf{0.05, 1.5, 2 * n - 1};
  const auto coarse = sweep_region_serial(tc, lc, opts);
  const auto fine = sweep_region_serial(tf, lf, opts);
  auto cert = [](const RegionGrid& g, int i, int j) { return certified(g.cell(i, j).label); };
  auto near_boundary = [&](int i, int j) {
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const int a = i + di, b = j + dj;
        if (a < 0 || b < 0 || a >= n || b >= n) continue;
        if (cert(coarse, a, b) != cert(coarse, i, j)) return true;
      }
    return false;
  };
  for (int j = 0; j < 2 * n - 1; ++j)
    for (int i = 0; i < 2 * n - 1; ++i) {
      const int ci = i / 2, cj = j / 2;  // the coarse node at or below
      if (cert(fine, i, j) != cert(coarse, ci, cj)) CHECK(near_boundary(ci, cj));
      if (i % 2 == 0 && j % 2 == 0) CHECK(fine.cell(i, j).label == coarse.cell(ci, cj).label);
    }
}

TEST_CASE("invalid classification input") {
  ClassifyOptions empty;
  empty.beta_set.clear();
  CHECK_THROWS_AS(classify_point(1.0, 1.0, empty), CertError);
  CHECK_THROWS_AS(classify_point(-1.0, 1.0), CertError);
  CHECK_THROWS_AS(solve_eta0(0.0), CertError);
  CHECK_THROWS_AS(solve_theta1(0.0, 1.0), CertError);
}
