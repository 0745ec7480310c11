#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pbcert/error.hpp"
#include "pbcert/parabolic.hpp"

using namespace pbcert;
using namespace pbcert::parabolic;

namespace {

DiagonalParabolicModel squares(double alpha, double lipschitz, int j, int count = 12) {
  DiagonalParabolicModel m;
  for (int k = 1; k <= count; ++k) m.eigenvalues.push_back(static_cast<double>(k * k));
  m.alpha = alpha;
  m.lipschitz = lipschitz;
  m.j = j;
  return m;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const CertError& e) {
    return e.code();
  }
  return ErrorCode::NoConvergence;
}

}  // namespace

TEST_CASE("spectral gap examples") {
  const auto pass = spectral_gap_check(squares(0.0, 2.0, 2));
  CHECK(pass.gap == doctest::Approx(2.5));
  CHECK(pass.passed);
  CHECK(pass.nu > 4.0);
  CHECK(pass.nu < 9.0);

  const auto fail = spectral_gap_check(squares(0.5, 2.0, 2));
  CHECK(fail.gap == doctest::Approx(1.0));
  CHECK_FALSE(fail.passed);

  auto flat = squares(0.0, 2.0, 2);
  flat.eigenvalues = {1.0, 4.0, 4.0, 9.0};
  CHECK(code_of([&] { spectral_gap_check(flat); }) == ErrorCode::NoGap);
}

TEST_CASE("resolvent sup norm examples") {
  DiagonalParabolicModel single;
  single.eigenvalues = {1.0};
  CHECK(resolvent_sup_norm(single, 0.5) == doctest::Approx(2.0));
  CHECK(resolvent_sup_norm(squares(0.0, 1.0, 2), 6.5) == doctest::Approx(0.4));
  CHECK(code_of([] { resolvent_sup_norm(squares(0.0, 1.0, 2), 4.0); }) == ErrorCode::OnEigenvalue);
}

TEST_CASE("optimised resolvent condition matches the gap value") {
  for (double alpha : {0.0, 0.25, 0.5, 0.75}) {
    const auto m = squares(alpha, 1.0, 3);
    const auto ref = oracle::golden([&](double nu) { return resolvent_sup_norm(m, nu); }, m.lambda_j(), m.lambda_next());
    const auto rep = spectral_gap_check(m);
    CHECK(1.0 / ref.second == doctest::Approx(rep.gap).epsilon(1e-9));
    CHECK(rep.resolvent_sup == doctest::Approx(ref.second).epsilon(1e-12));
    CHECK(rep.resolvent_sup <= ref.second * (1.0 + 1e-14));
  }
}

TEST_CASE("sup over omega is attained at omega = 0") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> w(-1e3, 1e3);
  const auto m = squares(0.5, 1.0, 2);
  for (double nu : {2.0, 6.5, 30.0}) {
    const double sup = resolvent_sup_norm(m, nu);
    for (int k = 0; k < 200; ++k) CHECK(resolvent_norm_at(m, nu, w(rng)) <= sup * (1.0 + 1e-15));
  }
}

TEST_CASE("random diagonal models: resolvent and gap conditions agree") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> inc(0.0, 3.0), lip(0.05, 2.0);
  std::uniform_int_distribution<int> len(3, 20);
  int agree = 0;
  for (int k = 0; k < 100; ++k) {
    DiagonalParabolicModel m;
    double v = 0.1;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      v += inc(rng);
      m.eigenvalues.push_back(v);
    }
    m.j = std::uniform_int_distribution<int>(1, n - 1)(rng);
    m.lipschitz = lip(rng);
    for (double alpha : {0.0, 0.25, 0.5, 0.75}) {
      m.alpha = alpha;
      const auto rep = spectral_gap_check(m);
      const auto ref = oracle::golden([&](double nu) { return resolvent_sup_norm(m, nu); }, m.lambda_j(), m.lambda_next());
      const bool oracle_pass = ref.second * m.lipschitz < 1.0;
      CHECK(rep.passed == rep.resolvent_passed);
      CHECK(rep.passed == oracle_pass);
      agree += rep.passed == oracle_pass;
    }
  }
  CHECK(agree == 400);
}

TEST_CASE("tail dominance warning") {
  CHECK(spectral_gap_check(squares(0.0, 1.0, 2, 4)).tail_warning);
  CHECK_FALSE(spectral_gap_check(squares(0.0, 1.0, 2, 30)).tail_warning);
}

TEST_CASE("model validation") {
  auto m = squares(0.0, 1.0, 2);
  m.alpha = 1.0;
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::InvalidInput);
  m = squares(0.0, 1.0, 2);
  m.j = 12;
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::InvalidInput);
  m = squares(0.0, 1.0, 2);
  m.eigenvalues[3] = 2.0;
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::InvalidInput);
  m = squares(0.0, -1.0, 2);
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::InvalidInput);
}

TEST_CASE("user-supplied frequency condition") {
  const auto m = squares(0.25, 1.5, 2);
  const double nu = 6.0;
  // The diagonal norm decays like lambda_max^alpha / |omega|.
  const double lead = std::pow(m.eigenvalues.back(), m.alpha);
  const auto rep = check_user_condition([&](double w) { return resolvent_norm_at(m, nu, w); },
                                        [&](double w) { return lead / w; }, nu, m.lipschitz);
  CHECK(rep.extremum == doctest::Approx(resolvent_sup_norm(m, nu)).epsilon(1e-12));
  CHECK(rep.passed == (rep.extremum * m.lipschitz < 1.0));
  CHECK(rep.extremum_omega == doctest::Approx(0.0));
}
