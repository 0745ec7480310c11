#include "pbcert/ddesim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pbcert/error.hpp"
#include "pbcert/goodwin.hpp"

namespace pbcert::dde {

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

}  // namespace

void DdeProblem::validate() const {
  if (dim <= 0) throw CertError(ErrorCode::InvalidInput, "dimension must be positive");
  if (!(delay > 0.0) || !std::isfinite(delay)) throw CertError(ErrorCode::InvalidInput, "delay must be positive");
  if (!rhs) throw CertError(ErrorCode::InvalidInput, "right-hand side is empty");
  if (history.size() < 2) throw CertError(ErrorCode::InvalidInput, "history needs at least two samples");
  for (const auto& s : history) {
    if (static_cast<int>(s.size()) != dim) throw CertError(ErrorCode::InvalidInput, "history sample has wrong dimension");
    for (double v : s)
      if (!std::isfinite(v)) throw CertError(ErrorCode::InvalidInput, "history sample is not finite");
  }
}

State DdeProblem::history_at(double s) const {
  const int last = static_cast<int>(history.size()) - 1;
  const double u = std::clamp((s + delay) / delay, 0.0, 1.0) * last;
  int k = std::min(static_cast<int>(std::floor(u)), last - 1);
  const double frac = u - k;
  if (rule == HistoryRule::Constant) return frac >= 1.0 ? history[k + 1] : history[k];
  State out(dim);
  for (int i = 0; i < dim; ++i) out[i] = (1.0 - frac) * history[k][i] + frac * history[k + 1][i];
  return out;
}

DdeTrajectory::DdeTrajectory(DdeProblem problem, double step, int nodes)
    : problem_(std::move(problem)), step_(step), nodes_(nodes),
      states_(static_cast<std::size_t>(nodes) * problem_.dim), derivs_(states_.size()) {}

void DdeTrajectory::hermite(int m, double theta, std::span<double> out) const {
  const double t2 = theta * theta, t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  auto x0 = state(m), x1 = state(m + 1), f0 = derivative(m), f1 = derivative(m + 1);
  for (int i = 0; i < dim(); ++i)
    out[i] = h00 * x0[i] + h10 * step_ * f0[i] + h01 * x1[i] + h11 * step_ * f1[i];
}

State DdeTrajectory::dense(double t) const {
  if (t <= 0.0) return problem_.history_at(t);
  const double u = t / step_;
  int m = std::min(static_cast<int>(std::floor(u)), nodes_ - 2);
  State out(dim());
  hermite(m, std::min(u - m, 1.0), out);
  return out;
}

DdeTrajectory integrate(const DdeProblem& problem, double h, double T) {
  problem.validate();
  if (!(h > 0.0) || !std::isfinite(h)) throw CertError(ErrorCode::InvalidInput, "step must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw CertError(ErrorCode::InvalidInput, "horizon must be positive");
  const double tau = problem.delay;
  const int k = static_cast<int>(std::ceil(tau / h - 1e-9));
  const double step = tau / k;
  const long steps = static_cast<long>(std::ceil(T / step - 1e-9));
  if (steps > 50'000'000L) throw CertError(ErrorCode::InvalidInput, "too many steps");

  DdeTrajectory traj(problem, step, static_cast<int>(steps) + 1);
  const int n = problem.dim;
  State xd(n), stage(n), k2(n), k3(n), k4(n);

  // Delayed value at t_j + c h, j the current node; index j - k + c in mesh units.
  auto delayed = [&](int j, double c, std::span<double> out) {
    const int m = j - k;
    if (m < 0 || (m == 0 && c == 0.0)) {
      const State hv = problem.history_at((m + c) * step);
      std::copy(hv.begin(), hv.end(), out.begin());
    } else if (c == 0.0) {
      auto s = traj.state(m);
      std::copy(s.begin(), s.end(), out.begin());
    } else {
      traj.hermite(m, c, out);
    }
  };
  auto x_at = [&](int j) { return std::span<double>(traj.states_.data() + static_cast<std::size_t>(j) * n, n); };
  auto f_at = [&](int j) { return std::span<double>(traj.derivs_.data() + static_cast<std::size_t>(j) * n, n); };
  auto fail = [&](int j) {
    std::ostringstream os;
    os << "state became non-finite at t = " << j * step;
    throw CertError(ErrorCode::NonfiniteState, os.str());
  };
  auto finite = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };

  const State x0 = problem.history_at(0.0);
  std::copy(x0.begin(), x0.end(), x_at(0).begin());
  for (int j = 0; j <= steps; ++j) {
    auto x = x_at(j);
    auto f = f_at(j);
    delayed(j, 0.0, xd);
    problem.rhs(x, xd, f);
    if (!finite(f)) fail(j);
    if (j == steps) break;

    // RK4 stages; the delayed argument at c = 1/2 and 1 lies on interval j - k.
    delayed(j, 0.5, xd);
    for (int i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * step * f[i];
    problem.rhs(stage, xd, k2);
    for (int i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * step * k2[i];
    problem.rhs(stage, xd, k3);
    delayed(j, 1.0, xd);
    for (int i = 0; i < n; ++i) stage[i] = x[i] + step * k3[i];
    problem.rhs(stage, xd, k4);
    auto next = x_at(j + 1);
    for (int i = 0; i < n; ++i) next[i] = x[i] + step / 6.0 * (f[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    if (!finite(next)) fail(j + 1);
  }
  return traj;
}

std::string to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::ConvergedToPoint: return "ConvergedToPoint";
    case VerdictKind::ConvergedToPeriodicOrbit: return "ConvergedToPeriodicOrbit";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

OrbitVerdict detect_limit(const DdeTrajectory& traj, std::span<const double> phi0, const SectionSpec& section,
                          const DetectOptions& options) {
  OrbitVerdict v;
  const int last = traj.nodes() - 1;
  if (static_cast<int>(phi0.size()) != traj.dim() || last < 2) return v;
  if (section.component < 0 || section.component >= traj.dim() || section.direction == 0) return v;

  // Terminal approach to phi0: small now and no larger than over an earlier window.
  const double T = traj.horizon();
  const double window = std::min(0.5 * T, 10.0 * traj.delay());
  const double df = distance(traj.state(last), phi0);
  double earlier = 0.0;
  for (int i = 0; i <= last; ++i) {
    const double t = traj.time(i);
    if (t >= T - window && t <= T - 0.5 * window) earlier = std::max(earlier, distance(traj.state(i), phi0));
  }
  if (df < options.point_tolerance && df <= earlier) {
    v.kind = VerdictKind::ConvergedToPoint;
    auto s = traj.state(last);
    v.limit_state.assign(s.begin(), s.end());
    v.final_distance = df;
    return v;
  }
  v.final_distance = df;

  // Section crossings: bracket on the mesh, then Newton on the Hermite cubic.
  const int c = section.component;
  const double dir = section.direction > 0 ? 1.0 : -1.0;
  std::vector<double> times;
  std::vector<State> points;
  State buf(traj.dim());
  for (int i = 0; i < last; ++i) {
    const double a = dir * (traj.state(i)[c] - section.level);
    const double b = dir * (traj.state(i + 1)[c] - section.level);
    if (!(a < 0.0 && b >= 0.0)) continue;
    double theta = a / (a - b);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 30; ++it) {
      traj.hermite(i, theta, buf);
      const double r = dir * (buf[c] - section.level);
      if (r < 0.0) lo = theta; else hi = theta;
      // derivative of the cubic in theta
      const double t2 = theta * theta;
      const double d00 = 6 * t2 - 6 * theta, d10 = 3 * t2 - 4 * theta + 1, d01 = -d00, d11 = 3 * t2 - 2 * theta;
      const double dr = dir * (d00 * traj.state(i)[c] + d10 * traj.step() * traj.derivative(i)[c] +
                               d01 * traj.state(i + 1)[c] + d11 * traj.step() * traj.derivative(i + 1)[c]);
      double next = dr != 0.0 ? theta - r / dr : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - theta) < 1e-15) { theta = next; break; }
      theta = next;
    }
    traj.hermite(i, theta, buf);
    times.push_back(traj.time(i) + theta * traj.step());
    points.push_back(buf);
  }
  v.returns = static_cast<int>(times.size());
  v.return_times = times;
  if (v.returns < options.min_returns + 2) return v;

  // Distances between successive return points and their ratios.
  std::vector<double> d(points.size() - 1);
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, norm(p));
  scale = std::max(scale, 1e-300);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) d[i] = distance(points[i + 1], points[i]);
  const double floor = options.noise_floor * scale;

  // Latest run of min_returns consecutive contractions with every distance above the floor.
  int run_end = -1;
  double worst = 0.0;
  for (int e = static_cast<int>(d.size()) - 1; e >= options.min_returns && run_end < 0; --e) {
    bool ok = true;
    double w = 0.0;
    for (int i = e - options.min_returns; i < e && ok; ++i) {
      if (!(d[i] > floor && d[i + 1] > floor)) { ok = false; break; }
      const double r = d[i + 1] / d[i];
      w = std::max(w, r);
      ok = r < options.ratio_threshold;
    }
    if (ok) { run_end = e; worst = w; }
  }
  if (run_end < 0) return v;
  if (!(d.back() < options.converged_tolerance * scale)) return v;
  if (df < 10.0 * options.point_tolerance) return v;

  // Period: mean of the last return intervals after the transient skip.
  int first = 0;
  while (first < v.returns && times[first] < options.transient_skip) ++first;
  const int intervals = std::min(5, v.returns - 1 - first);
  if (intervals < 1) return v;
  v.period = (times.back() - times[v.returns - 1 - intervals]) / intervals;
  v.contraction_ratio = worst;
  v.section_anchor = points.back();
  v.kind = VerdictKind::ConvergedToPeriodicOrbit;
  return v;
}

DdeProblem goodwin_problem(double tau, double lambda, std::vector<State> history) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw CertError(ErrorCode::InvalidInput, "lambda must be positive");
  DdeProblem p;
  p.dim = 3;
  p.delay = tau;
  p.history = std::move(history);
  p.rhs = [lambda](std::span<const double> x, std::span<const double> xd, std::span<double> dx) {
    dx[0] = goodwin::g(xd[2]) - lambda * x[0];
    dx[1] = x[0] - lambda * x[1];
    dx[2] = x[1] - lambda * x[2];
  };
  p.validate();
  return p;
}

DdeProblem goodwin_problem(double tau, double lambda, const State& constant_history) {
  return goodwin_problem(tau, lambda, std::vector<State>{constant_history, constant_history});
}

BoxBounds invariant_box(double beta, double lambda) {
  if (!(beta > 1.0)) throw CertError(ErrorCode::InvalidInput, "beta must exceed 1");
  if (!(lambda > 0.0)) throw CertError(ErrorCode::InvalidInput, "lambda must be positive");
  const double sigma = goodwin::measurement_range(beta, lambda).upper;
  const double gs = goodwin::g(sigma);
  BoxBounds box{State(3), State(3)};
  for (int j = 1; j <= 3; ++j) {
    box.lower[j - 1] = gs / std::pow(beta * lambda, j);
    box.upper[j - 1] = std::pow(beta / lambda, j) * goodwin::g(0.0);
  }
  return box;
}

bool check_invariance(const DdeTrajectory& traj, double beta, double lambda) {
  if (traj.dim() != 3) throw CertError(ErrorCode::InvalidInput, "invariance check needs a 3-dimensional trajectory");
  const BoxBounds box = invariant_box(beta, lambda);
  auto inside = [&](std::span<const double> x) {
    for (int j = 0; j < 3; ++j)
      if (!(x[j] >= 0.0 && x[j] > box.lower[j] && x[j] < box.upper[j])) return false;
    return true;
  };
  for (const auto& s : traj.problem().history)
    if (!inside(s)) throw CertError(ErrorCode::InvalidInput, "initial history is not inside W_beta");
  for (int i = 0; i < traj.nodes(); ++i)
    if (!inside(traj.state(i))) return false;
  return true;
}

namespace {

char run_job(const InvarianceJob& job, double h, double horizon_in_delays) {
  const auto traj = integrate(goodwin_problem(job.tau, job.lambda, job.history), h, horizon_in_delays * job.tau);
  return check_invariance(traj, job.beta, job.lambda) ? 1 : 0;
}

}  // namespace

std::vector<char> invariance_batch(const std::vector<InvarianceJob>& jobs, double h, double horizon_in_delays,
                                   int workers) {
  if (workers < 1) throw CertError(ErrorCode::InvalidInput, "worker count must be at least 1");
  std::vector<char> out(jobs.size(), 0);
  std::vector<std::exception_ptr> errors(jobs.size());
  const long count = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long i = 0; i < count; ++i) {
    try {
      out[i] = run_job(jobs[i], h, horizon_in_delays);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<char> invariance_batch_serial(const std::vector<InvarianceJob>& jobs, double h,
                                          double horizon_in_delays) {
  std::vector<char> out;
  out.reserve(jobs.size());
  for (const auto& job : jobs) out.push_back(run_job(job, h, horizon_in_delays));
  return out;
}

void write_csv(const DdeTrajectory& traj, std::ostream& out) {
  out << "t";
  for (int i = 0; i < traj.dim(); ++i) out << ",x" << i + 1;
  out << '\n';
  const auto old = out.precision(12);
  for (int j = 0; j < traj.nodes(); ++j) {
    out << traj.time(j);
    for (double v : traj.state(j)) out << ',' << v;
    out << '\n';
  }
  out.precision(old);
}

}  // namespace pbcert::dde
