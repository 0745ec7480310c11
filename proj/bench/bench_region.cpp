// Times the OpenMP kernels against their serial references.
//   bench_region [resolution] [workers]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "pbcert/ddesim.hpp"
#include "pbcert/goodwin.hpp"

using namespace pbcert;
namespace gw = pbcert::goodwin;

namespace {

template <class F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 60;
  const int workers = argc > 2 ? std::atoi(argv[2]) : 8;
  const gw::AxisRange tau{0.05, 3.0, n}, lambda{0.05, 1.5, n};

  gw::RegionGrid serial, parallel;
  const double ts = timed([&] { serial = gw::sweep_region_serial(tau, lambda, {}); });
  const double tp = timed([&] { parallel = gw::sweep_region(tau, lambda, {}, workers); });
  bool same = true;
  for (std::size_t k = 0; k < serial.cells.size(); ++k)
    same = same && serial.cells[k].label == parallel.cells[k].label && serial.cells[k].margin == parallel.cells[k].margin;
  std::printf("sweep_region %dx%d: serial %.3f s, %d workers %.3f s, speedup %.2f, identical %s\n", n, n, ts, workers, tp,
              ts / tp, same ? "yes" : "no");

  std::mt19937_64 rng(3);
  std::vector<dde::InvarianceJob> jobs;
  for (int k = 0; k < 64; ++k) {
    const double t = 0.5 + 0.04 * k, l = 0.4 + 0.05 * (k % 8);
    const auto box = dde::invariant_box(1.5, l);
    std::vector<dde::State> h;
    for (int s = 0; s < 4; ++s) {
      dde::State x(3);
      for (int c = 0; c < 3; ++c) x[c] = std::uniform_real_distribution<double>(box.lower[c], box.upper[c])(rng) * 0.98 + 0.01 * (box.lower[c] + box.upper[c]);
      h.push_back(x);
    }
    jobs.push_back({t, l, 1.5, h});
  }
  std::vector<char> rs, rp;
  const double is = timed([&] { rs = dde::invariance_batch_serial(jobs, 0.01, 200.0); });
  const double ip = timed([&] { rp = dde::invariance_batch(jobs, 0.01, 200.0, workers); });
  std::printf("invariance_batch %zu jobs: serial %.3f s, %d workers %.3f s, speedup %.2f, identical %s\n", jobs.size(), is,
              workers, ip, is / ip, rs == rp ? "yes" : "no");
  return 0;
}
