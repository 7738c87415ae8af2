// Times the matrix and elementwise kernels in serial vs OpenMP mode.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "rfsum/kernels.hpp"
#include "rfsum/rng.hpp"

using namespace rfsum;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  // one warmup, then best of reps
  fn();
  double best = 1e30;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

std::vector<double> random_vec(int n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

int main() {
  Rng rng(42);
  std::printf("threads available: %d\n\n", kernels::thread_count());
  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial (ms)", "openmp (ms)", "speedup");

  const int reps = 5;
  for (int n : {64, 128, 256, 512}) {
    auto a = random_vec(n * n, rng);
    auto b = random_vec(n * n, rng);
    std::vector<double> c(static_cast<size_t>(n) * n);
    double ts = time_ms([&] { kernels::mm_nn_serial(a.data(), b.data(), c.data(), n, n, n); }, reps);
    kernels::set_mode(kernels::Mode::Parallel);
    double tp = time_ms([&] { kernels::mm_nn(a.data(), b.data(), c.data(), n, n, n); }, reps);
    char label[64];
    std::snprintf(label, sizeof label, "mm_nn %dx%dx%d", n, n, n);
    std::printf("%-28s %12.3f %12.3f %8.2fx\n", label, ts, tp, ts / tp);
  }

  for (int n : {1 << 16, 1 << 20}) {
    auto a = random_vec(n, rng);
    std::vector<double> out(n);
    double ts = time_ms([&] { kernels::vtanh_serial(a.data(), out.data(), n); }, reps);
    kernels::set_mode(kernels::Mode::Parallel);
    double tp = time_ms([&] { kernels::vtanh(a.data(), out.data(), n); }, reps);
    char label[64];
    std::snprintf(label, sizeof label, "vtanh n=%d", n);
    std::printf("%-28s %12.3f %12.3f %8.2fx\n", label, ts, tp, ts / tp);
  }
  return 0;
}
