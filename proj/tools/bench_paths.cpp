// Benchmark: serial vs OpenMP fractional-Brownian-motion path sampling.
// The two backends must produce bit-identical batches; the benchmark checks
// that while timing both.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fmbsde/config.hpp"
#include "fmbsde/fbm.hpp"

using namespace fmbsde;

namespace {

double time_ms(const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n_paths = 20000;
  std::size_t n_time = 256;
  double hurst = 0.75;
  int reps = 3;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    const std::string val = argv[i + 1];
    if (key == "--paths") n_paths = std::stoul(val);
    else if (key == "--steps") n_time = std::stoul(val);
    else if (key == "--hurst") hurst = std::stod(val);
    else if (key == "--reps") reps = std::stoi(val);
    else {
      std::fprintf(stderr, "usage: bench_paths [--paths N] [--steps N] [--hurst H] [--reps N]\n");
      return 1;
    }
  }

#ifdef _OPENMP
  omp_set_num_threads(configured_threads());
  const int threads = configured_threads();
#else
  const int threads = 1;
#endif

  const TimeGrid grid = TimeGrid::uniform(1.0, n_time);
  const Hurst h{hurst};
  std::printf("fBm sampling benchmark: %zu paths, %zu steps, H = %.3g, %d thread(s)\n", n_paths,
              n_time, hurst, threads);

  fbm::FbmPathBatch serial_batch, omp_batch;
  double serial_best = 1e300, omp_best = 1e300;
  for (int r = 0; r < reps; ++r) {
    serial_best = std::min(serial_best, time_ms([&] {
      serial_batch = fbm::sample_paths(grid, h, n_paths, 42, fbm::Parallelism::Serial);
    }));
    omp_best = std::min(omp_best, time_ms([&] {
      omp_batch = fbm::sample_paths(grid, h, n_paths, 42, fbm::Parallelism::OpenMP);
    }));
  }

  const bool identical = serial_batch.paths == omp_batch.paths;
  std::printf("  serial : %8.1f ms\n", serial_best);
  std::printf("  openmp : %8.1f ms  (speedup %.2fx)\n", omp_best, serial_best / omp_best);
  std::printf("  outputs bit-identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 2;
}
