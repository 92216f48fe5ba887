// Serial reference kernels against the OpenMP versions, plus one full
// Lanczos build on the conjecture test matrix.

#include <benchmark/benchmark.h>

#include <vector>

#include "rsbl/kernels.hpp"
#include "rsbl/lanczos.hpp"
#include "rsbl/linalg.hpp"
#include "rsbl/robustness.hpp"

namespace {

Eigen::MatrixXd random_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t stream) {
  rsbl::RngStream rng(11, stream);
  return rsbl::gaussian_matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), rng).eigen();
}

Eigen::MatrixXd orthonormal(Eigen::Index rows, Eigen::Index cols) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_block(rows, cols, 1));
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

template <bool Serial>
void BM_ProjectOut(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::Index k = state.range(1);
  const Eigen::MatrixXd v = orthonormal(n, k);
  const Eigen::MatrixXd w0 = random_block(n, 8, 2);
  for (auto _ : state) {
    Eigen::MatrixXd w = w0;
    if constexpr (Serial) {
      benchmark::DoNotOptimize(rsbl::kernels::serial::project_out(v, w));
    } else {
      benchmark::DoNotOptimize(rsbl::kernels::project_out(v, w));
    }
  }
  state.SetItemsProcessed(state.iterations() * n * k * 8 * 4);
}

template <bool Serial>
void BM_BlockDot(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd v = random_block(n, 64, 3);
  const Eigen::MatrixXd w = random_block(n, 8, 4);
  for (auto _ : state) {
    if constexpr (Serial) {
      benchmark::DoNotOptimize(rsbl::kernels::serial::block_dot(v, w));
    } else {
      benchmark::DoNotOptimize(rsbl::kernels::block_dot(v, w));
    }
  }
}

template <bool Serial>
void BM_ScaleRows(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  std::vector<double> d(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(i) / static_cast<double>(n);
  const Eigen::MatrixXd x = random_block(n, 16, 5);
  for (auto _ : state) {
    if constexpr (Serial) {
      benchmark::DoNotOptimize(rsbl::kernels::serial::scale_rows(d, x));
    } else {
      benchmark::DoNotOptimize(rsbl::kernels::scale_rows(d, x));
    }
  }
}

void BM_ConjectureTrial(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto spec = rsbl::robustness::conjecture_spec(rsbl::robustness::Placement::Exterior, 1000,
                                                      60 / d, d, 1.0, 0.01);
  rsbl::RngStream rng(3, 4);
  const auto omega = rsbl::gaussian_matrix(1000, 60 / d, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rsbl::robustness::tan_angle_krylov(spec, omega, d));
  }
}

}  // namespace

BENCHMARK(BM_ProjectOut<true>)->Args({2000, 64})->Args({20000, 64})->Args({20000, 256});
BENCHMARK(BM_ProjectOut<false>)->Args({2000, 64})->Args({20000, 64})->Args({20000, 256});
BENCHMARK(BM_BlockDot<true>)->Arg(2000)->Arg(50000);
BENCHMARK(BM_BlockDot<false>)->Arg(2000)->Arg(50000);
BENCHMARK(BM_ScaleRows<true>)->Arg(2000)->Arg(100000);
BENCHMARK(BM_ScaleRows<false>)->Arg(2000)->Arg(100000);
BENCHMARK(BM_ConjectureTrial)->Arg(2)->Arg(4);

BENCHMARK_MAIN();
