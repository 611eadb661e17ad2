// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "secagg/audit.hpp"
#include "secagg/kernels.hpp"
#include "secagg/norm_verification.hpp"
#include "secagg/rng.hpp"

namespace {

using namespace secagg;

struct MatvecSerial {
  static void run(std::span<const double> m, std::size_t r, std::size_t c, std::span<const double> x,
                  std::span<double> out) {
    kernels::serial::matvec(m, r, c, x, out);
  }
};
struct MatvecOmp {
  static void run(std::span<const double> m, std::size_t r, std::size_t c, std::span<const double> x,
                  std::span<double> out) {
    kernels::omp::matvec(m, r, c, x, out);
  }
};

template <class Impl>
void bm_matvec(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto cols = static_cast<std::size_t>(state.range(1));
  std::vector<double> m(rows * cols);
  std::vector<double> x(cols);
  std::vector<double> out(rows);
  Rng rng(1);
  rng.fill_gaussian(m, 1.0);
  rng.fill_gaussian(x, 1.0);
  for (auto _ : state) {
    Impl::run(m, rows, cols, x, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * cols));
}
BENCHMARK(bm_matvec<MatvecSerial>)->Args({64, 256})->Args({64, 4096})->Args({256, 16384});
BENCHMARK(bm_matvec<MatvecOmp>)->Args({64, 256})->Args({64, 4096})->Args({256, 16384});

template <bool Omp>
void bm_fill_gaussian_rows(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto cols = static_cast<std::size_t>(state.range(1));
  std::vector<double> out(rows * cols);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    if constexpr (Omp) {
      kernels::omp::fill_gaussian_rows(out, rows, cols, ++seed, 0.125);
    } else {
      kernels::serial::fill_gaussian_rows(out, rows, cols, ++seed, 0.125);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * cols));
}
BENCHMARK(bm_fill_gaussian_rows<false>)->Args({64, 1024})->Args({64, 16384});
BENCHMARK(bm_fill_gaussian_rows<true>)->Args({64, 1024})->Args({64, 16384});

// Independent norm-verification sessions, the shape of every Monte Carlo loop.
template <bool Omp>
void bm_trial_loop(benchmark::State& state) {
  CalibrationInputs in;
  in.S = 2;
  in.k = 64;
  in.d = static_cast<int>(state.range(0));
  const ProtocolParams p = calibrate(in).params;
  const BundleFactory bundles = fixed_norm_bundles(p, 1.0, MassPattern::random);
  constexpr std::size_t trials = 64;
  std::vector<char> accept(trials);
  std::uint64_t round = 0;
  for (auto _ : state) {
    ++round;
    auto body = [&](std::size_t t) {
      const std::uint64_t seed = derive_seed(round, {t});
      accept[t] = run_norm_verification(bundles(seed), p, seed).outcome.accept;
    };
    if constexpr (Omp) {
      kernels::omp::for_each_index(trials, body);
    } else {
      kernels::serial::for_each_index(trials, body);
    }
    benchmark::DoNotOptimize(accept.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trials));
}
BENCHMARK(bm_trial_loop<false>)->Arg(32)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_trial_loop<true>)->Arg(32)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
