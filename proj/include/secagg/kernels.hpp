#pragma once

// Data-parallel kernels. Each kernel has a serial reference implementation
// and an OpenMP implementation that must produce bit-identical output: work
// is split so that every output element is computed by exactly one thread in
// the same floating-point order as the serial loop.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>

namespace secagg::kernels {

namespace serial {

void matvec(std::span<const double> matrix, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out);
double squared_norm(std::span<const double> x) noexcept;
void accumulate(std::span<double> dst, std::span<const double> src) noexcept;
// Row r is filled from the substream derive_seed(seed, {r}).
void fill_gaussian_rows(std::span<double> out, std::size_t rows, std::size_t cols,
                        std::uint64_t seed, double sigma);

template <class Fn>
void for_each_index(std::size_t count, Fn&& fn) {
  for (std::size_t i = 0; i < count; ++i) fn(i);
}

}  // namespace serial

namespace omp {

void matvec(std::span<const double> matrix, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out);
double squared_norm(std::span<const double> x) noexcept;
void accumulate(std::span<double> dst, std::span<const double> src) noexcept;
void fill_gaussian_rows(std::span<double> out, std::size_t rows, std::size_t cols,
                        std::uint64_t seed, double sigma);

// Exceptions cannot cross an OpenMP region; the first one is rethrown after
// the loop joins.
template <class Fn>
void for_each_index(std::size_t count, Fn&& fn) {
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace omp

#ifdef SECAGG_USE_OPENMP
namespace active = omp;
#else
namespace active = serial;
#endif

using active::accumulate;
using active::fill_gaussian_rows;
using active::for_each_index;
using active::matvec;
using active::squared_norm;

// Threads available to the active backend (1 for serial).
int concurrency() noexcept;

}  // namespace secagg::kernels
