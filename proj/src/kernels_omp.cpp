#include "secagg/kernels.hpp"

#include <omp.h>

#include "secagg/error.hpp"
#include "secagg/rng.hpp"

namespace secagg::kernels {

namespace omp {

void matvec(std::span<const double> matrix, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out) {
  require(matrix.size() == rows * cols && x.size() == cols && out.size() == rows,
          ErrorCode::dimension_mismatch, "matvec operand shapes");
  const auto n = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols > 16384)
  for (std::int64_t r = 0; r < n; ++r) {
    const double* row = matrix.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

// Reductions keep the serial order; splitting them would change rounding.
double squared_norm(std::span<const double> x) noexcept { return serial::squared_norm(x); }

void accumulate(std::span<double> dst, std::span<const double> src) noexcept {
  const auto n = static_cast<std::int64_t>(dst.size());
#pragma omp parallel for simd schedule(static) if (n > 65536)
  for (std::int64_t i = 0; i < n; ++i) dst[i] += src[i];
}

void fill_gaussian_rows(std::span<double> out, std::size_t rows, std::size_t cols,
                        std::uint64_t seed, double sigma) {
  require(out.size() == rows * cols, ErrorCode::dimension_mismatch, "gaussian fill shape");
  const auto n = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols > 16384)
  for (std::int64_t r = 0; r < n; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    rng.fill_gaussian(out.subspan(r * cols, cols), sigma);
  }
}

}  // namespace omp

int concurrency() noexcept {
#ifdef SECAGG_USE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace secagg::kernels
