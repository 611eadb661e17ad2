#include "secagg/kernels.hpp"

#include "secagg/error.hpp"
#include "secagg/rng.hpp"

namespace secagg::kernels::serial {

void matvec(std::span<const double> matrix, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out) {
  require(matrix.size() == rows * cols && x.size() == cols && out.size() == rows,
          ErrorCode::dimension_mismatch, "matvec operand shapes");
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = matrix.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

double squared_norm(std::span<const double> x) noexcept {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

void accumulate(std::span<double> dst, std::span<const double> src) noexcept {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void fill_gaussian_rows(std::span<double> out, std::size_t rows, std::size_t cols,
                        std::uint64_t seed, double sigma) {
  require(out.size() == rows * cols, ErrorCode::dimension_mismatch, "gaussian fill shape");
  for (std::size_t r = 0; r < rows; ++r) {
    Rng rng(derive_seed(seed, {r}));
    rng.fill_gaussian(out.subspan(r * cols, cols), sigma);
  }
}

}  // namespace secagg::kernels::serial
