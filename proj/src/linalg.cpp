#include "secagg/linalg.hpp"

#include <cmath>
#include <string>

#include "secagg/error.hpp"
#include "secagg/kernels.hpp"

namespace secagg {

double RealVector::squared_norm() const noexcept { return kernels::squared_norm(values_); }

double RealVector::norm() const noexcept { return std::sqrt(squared_norm()); }

bool RealVector::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

RealVector& RealVector::operator+=(const RealVector& other) {
  require(dim() == other.dim(), ErrorCode::dimension_mismatch,
          "adding vectors of dimension " + std::to_string(dim()) + " and " +
              std::to_string(other.dim()));
  kernels::accumulate(values_, other.values_);
  return *this;
}

RealVector& RealVector::operator-=(const RealVector& other) {
  require(dim() == other.dim(), ErrorCode::dimension_mismatch,
          "subtracting vectors of dimension " + std::to_string(dim()) + " and " +
              std::to_string(other.dim()));
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

RealVector& RealVector::operator*=(double scale) noexcept {
  for (double& v : values_) v *= scale;
  return *this;
}

RealVector operator+(RealVector lhs, const RealVector& rhs) { return lhs += rhs; }
RealVector operator-(RealVector lhs, const RealVector& rhs) { return lhs -= rhs; }
RealVector operator*(double scale, RealVector v) { return v *= scale; }

void check_payload(const RealVector& v, const char* what) {
  require(!v.empty(), ErrorCode::invalid_parameter, std::string(what) + " is empty");
  require(v.all_finite(), ErrorCode::invalid_parameter,
          std::string(what) + " has non-finite entries");
}

double distance(const RealVector& a, const RealVector& b) { return (a - b).norm(); }

ProjectionMatrix::ProjectionMatrix(std::size_t rows, std::size_t cols,
                                   std::vector<double> entries,
                                   ProjectionProvenance provenance)
    : rows_(rows), cols_(cols), entries_(std::move(entries)), provenance_(provenance) {
  require(rows_ >= 1 && cols_ >= 1, ErrorCode::invalid_parameter,
          "projection matrix needs k >= 1 and d >= 1");
  require(entries_.size() == rows_ * cols_, ErrorCode::dimension_mismatch,
          "projection matrix entry count does not match k x d");
}

RealVector ProjectionMatrix::apply(const RealVector& z) const {
  require(z.dim() == cols_, ErrorCode::dimension_mismatch,
          "projecting a vector of dimension " + std::to_string(z.dim()) +
              " with a matrix of width " + std::to_string(cols_));
  RealVector out(rows_);
  kernels::matvec(entries_, rows_, cols_, z.values(), out.values());
  return out;
}

}  // namespace secagg
