#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace secagg {

/// Dense real vector carrying a protocol payload (secret, share, projection).
class RealVector {
 public:
  RealVector() = default;
  explicit RealVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  explicit RealVector(std::vector<double> values) : values_(std::move(values)) {}
  RealVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  double squared_norm() const noexcept;
  double norm() const noexcept;
  bool all_finite() const noexcept;

  // Both throw dimension-mismatch.
  RealVector& operator+=(const RealVector& other);
  RealVector& operator-=(const RealVector& other);
  RealVector& operator*=(double scale) noexcept;

  friend bool operator==(const RealVector&, const RealVector&) = default;

 private:
  std::vector<double> values_;
};

RealVector operator+(RealVector lhs, const RealVector& rhs);
RealVector operator-(RealVector lhs, const RealVector& rhs);
RealVector operator*(double scale, RealVector v);

// Throws invalid-parameter on empty or non-finite input.
void check_payload(const RealVector& v, const char* what);

double distance(const RealVector& a, const RealVector& b);

enum class ProjectionProvenance : std::uint8_t { verifier0_private, shared_randomness };

/// k x d projection matrix, row-major.
class ProjectionMatrix {
 public:
  ProjectionMatrix() = default;
  ProjectionMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries,
                   ProjectionProvenance provenance);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  ProjectionProvenance provenance() const noexcept { return provenance_; }
  std::span<const double> entries() const noexcept { return entries_; }
  double at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  // W * z; throws dimension-mismatch when z.dim() != cols().
  RealVector apply(const RealVector& z) const;

  friend bool operator==(const ProjectionMatrix& a, const ProjectionMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
  ProjectionProvenance provenance_ = ProjectionProvenance::shared_randomness;
};

}  // namespace secagg
