#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "secagg/audit.hpp"
#include "secagg/core_math.hpp"
#include "secagg/scenario.hpp"

namespace secagg {

enum class ExperimentKind { completeness, soundness, robustness, correctness };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

struct GridPoint {
  int k = 64;
  int S = 2;
  int d = 32;
  double beta = 0.01;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Parses "k=16,64;S=2,3;d=32;beta=0.05,0.01" into the cartesian product, in
/// k-major order. Unlisted axes take `defaults`. Throws config-invalid on an
/// empty grid, an unknown axis or a malformed value.
std::vector<GridPoint> parse_grid(std::string_view text, const GridPoint& defaults = {});

struct ExperimentOptions {
  std::int64_t trials = 1000;
  std::uint64_t seed = 1;
  double eps = 1.0;
  double delta = 1e-5;
  // Soundness: share-sum norm as a multiple of rho. Robustness: adversary norm
  // as a multiple of rho.
  double norm_factor = 1.0;
  MassPattern pattern = MassPattern::spread;
  int n = 20;  // population for robustness and correctness
  ThresholdMode mode = ThresholdMode::tail_bound;
};

struct ExperimentRow {
  ExperimentKind kind = ExperimentKind::completeness;
  GridPoint point;
  ExperimentOptions options;
  double tau = 0.0;
  double rho = 0.0;  // infinite when the soundness bound is vacuous
  BinomialEstimate estimate;
  double bound = 0.0;
  bool pass = false;
  // Robustness: largest change of the aggregate caused by an adversary that
  // was excluded. Correctness: largest |sum - true sum| over sessions with
  // J* = [n]. Zero when no such session occurred.
  double max_deviation = 0.0;
  std::int64_t deviation_sessions = 0;
};

/// Calibrated parameters for a grid point. When the tail-bound soundness
/// radius is vacuous (k <= 4 ln(1/beta)) and allow_vacuous_soundness is set,
/// tau is still calibrated and rho is +infinity; otherwise that case throws
/// infeasible-parameters.
ProtocolParams grid_params(const GridPoint& point, const ExperimentOptions& options,
                           bool allow_vacuous_soundness, int n = 1);

/// completeness: accept rate of ||x|| = 1, pass iff rate >= 1 - beta - 3 SE.
/// soundness: accept rate of share-sums of norm norm_factor * rho, pass iff
///   rate <= beta + 3 SE.
/// robustness: n - 1 honest clients and one norm-inflating adversary of norm
///   norm_factor * rho; event "adversary accepted with share-sum norm > rho",
///   pass iff rate <= beta + 3 SE and excluded adversaries never move the sum.
/// correctness: n honest clients; event J* = [n], pass iff
///   rate >= 1 - n beta - 3 SE and the sum error is at most 1e-6.
ExperimentRow run_experiment(ExperimentKind kind, const GridPoint& point,
                             const ExperimentOptions& options);

inline constexpr std::string_view kExperimentSchema = "secagg-experiment/1";

void write_experiment_csv(std::ostream& out, std::span<const ExperimentRow> rows);

}  // namespace secagg
