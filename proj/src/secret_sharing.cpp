#include "secagg/secret_sharing.hpp"

#include <algorithm>
#include <cmath>

#include "secagg/core_math.hpp"
#include "secagg/error.hpp"
#include "secagg/rng.hpp"

namespace secagg {

ShareBundle share_vector(const RealVector& x, int S, double sigma_ss, std::uint64_t seed,
                         ClientId client_id) {
  require(S >= 2, ErrorCode::invalid_parameter, "secret sharing needs S >= 2");
  require(sigma_ss > 0, ErrorCode::invalid_parameter, "sigma_ss must be > 0");
  check_payload(x, "secret vector");

  Rng rng(seed);
  ShareBundle bundle;
  bundle.client_id = std::move(client_id);
  bundle.shares.reserve(S);
  bundle.shares.push_back(x);
  for (int i = 1; i < S; ++i) {
    RealVector g(x.dim());
    rng.fill_gaussian(g.values(), sigma_ss);
    bundle.shares[0] -= g;
    bundle.shares.push_back(std::move(g));
  }
  return bundle;
}

RealVector reconstruct(const ShareBundle& bundle) {
  require(bundle.shares.size() >= 2, ErrorCode::invalid_parameter,
          "a bundle needs at least two shares");
  RealVector sum = bundle.shares.front();
  for (std::size_t i = 1; i < bundle.shares.size(); ++i) {
    require(bundle.shares[i].dim() == sum.dim(), ErrorCode::dimension_mismatch,
            "share " + std::to_string(i) + " has dimension " +
                std::to_string(bundle.shares[i].dim()) + ", expected " +
                std::to_string(sum.dim()));
    sum += bundle.shares[i];
  }
  return sum;
}

void check_coalition(const VerifierSet& T, int S, bool allow_empty) {
  require(allow_empty || !T.empty(), ErrorCode::invalid_subset, "coalition is empty");
  require(static_cast<int>(T.size()) < S, ErrorCode::invalid_subset,
          "coalition must exclude at least one verifier");
  for (int i : T) {
    require(i >= 0 && i < S, ErrorCode::invalid_subset,
            "verifier index " + std::to_string(i) + " out of range");
  }
}

SimulatedShareView simulate_share_view(const VerifierSet& T, int S, std::size_t d,
                                       double sigma_ss, std::uint64_t seed) {
  require(S >= 2 && d >= 1 && sigma_ss > 0, ErrorCode::invalid_parameter,
          "simulator needs S >= 2, d >= 1, sigma_ss > 0");
  try {
    check_coalition(T, S, false);
  } catch (const Error& e) {
    throw Error(ErrorCode::invalid_parameter, e.what());
  }

  Rng rng(seed);
  SimulatedShareView view;
  view.subset = T;
  for (int i : T) {
    if (i == 0) continue;
    RealVector g(d);
    rng.fill_gaussian(g.values(), sigma_ss);
    view.messages.emplace(i, std::move(g));
  }
  if (T.contains(0)) {
    const double honest = static_cast<double>(S - static_cast<int>(T.size()));
    RealVector g(d);
    rng.fill_gaussian(g.values(), std::sqrt(honest) * sigma_ss);
    for (const auto& [i, m] : view.messages) g -= m;
    view.messages.emplace(0, std::move(g));
  }
  return view;
}

std::vector<std::int64_t> quantize_share(const RealVector& share, double B, double step) {
  require(B > 0 && step > 0, ErrorCode::invalid_parameter, "B and step must be > 0");
  require(share.all_finite(), ErrorCode::invalid_parameter, "share has non-finite entries");
  const double limit = std::floor(B / step);
  std::vector<std::int64_t> levels(share.dim());
  for (std::size_t i = 0; i < share.dim(); ++i) {
    const double q = std::clamp(std::nearbyint(share[i] / step), -limit, limit);
    levels[i] = static_cast<std::int64_t>(q);
  }
  return levels;
}

RealVector dequantize_share(std::span<const std::int64_t> levels, double step) {
  RealVector out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) out[i] = static_cast<double>(levels[i]) * step;
  return out;
}

RealVector truncate_share(const RealVector& share, double B, double step) {
  return dequantize_share(quantize_share(share, B, step), step);
}

double clamp_probability(double sigma, double B) {
  require(sigma > 0 && B > 0, ErrorCode::invalid_parameter, "sigma and B must be > 0");
  return 2.0 * normal_sf(B / sigma);
}

}  // namespace secagg
