#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "secagg/linalg.hpp"

namespace secagg {

using ClientId = std::string;
using VerifierSet = std::set<int>;

/// The S additive shares produced by one prover. shares[0] goes to verifier 0
/// and equals x minus the Gaussian shares; shares[i], i >= 1, are the Gaussians.
struct ShareBundle {
  ClientId client_id;
  std::vector<RealVector> shares;

  std::size_t num_verifiers() const noexcept { return shares.size(); }
  std::size_t dim() const noexcept { return shares.empty() ? 0 : shares.front().dim(); }
};

/// Messages a coalition T of verifiers would see, produced without the secret.
struct SimulatedShareView {
  VerifierSet subset;
  std::map<int, RealVector> messages;
};

/// Gaussian additive sharing: shares 1..S-1 i.i.d. N(0, sigma_ss^2 I),
/// share 0 = x - sum of the others. Deterministic in seed. ||x|| <= 1 is the
/// honest prover's contract and is not enforced here.
ShareBundle share_vector(const RealVector& x, int S, double sigma_ss, std::uint64_t seed,
                         ClientId client_id = {});

/// Coordinatewise sum of all shares.
RealVector reconstruct(const ShareBundle& bundle);

/// Simulator for the sharing step as seen by T (a non-empty proper subset of
/// {0..S-1}). Verifiers i != 0 get fresh N(0, sigma_ss^2 I); if 0 is in T it
/// gets g - sum_{i in T, i != 0} message_i with g ~ N(0, (S-|T|) sigma_ss^2 I).
SimulatedShareView simulate_share_view(const VerifierSet& T, int S, std::size_t d,
                                       double sigma_ss, std::uint64_t seed);

/// Clamp to [-B, B] and round to the nearest multiple of step. Grid points
/// beyond B are never produced, which makes the map idempotent.
RealVector truncate_share(const RealVector& share, double B, double step);

/// Integer grid coordinates of truncate_share(share, B, step).
std::vector<std::int64_t> quantize_share(const RealVector& share, double B, double step);
RealVector dequantize_share(std::span<const std::int64_t> levels, double step);

/// Probability that one N(0, sigma^2) coordinate is clamped at +-B: 2 Phi(-B / sigma).
double clamp_probability(double sigma, double B);

// Throws invalid-subset unless T is a proper subset of {0..S-1} with in-range indices.
void check_coalition(const VerifierSet& T, int S, bool allow_empty);

}  // namespace secagg
