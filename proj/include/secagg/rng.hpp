#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <string_view>

namespace secagg {

// Labels for independent randomness substreams. Every party draws only from
// streams derived from (master seed, its own labels), so one party's
// behaviour never shifts another party's draws.
enum class StreamTag : std::uint64_t {
  shared_projection = 0x5348,
  verifier_private = 0x5650,
  verifier_noise = 0x564e,
  output_noise = 0x4f4e,
  client_shares = 0x4353,
  client_input = 0x4349,
  client_nonce = 0x434e,
  session = 0x5345,
  trial = 0x5452,
  simulator = 0x5349,
};

// SplitMix64 finalizer chained over the path.
std::uint64_t derive_seed(std::uint64_t parent,
                          std::initializer_list<std::uint64_t> path) noexcept;

inline std::uint64_t derive_seed(std::uint64_t parent, StreamTag tag,
                                 std::initializer_list<std::uint64_t> rest = {}) noexcept {
  std::uint64_t s = derive_seed(parent, {static_cast<std::uint64_t>(tag)});
  return rest.size() == 0 ? s : derive_seed(s, rest);
}

// FNV-1a; stable across platforms, used to key per-client substreams.
std::uint64_t hash_label(std::string_view label) noexcept;

/// Seedable generator with a reproducible standard-normal sampler.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Normals come from the Marsaglia polar method (pairs, the second
/// value cached), so a run is bit-reproducible on one platform/libm.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double gaussian();
  double gaussian(double sigma) { return sigma * gaussian(); }
  void fill_gaussian(std::span<double> out, double sigma);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace secagg
