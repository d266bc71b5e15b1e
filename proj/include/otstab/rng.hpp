#pragma once

#include <cstdint>
#include <random>

namespace otstab {

/// Seed plus stream counter. Two samplers built from equal states produce
/// identical draws; distinct counters give independent streams, which is how
/// work is split across shards and sweep points.
struct SamplerState {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;
};

class Rng {
 public:
  explicit Rng(SamplerState state);
  Rng(std::uint64_t seed, std::uint64_t counter) : Rng(SamplerState{seed, counter}) {}

  const SamplerState& state() const noexcept { return state_; }

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double open_uniform() {
    return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
  }

  double normal() { return normal_(engine_); }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  SamplerState state_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Stream counter for a child computation (sweep point, shard, validation
/// set) derived from a parent counter.
std::uint64_t derive_counter(std::uint64_t parent, std::uint64_t child);

}  // namespace otstab
