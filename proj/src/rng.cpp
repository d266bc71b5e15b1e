#include "otstab/rng.hpp"

namespace otstab {
namespace {

std::seed_seq make_seed_seq(const SamplerState& s) {
  return std::seed_seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                       static_cast<std::uint32_t>(s.counter),
                       static_cast<std::uint32_t>(s.counter >> 32)};
}

}  // namespace

Rng::Rng(SamplerState state) : state_(state) {
  auto seq = make_seed_seq(state);
  engine_.seed(seq);
}

std::uint64_t derive_counter(std::uint64_t parent, std::uint64_t child) {
  // splitmix64 finalizer over the pair; collisions are irrelevant at our scale
  std::uint64_t z = parent * 0x9E3779B97F4A7C15ull + child + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace otstab
