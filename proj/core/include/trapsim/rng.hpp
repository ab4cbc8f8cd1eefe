#pragma once

#include <cstdint>
#include <random>

namespace trapsim {

// One splitmix64 round. Used to derive independent per-run seeds from
// (master_seed, run index) so results never depend on scheduling order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index) {
  std::uint64_t s = master_seed ^ (0xd1342543de82ef95ULL * (run_index + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

// mt19937_64 wrapper producing uniform doubles by explicit bit manipulation.
// std::uniform_real_distribution is implementation-defined and would break
// the bit-reproducibility contract across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace trapsim
