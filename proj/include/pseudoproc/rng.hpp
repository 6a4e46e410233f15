#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pseudoproc {

/// Deterministic random stream. All randomness in the library flows through
/// this class so that a (seed, label) pair fully determines every result.
/// Uniform and normal variates are generated from raw 64-bit words rather
/// than std::*_distribution, which keeps streams identical across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on the open interval (0,1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box–Muller; one spare value cached.
  double normal();

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stable seed derivation: identical inputs give identical streams on every
/// platform and run, independent of scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t stream);

}  // namespace pseudoproc
