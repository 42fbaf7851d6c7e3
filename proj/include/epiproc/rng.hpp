#pragma once

#include <cmath>
#include <cstdint>

namespace epiproc::rng {

/// Deterministic 64-bit generator (splitmix64).
///
/// Every simulation stream in this project is a pure function of a 64-bit
/// seed, so results are bit-identical across platforms and thread counts.
/// The standard <random> distributions are implementation-defined and would
/// break that contract, which is why the distributions below are hand-rolled.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Next raw 64-bit word.
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw on the open interval (0, 1).
  ///
  /// Uses the top 53 bits plus a half-ulp offset, so 0 and 1 are never
  /// returned and log(u) is always finite.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (cosine branch only, no cached spare,
  /// so the draw count per variate is fixed at two words).
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Standard exponential via inversion.
  double exponential() { return -std::log(uniform01()); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n) {
    // Multiply-shift rejection-free mapping is fine here: n is always tiny
    // (sample sizes, grid sizes) relative to 2^64, so bias is < n / 2^64.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

/// Derive an independent child seed from a master seed and a stream index.
///
/// Children are decorrelated by pushing the master seed `index + 1` steps
/// along the splitmix64 Weyl sequence and applying the output mix once.
/// split_seed(s, i) != split_seed(s, j) for i != j below 2^64 - 1 streams.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace epiproc::rng
