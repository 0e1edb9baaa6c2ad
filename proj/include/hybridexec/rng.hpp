#pragma once

// Counter-based deterministic RNG with per-path substreams.  Results are
// independent of scheduling order: path p always replays the same stream.

#include <cmath>
#include <cstdint>

namespace hybridexec {

struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1].
  double uniform() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }
};

// Standard normals by Box-Muller on the SplitMix64 stream; fully
// deterministic across platforms (no std::normal_distribution).
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t substream)
      : rng_(mix(seed, substream)) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.uniform();
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t substream) {
    SplitMix64 s(seed ^ (substream * 0xD2B74407B1CE6E93ULL));
    s.next();
    return s.next();
  }

  SplitMix64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hybridexec
