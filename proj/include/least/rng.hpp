#pragma once

#include <cstdint>
#include <random>

namespace least {

/// Named stream tags so that each stage of a pipeline draws from its own
/// generator; changing how many numbers one stage consumes never shifts another.
enum class Stream : std::uint64_t {
  kGraph = 1,
  kWeights = 2,
  kNoise = 3,
  kInit = 4,
  kBatch = 5,
  kTrial = 6,
};

/// SplitMix64 finaliser, used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x);

/// Portable random source: std::mt19937_64 (whose output sequence is fixed by
/// the standard) with hand-written conversions, because the std distributions
/// are implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}
  Rng(std::uint64_t seed, Stream stream, std::uint64_t substream = 0)
      : engine_(mix64(mix64(seed ^ (static_cast<std::uint64_t>(stream) << 56)) + substream)) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via the Marsaglia polar method.
  double normal();
  /// Exponential with rate 1.
  double exponential();
  /// Standard Gumbel (location 0, scale 1).
  double gumbel();
  /// Number of failures before the first success in Bernoulli(p) trials.
  std::uint64_t geometric(double p);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace least
