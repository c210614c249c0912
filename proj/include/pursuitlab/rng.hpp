#pragma once

#include <cstdint>
#include <random>

namespace pursuitlab {

/// splitmix64 finalizer; used to derive engine seeds from stream coordinates.
std::uint64_t mix64(std::uint64_t x);

/// Names one reproducible random stream. Two streams with the same
/// (master_seed, stream_id) produce identical sequences on every platform.
struct RngStream {
  std::uint64_t master_seed{0};
  std::uint64_t stream_id{0};

  /// Independent child stream, e.g. one each for matrix, signal and noise.
  RngStream substream(std::uint64_t tag) const {
    return {master_seed, mix64(stream_id ^ mix64(tag + 0x9e3779b97f4a7c15ULL))};
  }

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Sampler bound to a stream. mt19937_64 is fully specified by the standard;
/// uniforms and normals are derived from its raw output by fixed transforms,
/// so every draw consumes a fixed number of engine words.
class Rng {
 public:
  explicit Rng(const RngStream& stream);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal by Box-Muller (two engine words per variate).
  double normal();

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Uniform sign.
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pursuitlab
