#pragma once

#include <cstdint>
#include <random>

#include "dualscale/numerics/hermitian.hpp"

namespace dualscale {

/// Deterministic random stream addressed by (master_seed, stream_id).
/// Each id gets an independently seeded Mersenne Twister, so sub-streams
/// can be handed to tasks by index regardless of execution order.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master_seed_(master_seed), stream_id_(stream_id), engine_(make_engine(master_seed, stream_id)) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Another stream under the same master seed.
  RngStream substream(std::uint64_t id) const { return RngStream(master_seed_, id); }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  /// Circularly-symmetric CN(0, 1) scalar.
  cd complex_normal() {
    constexpr double kHalfStd = 0.70710678118654752440;
    const double re = normal();
    const double im = normal();
    return {kHalfStd * re, kHalfStd * im};
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  static std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32),
                      0x9e3779b9u};
    return std::mt19937_64(seq);
  }

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace dualscale
