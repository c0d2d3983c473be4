#pragma once

#include <cstdint>
#include <random>

namespace bridgeord {

/// Seeded pseudo-random stream. A stream is identified by (seed, stream_id), so
/// chains and replicates can each own an independent stream without sharing
/// state. Not safe to share across threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  /// Uniform deviate on the open interval (0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace bridgeord
