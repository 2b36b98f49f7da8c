#pragma once

#include <cstdint>
#include <random>

namespace mlcdf {

/// Identifies one independent random stream. Every (run, level, stratum)
/// triple of an experiment gets its own stream derived from the master seed,
/// so draws do not depend on scheduling or thread count.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t run = 0;
  std::uint32_t level = 0;
  std::uint32_t stratum = 0;
};

/// Reserved stratum slot for the fresh finest-level draws of standard MC.
inline constexpr std::uint32_t kMonteCarloStream = 0xFFFF'FFFFu;

class Substream {
 public:
  explicit Substream(const StreamKey& key) {
    std::seed_seq seq{static_cast<std::uint32_t>(key.seed),
                      static_cast<std::uint32_t>(key.seed >> 32),
                      static_cast<std::uint32_t>(key.run),
                      static_cast<std::uint32_t>(key.run >> 32),
                      key.level,
                      key.stratum};
    engine_.seed(seq);
  }

  /// Uniform on the open interval (0,1), built from the top 53 bits.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mlcdf
