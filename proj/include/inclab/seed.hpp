#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <json.hpp>

namespace inclab {

// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Root seed plus a path naming the consumer (replica index, module tag).
// Streams are keyed by a hash of (root, path), so two consumers never
// share state and replica results do not depend on scheduling.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t root = 0, std::vector<std::uint64_t> path = {});

  SeedStream child(std::uint64_t tag) const;

  std::uint64_t root() const { return root_; }
  const std::vector<std::uint64_t>& path() const { return path_; }
  std::uint64_t key() const;

  bool operator==(const SeedStream&) const = default;

 private:
  std::uint64_t root_;
  std::vector<std::uint64_t> path_;
};

nlohmann::json to_json(const SeedStream& s);

// Stable consumer tags so that unrelated modules never collide.
namespace stream_tag {
inline constexpr std::uint64_t kPoints = 0x50'4f'49'4e;    // "POIN"
inline constexpr std::uint64_t kPoissonCount = 0x45'54'41;  // "ETA"
inline constexpr std::uint64_t kSheet = 0x53'48'45'45;      // "SHEE"
inline constexpr std::uint64_t kPath = 0x50'41'54'48;       // "PATH"
inline constexpr std::uint64_t kCampaign = 0x43'41'4d'50;   // "CAMP"
}  // namespace stream_tag

// Counter-based engine over one SeedStream. Satisfies
// UniformRandomBitGenerator, so <random> distributions accept it.
class RandomEngine {
 public:
  using result_type = std::uint64_t;

  explicit RandomEngine(const SeedStream& seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // 53-bit uniform on [0, 1).
  double uniform();
  double normal();

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  std::normal_distribution<double> gauss_;
};

}  // namespace inclab
