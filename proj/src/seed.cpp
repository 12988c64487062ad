#include "inclab/seed.hpp"

namespace inclab {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;
constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

SeedStream::SeedStream(std::uint64_t root, std::vector<std::uint64_t> path)
    : root_(root), path_(std::move(path)) {}

SeedStream SeedStream::child(std::uint64_t tag) const {
  auto path = path_;
  path.push_back(tag);
  return SeedStream(root_, std::move(path));
}

std::uint64_t SeedStream::key() const {
  // Length is folded in so that (root, [0]) and (root, []) differ.
  std::uint64_t h = splitmix64(root_ ^ 0x6A09E667F3BCC908ull);
  for (std::uint64_t p : path_) h = splitmix64(h ^ splitmix64(p + 0x3C6EF372FE94F82Bull));
  return splitmix64(h + path_.size());
}

nlohmann::json to_json(const SeedStream& s) { return {{"root", s.root()}, {"path", s.path()}}; }

RandomEngine::RandomEngine(const SeedStream& seed) {
  const std::uint64_t k = seed.key();
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

RandomEngine::result_type RandomEngine::operator()() {
  if (used_ >= 4) {
    block_ = philox4x32({static_cast<std::uint32_t>(counter_),
                         static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u},
                        key_);
    ++counter_;
    used_ = 0;
  }
  const std::uint64_t hi = block_[used_];
  const std::uint64_t lo = block_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

double RandomEngine::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double RandomEngine::normal() { return gauss_(*this); }

}  // namespace inclab
