#pragma once

#include <cmath>
#include <cstdint>

namespace splitting {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stream tags, one per estimator, so estimators sharing a seed draw
/// unrelated numbers.
enum class Stream : std::uint64_t {
  tree = 1,
  rep8,
  rep12,
  psi,
  qadic,
  poisson_qadic,
  f2,
  lln,
  clt,
};

/// Identifies one independent random stream: a master seed, a stream tag
/// (one per estimator or study) and a replica counter. Two keys differing in
/// any component give unrelated generators, so replicas can run in any order
/// on any number of threads.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t replica = 0;

  StreamKey() = default;
  StreamKey(std::uint64_t seed_, std::uint64_t stream_, std::uint64_t replica_)
      : seed(seed_), stream(stream_), replica(replica_) {}
  StreamKey(std::uint64_t seed_, Stream stream_, std::uint64_t replica_)
      : StreamKey(seed_, static_cast<std::uint64_t>(stream_), replica_) {}
};

/// xoshiro256** seeded from a StreamKey through splitmix64.
class Rng {
 public:
  explicit Rng(StreamKey key) {
    std::uint64_t h = splitmix64(key.seed);
    h = splitmix64(h ^ (key.stream * 0xD1B54A32D192ED03ULL));
    h = splitmix64(h ^ (key.replica * 0x8CB92BA72F3D8DD7ULL));
    for (auto& w : s_) {
      h += 0x9E3779B97F4A7C15ULL;
      w = splitmix64(h);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  /// Unit-rate exponential.
  double exponential() { return -std::log(uniform_open()); }

  /// Gamma(k, 1) for integer shape k, as a sum of k exponentials.
  double gamma_int(int k) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += exponential();
    return s;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4]{};
};

}  // namespace splitting
