#pragma once

// Deterministic splittable random streams.
//
// Every stream is a SplitMix64 generator. Substream seeds are derived by
// hashing (parent seed, purpose tag, index) through the SplitMix64
// finalizer, so a stream's draw sequence depends only on its identity,
// never on allocation order or thread schedule. The simulator derives:
//   hash(replication_seed, "shift")      -> environment shift draws
//   hash(replication_seed, "changepoint")-> environment length draws
//   hash(replication_seed, "noise", arm) -> per-arm noise tables
//   hash(replication_seed, "policy")     -> policy-internal randomness
//   hash(replication_seed, "recommend", t)-> checkpoint tie-breaks

#include <cstdint>
#include <cmath>
#include <string_view>
#include <vector>

namespace shiftbai {

// SplitMix64 finalizer (Steele, Lea & Flood).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
  // FNV-1a, folded through the finalizer.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t index = 0) {
  return mix64(base ^ hash_tag(tag) ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (one value per call).
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Uniform on [0, n) without modulo bias (Lemire's method).
  std::uint64_t bounded(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Inclusive discrete uniform on [lo, hi].
  long uniform_int(long lo, long hi) {
    return lo + static_cast<long>(bounded(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t k = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[k]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace shiftbai
