#pragma once
#include <cstdint>
#include <random>
#include <string>

namespace fcvsr {

// FNV-1a, used to derive per-parameter seeds from names so initialization is
// independent of creation order.
inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  // splitmix64 finalizer over the combined words
  uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  double uniform(double a, double b) {
    std::uniform_real_distribution<double> d(a, b);
    return d(eng_);
  }
  double normal(double mean, double stddev) {
    std::normal_distribution<double> d(mean, stddev);
    return d(eng_);
  }
  uint64_t next_u64() { return eng_(); }
  // integer in [0, n)
  int64_t below(int64_t n) {
    std::uniform_int_distribution<int64_t> d(0, n - 1);
    return d(eng_);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace fcvsr
