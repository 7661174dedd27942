#pragma once

#include <cstdint>
#include <string_view>

namespace f3a {

// SplitMix64 stream. Every random quantity in the library (sensing bank,
// desk embeddings, synthetic tasks) is drawn from this generator so results
// are bit-identical across platforms and language bindings.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // next() * 2^-64; may round up to exactly 1.0 for the largest outputs.
  double uniform01() { return static_cast<double>(next()) * 0x1p-64; }

  // Box-Muller on two uniform draws, cosine branch only (no cached second
  // variate, so the draw count per call is always two).
  double gaussian();

  // next() mod bound. bound must be positive.
  uint64_t below(uint64_t bound) { return next() % bound; }

  // Fair coin from the top bit.
  bool coin() { return (next() >> 63) != 0; }

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

// FNV-1a 64-bit hash of raw bytes.
uint64_t fnv1a64(std::string_view bytes);

}  // namespace f3a
