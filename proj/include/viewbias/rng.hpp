#pragma once

#include <cstdint>
#include <random>

namespace viewbias {

// Deterministic random source. The distributions are written out here rather
// than taken from <random> because the standard leaves their algorithms
// implementation-defined, and generated files must hash identically across
// toolchains.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // Independent stream for item `index` of a run seeded with `seed`.
    static Rng for_index(uint64_t seed, uint64_t index);

    uint64_t next_u64() { return engine_(); }
    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n).
    uint64_t below(uint64_t n);
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

uint64_t splitmix64(uint64_t x);

} // namespace viewbias
