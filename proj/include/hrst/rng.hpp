#pragma once

#include <cstdint>
#include <limits>

namespace hrst {

/// Identifies a replayable random stream: a master seed plus a stream index.
struct SeedDescriptor {
    std::uint64_t master = 0;
    std::uint64_t stream = 0;

    friend bool operator==(const SeedDescriptor&, const SeedDescriptor&) = default;
};

/// Counter-based random stream.
///
/// Output i is a SplitMix64 finalizer applied to key + (i + 1) * gamma, where
/// the key is derived from the seed descriptor. The i-th value therefore
/// depends only on (master, stream, i), so replications seeded with distinct
/// stream indices are reproducible whatever order they run in.
///
/// Satisfies UniformRandomBitGenerator, so it composes with <random>
/// distributions.
class RandomStream {
  public:
    using result_type = std::uint64_t;

    explicit RandomStream(SeedDescriptor seed);
    RandomStream(std::uint64_t master, std::uint64_t stream)
        : RandomStream(SeedDescriptor{master, stream}) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();
    /// Standard normal (Marsaglia polar method, no cached state).
    double normal();
    /// Poisson variate with the given mean (mean >= 0).
    std::uint64_t poisson(double mean);

    /// Independent child stream, e.g. one per sub-task of a replication.
    RandomStream substream(std::uint64_t index) const;

    /// Skips n outputs in O(1).
    void discard(std::uint64_t n) { counter_ += n; }

    const SeedDescriptor& seed() const { return seed_; }
    std::uint64_t position() const { return counter_; }

  private:
    SeedDescriptor seed_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace hrst
