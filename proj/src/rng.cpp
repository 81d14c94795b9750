#include "hrst/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hrst {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

RandomStream::RandomStream(SeedDescriptor seed)
    : seed_(seed), key_(mix64(seed.master ^ mix64(seed.stream * kGamma + 0x632BE59BD9B4E019ULL))) {}

RandomStream::result_type RandomStream::operator()() {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
}

double RandomStream::uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_open() {
    double u;
    do {
        u = uniform();
    } while (u == 0.0);
    return u;
}

double RandomStream::normal() {
    for (;;) {
        const double x = 2.0 * uniform() - 1.0;
        const double y = 2.0 * uniform() - 1.0;
        const double s = x * x + y * y;
        if (s > 0.0 && s < 1.0) {
            return x * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

std::uint64_t RandomStream::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("poisson mean must be finite and nonnegative");
    }
    if (mean == 0.0) {
        return 0;
    }
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(*this);
}

RandomStream RandomStream::substream(std::uint64_t index) const {
    return RandomStream(SeedDescriptor{mix64(key_ ^ 0xD1B54A32D192ED03ULL), index});
}

}  // namespace hrst
