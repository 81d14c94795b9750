#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "hrst/parallel.hpp"
#include "hrst/rng.hpp"
#include "hrst/stats.hpp"

using namespace hrst;

TEST_CASE("stream output depends only on seed and position") {
    RandomStream a(7, 3), b(7, 3);
    for (int i = 0; i < 100; ++i) {
        CHECK(a() == b());
    }
    RandomStream c(7, 3);
    c.discard(50);
    RandomStream d(7, 3);
    for (int i = 0; i < 50; ++i) d();
    CHECK(c() == d());
    CHECK(c.position() == d.position());
}

TEST_CASE("distinct streams and masters differ") {
    std::set<std::uint64_t> firsts;
    for (std::uint64_t m = 0; m < 10; ++m) {
        for (std::uint64_t s = 0; s < 10; ++s) {
            firsts.insert(RandomStream(m, s)());
        }
    }
    CHECK(firsts.size() == 100);
    CHECK(RandomStream(1, 0).substream(0)() != RandomStream(1, 0)());
}

TEST_CASE("uniform variates lie in range and pass a KS test") {
    RandomStream rng(11, 0);
    std::vector<double> xs;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double v = rng.uniform_open();
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
        xs.push_back(u);
    }
    CHECK(ks_one_sample(xs, [](double x) { return x; }).p_value > 1e-3);
}

TEST_CASE("normal variates have unit variance") {
    RandomStream rng(12, 0);
    std::vector<double> xs;
    for (int i = 0; i < 20000; ++i) xs.push_back(rng.normal());
    const Summary s = summarize(xs);
    CHECK(std::abs(s.mean) < 0.05);
    CHECK(std::abs(s.variance - 1.0) < 0.05);
    CHECK(ks_one_sample(xs, normal_cdf).p_value > 1e-3);
}

TEST_CASE("poisson variates match mean and variance") {
    for (double mean : {0.0, 0.3, 4.0, 50.0, 5000.0}) {
        RandomStream rng(13, static_cast<std::uint64_t>(mean * 10));
        std::vector<double> xs;
        for (int i = 0; i < 4000; ++i) xs.push_back(static_cast<double>(rng.poisson(mean)));
        const Summary s = summarize(xs);
        CAPTURE(mean);
        if (mean == 0.0) {
            CHECK(s.mean == 0.0);
            continue;
        }
        CHECK(std::abs(s.mean - mean) < 5.0 * std::sqrt(mean / 4000.0));
        CHECK(std::abs(s.variance / mean - 1.0) < 0.15);
    }
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(100, 3,
                                 [](std::size_t i) {
                                     if (i == 17) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}
