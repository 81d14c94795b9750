#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hrst/errors.hpp"
#include "hrst/rst.hpp"

using namespace hrst;

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;

PointCloud cloud(int d, double lambda, double R, std::uint64_t master, std::uint64_t stream) {
    RandomStream rng(master, stream);
    return sample_ball(d, lambda, R, rng);
}
}  // namespace

TEST_CASE("parents equal the brute-force argmin") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        const int d = 1 + static_cast<int>(s % 3);
        const PointCloud c = cloud(d, 1.0, d == 1 ? 6.5 : 3.5, 31, s);
        for (bool buckets : {true, false}) {
            const RadialTree t = build(c, BuildOptions{buckets});
            for (std::size_t i = 0; i < t.size(); ++i) {
                REQUIRE(t.parent(i) == brute_force_parent(c, i));
            }
        }
    }
}

TEST_CASE("bucket sizes do not change the tree") {
    const PointCloud c = cloud(1, 3.0, 5.0, 32, 0);
    const RadialTree ref = build(c, BuildOptions{false});
    for (int bits : {0, 1, 3, 12}) {
        const RadialTree t = build(c, BuildOptions{true, bits});
        CHECK(std::equal(t.parents().begin(), t.parents().end(), ref.parents().begin()));
    }
}

TEST_CASE("tree invariants") {
    const RadialTree t = build(cloud(1, 1.0, 7.0, 33, 0));
    std::size_t child_total = 0;
    for (std::size_t v = 0; v < t.size(); ++v) {
        const std::size_t p = t.parent(v);
        if (p != kOrigin) {
            CHECK(p < v);
            CHECK(t.radius(p) <= t.radius(v));
        }
        CHECK(t.ancestor_distance(v) == doctest::Approx(distance(t.point(v), t.point(p))));
        CHECK(t.ancestor_distance(v) <= t.radius(v));
        child_total += t.children(v).size();
    }
    child_total += t.children(kOrigin).size();
    CHECK(child_total == t.size());
    // Every point reaches the origin.
    for (std::size_t v = 0; v < t.size(); v += 97) {
        CHECK(path_to_root(t, v).back() == kOrigin);
    }
}

TEST_CASE("hand-built configuration") {
    // a = (1; 0), b = (2; 5 deg), c = (3; 12 deg) form a chain; the point
    // on the opposite side hangs from the origin.
    const PointCloud c = make_cloud(1, 1.0, 4.0,
                                    {HPoint::polar(1, 0), HPoint::polar(2, 5 * kDeg),
                                     HPoint::polar(3, 12 * kDeg), HPoint::polar(2.5, 180 * kDeg)});
    const RadialTree t = build(c);
    CHECK(t.parent(0) == kOrigin);
    CHECK(t.parent(1) == 0);
    CHECK(t.parent(2) == kOrigin);  // radius order: a, b, opposite, c
    CHECK(t.parent(3) == 1);
    CHECK(t.ancestor_distance(3) == doctest::Approx(1.20214963338).epsilon(1e-10));
    const DescendantSet ds = descendants(t, 0);
    CHECK(ds.members == std::vector<std::size_t>{0, 1, 3});
    CHECK(descendants(t, kOrigin).members.front() == kOrigin);
    CHECK(max_in_degree(t) == 2);
}

TEST_CASE("ties prefer the origin, then the lower index") {
    // Both candidates are equidistant from the last point and closer than
    // the origin, so the lower index wins.
    const PointCloud c = make_cloud(1, 1.0, 5.0,
                                    {HPoint::polar(1, 0.5), HPoint::polar(1, -0.5), HPoint::polar(2, 0)});
    const RadialTree t = build(c);
    CHECK(t.parent(2) == 0);
    CHECK(t.diagnostics().radius_ties == 1);
    CHECK(t.diagnostics().distance_ties >= 1);
    CHECK_THROWS_AS(build(make_cloud(1, 1.0, 5.0, {HPoint::polar(1, 0), HPoint::polar(1, 0)})),
                    DegenerateInputError);
}

TEST_CASE("empty and single-point clouds") {
    const RadialTree e = build(make_cloud(1, 1.0, 3.0, {}));
    CHECK(e.size() == 0);
    CHECK(e.children(kOrigin).empty());
    CHECK(check_planarity_d1(e).empty());
    const RadialTree one = build(make_cloud(1, 1.0, 3.0, {HPoint::polar(2, 1)}));
    CHECK(one.parent(0) == kOrigin);
    CHECK(one.ancestor_distance(0) == 2.0);
}

TEST_CASE("d = 1 trees are planar and a corrupted tree is not") {
    const PointCloud c = cloud(1, 2.0, 5.0, 34, 0);
    const RadialTree t = build(c);
    CHECK(check_planarity_d1(t).empty());

    // Two crossing chords: (1; 0) <- (3; 40 deg) and (1; 40 deg) <- (3; 0).
    const PointCloud x = make_cloud(1, 1.0, 4.0,
                                    {HPoint::polar(1, 0), HPoint::polar(1, 40 * kDeg),
                                     HPoint::polar(3, 0), HPoint::polar(3, 40 * kDeg)});
    const RadialTree bad = RadialTree::from_parents(x, {kOrigin, kOrigin, 1, 0});
    const auto crossings = check_planarity_d1(bad);
    REQUIRE(crossings.size() == 1);
    CHECK(crossings[0] == CrossingPair{2, 3});
}

TEST_CASE("from_parents rejects parents that do not precede") {
    const PointCloud x = make_cloud(1, 1.0, 4.0, {HPoint::polar(1, 0), HPoint::polar(2, 0)});
    CHECK_THROWS_AS(RadialTree::from_parents(x, {1, kOrigin}), std::invalid_argument);
}

TEST_CASE("max pairwise angle") {
    std::vector<Direction> dirs{Direction{1, 0}, Direction{0, 1}, Direction{-1, 0}};
    CHECK(max_pairwise_angle(dirs) == doctest::Approx(std::numbers::pi));
    std::vector<Direction> small{Direction{1, 0}, Direction{std::cos(0.2), std::sin(0.2)},
                                 Direction{std::cos(-0.1), std::sin(-0.1)}};
    CHECK(max_pairwise_angle(small) == doctest::Approx(0.3));
    CHECK(max_pairwise_angle(std::vector<Direction>{}) == 0.0);
}

TEST_CASE("straightness profile of a radial chain has no violations") {
    std::vector<HPoint> pts;
    for (int i = 1; i <= 8; ++i) pts.push_back(HPoint::polar(i * 0.9, 0.7));
    const RadialTree t = build(make_cloud(1, 1.0, 8.0, pts));
    const StraightnessProfile p = straightness_profile(t, 0.5, {1, 3, 5, 7}, 7);
    for (std::size_t b = 0; b < 3; ++b) {
        CHECK(p.flagged[b] == 0);
        CHECK(p.fraction(b) == 0.0);
    }
    CHECK(p.vertices[0] > 0);
}

TEST_CASE("tree JSON round trip and tamper detection") {
    const RadialTree t = build(cloud(1, 1.0, 4.0, 35, 0));
    const nlohmann::json j = to_json(t);
    const RadialTree back = tree_from_json(nlohmann::json::parse(j.dump()));
    CHECK(std::equal(back.parents().begin(), back.parents().end(), t.parents().begin()));
    CHECK(to_json(back).dump() == j.dump());
    nlohmann::json bad = j;
    bad["ancestorDistance"][0] = 0.123;
    CHECK_THROWS_AS(tree_from_json(bad), VerificationError);
}
