#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hrst/arcs.hpp"

using namespace hrst;
using doctest::Approx;

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

TEST_CASE("arc direction matches the oracle") {
    const Arc arc = Arc::between(HPoint::polar(3, 0), HPoint::polar(2, 20 * kDeg));
    // Angle of (1 - t) sinh(r1) u1 + t sinh(r2) u2 at 50 digits.
    CHECK(arc_phi(arc, 0.5) == Approx(0.26393502037520996387).epsilon(1e-14));
    const HPoint mid = arc_point(arc, 0.5);
    CHECK(direction_angle(mid.direction) / kDeg == Approx(5.2787004075041992775).epsilon(1e-13));
    CHECK(mid.radius == Approx(2.5).epsilon(1e-15));
}

TEST_CASE("endpoints are reproduced exactly") {
    const HPoint a = HPoint::polar(4.2, 0.3), b = HPoint::polar(1.7, -0.9);
    const Arc arc = Arc::between(a, b);
    const HPoint p0 = arc_point(arc, 0.0), p1 = arc_point(arc, 1.0);
    CHECK(p0.radius == a.radius);
    CHECK(p1.radius == b.radius);
    CHECK(p0.direction[0] == a.direction[0]);
    CHECK(p0.direction[1] == a.direction[1]);
    CHECK(p1.direction[0] == b.direction[0]);
    CHECK(p1.direction[1] == b.direction[1]);
}

TEST_CASE("radius is affine and angles add up along random arcs") {
    RandomStream rng(41, 0);
    for (int i = 0; i < 500; ++i) {
        const int d = 1 + i % 2;
        const HPoint a{6 * rng.uniform(), random_direction(d, rng)};
        const HPoint b{6 * rng.uniform(), random_direction(d, rng)};
        if (angle_between(a.direction, b.direction) > std::numbers::pi - 1e-6) continue;
        const Arc arc = Arc::between(a, b);
        double last_phi = 0.0;
        for (double t = 0.05; t < 1.0; t += 0.1) {
            const HPoint p = arc_point(arc, t);
            CHECK(p.radius == Approx((1 - t) * a.radius + t * b.radius).epsilon(1e-12));
            const double split = angle_between(a.direction, p.direction) +
                                 angle_between(p.direction, b.direction);
            CHECK(std::abs(split - arc.theta) <= 1e-9);
            const double phi = arc_phi(arc, t);
            CHECK(phi >= last_phi - 1e-15);
            last_phi = phi;
        }
    }
}

TEST_CASE("antipodal and degenerate arcs") {
    CHECK_THROWS_AS(Arc::between(HPoint::polar(1, 0), HPoint::polar(2, std::numbers::pi)),
                    std::invalid_argument);
    // A parent at the origin gives a radial segment.
    const Arc radial = Arc::between(HPoint::polar(3, 1.0), HPoint::origin(1));
    const HPoint mid = arc_point(radial, 0.5);
    CHECK(mid.radius == Approx(1.5));
    CHECK(direction_angle(mid.direction) == Approx(1.0));
}

TEST_CASE("level crossings are strict and exact") {
    const Arc arc = Arc::between(HPoint::polar(3, 0.2), HPoint::polar(1, -0.4));
    const auto x = level_crossing(arc, 2.2);
    REQUIRE(x.has_value());
    CHECK(x->location.radius == 2.2);
    CHECK(x->t == Approx(0.4));
    CHECK_FALSE(level_crossing(arc, 3.0).has_value());
    CHECK_FALSE(level_crossing(arc, 1.0).has_value());
    CHECK_FALSE(level_crossing(arc, 3.5).has_value());
}

TEST_CASE("level sets of a random tree") {
    RandomStream rng(42, 0);
    const RadialTree tree = build(sample_ball(1, 1.0, 7.0, rng));
    for (double r : {0.5, 2.0, 3.3, 5.0, 6.9}) {
        const auto set = level_set(tree, r);
        CHECK(set.size() == level_count(tree, r));
        std::size_t straddle = 0;
        for (std::size_t v = 0; v < tree.size(); ++v) {
            straddle += tree.radius(tree.parent(v)) < r && r < tree.radius(v);
        }
        CHECK(set.size() == straddle);
        for (std::size_t k = 0; k < set.size(); ++k) {
            CHECK(set[k].location.radius == r);
            CHECK(set[k].upper() == tree.parent(set[k].lower()));
            if (k) CHECK(set[k - 1].lower() < set[k].lower());
        }
    }
}
