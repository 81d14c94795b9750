#include "hrst/arcs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hrst {
namespace {

constexpr double kDegenerateTheta = 1e-12;

Direction slerp(const Direction& u, const Direction& v, double theta, double phi) {
    const double s = std::sin(theta);
    const double a = std::sin((1.0 - phi) * theta) / s;
    const double b = std::sin(phi * theta) / s;
    Direction w(u.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = a * u[i] + b * v[i];
    }
    return normalized(w);
}

}  // namespace

Arc Arc::between(const HPoint& from, const HPoint& to, std::size_t from_id, std::size_t to_id) {
    Arc arc;
    arc.child = from_id;
    arc.parent = to_id;
    arc.child_point = from;
    arc.parent_point = to;
    if (!from.is_origin() && !to.is_origin()) {
        arc.theta = angle_between(from.direction, to.direction);
        if (arc.theta >= std::numbers::pi - kDegenerateTheta) {
            throw std::invalid_argument("arc endpoints are antipodal");
        }
    }
    return arc;
}

Arc edge_arc(const RadialTree& tree, std::size_t v) {
    if (v == kOrigin || v >= tree.size()) {
        throw std::out_of_range("edge arcs start at a Poisson point");
    }
    const std::size_t p = tree.parent(v);
    return Arc::between(tree.point(v), tree.point(p), v, p);
}

double arc_phi(const Arc& arc, double t) {
    if (t <= 0.0 || arc.theta < kDegenerateTheta) {
        return 0.0;
    }
    if (t >= 1.0) {
        return 1.0;
    }
    // Coordinates of (1 - t) sinh(r1) u1 + t sinh(r2) u2 in the plane of
    // u1, u2, with u1 as the first axis.
    const double a = (1.0 - t) * std::sinh(arc.child_point.radius);
    const double b = t * std::sinh(arc.parent_point.radius);
    const double angle = std::atan2(b * std::sin(arc.theta), a + b * std::cos(arc.theta));
    return std::clamp(angle / arc.theta, 0.0, 1.0);
}

HPoint arc_point(const Arc& arc, double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("arc parameter must lie in [0, 1]");
    }
    if (t == 0.0) {
        return arc.child_point;
    }
    if (t == 1.0) {
        return arc.parent_point;
    }
    const double r = (1.0 - t) * arc.child_point.radius + t * arc.parent_point.radius;
    if (arc.parent_point.is_origin() || arc.theta < kDegenerateTheta) {
        return HPoint{r, arc.child_point.direction};
    }
    if (arc.child_point.is_origin()) {
        return HPoint{r, arc.parent_point.direction};
    }
    return HPoint{r, slerp(arc.child_point.direction, arc.parent_point.direction, arc.theta,
                           arc_phi(arc, t))};
}

std::optional<LevelCrossing> level_crossing(const Arc& arc, double r) {
    const double r1 = arc.child_point.radius;
    const double r2 = arc.parent_point.radius;
    if (!(std::min(r1, r2) < r && r < std::max(r1, r2))) {
        return std::nullopt;
    }
    LevelCrossing c;
    c.level = r;
    c.t = (r - r1) / (r2 - r1);
    c.location = arc_point(arc, c.t);
    c.location.radius = r;
    c.arc = arc;
    return c;
}

namespace {

// First point index with radius > r.
std::size_t first_above(const RadialTree& tree, double r) {
    const auto& pts = tree.cloud().points;
    return static_cast<std::size_t>(
        std::upper_bound(pts.begin(), pts.end(), r,
                         [](double level, const HPoint& p) { return level < p.radius; }) -
        pts.begin());
}

}  // namespace

std::vector<LevelCrossing> level_set(const RadialTree& tree, double r) {
    if (!(r > 0.0)) {
        throw std::invalid_argument("level must be positive");
    }
    std::vector<LevelCrossing> out;
    for (std::size_t v = first_above(tree, r); v < tree.size(); ++v) {
        if (tree.radius(tree.parent(v)) < r) {
            if (auto c = level_crossing(edge_arc(tree, v), r)) {
                out.push_back(std::move(*c));
            }
        }
    }
    return out;
}

std::size_t level_count(const RadialTree& tree, double r) {
    std::size_t count = 0;
    for (std::size_t v = first_above(tree, r); v < tree.size(); ++v) {
        count += tree.radius(tree.parent(v)) < r ? 1 : 0;
    }
    return count;
}

}  // namespace hrst
