#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hrst/rst.hpp"

namespace hrst {

/// The path from `child` (t = 0) to `parent` (t = 1) along which the radius
/// is affine in t and the direction moves along the minor great-circle arc
/// between the endpoint directions.
///
/// The direction at t is the direction of the Euclidean combination
/// (1 - t) sinh(r1) u1 + t sinh(r2) u2, so phi(t) in [0, 1] is monotone and
/// the distance to the origin is monotone along the path.
struct Arc {
    std::size_t child = kOrigin;
    std::size_t parent = kOrigin;
    HPoint child_point;
    HPoint parent_point;
    double theta = 0.0;  // angle between the endpoint directions

    /// Arc between two arbitrary points; throws std::invalid_argument for
    /// antipodal endpoint directions.
    static Arc between(const HPoint& from, const HPoint& to, std::size_t from_id = kOrigin,
                       std::size_t to_id = kOrigin);
};

/// Arc of the edge from point v to its ancestor.
Arc edge_arc(const RadialTree& tree, std::size_t v);

/// Fraction of theta covered at parameter t.
double arc_phi(const Arc& arc, double t);

HPoint arc_point(const Arc& arc, double t);

/// An element of the level set L_r: a point on S(r) together with the arc
/// producing it. Coincident locations on distinct arcs stay distinct.
struct LevelCrossing {
    double level = 0.0;
    double t = 0.0;
    HPoint location;
    Arc arc;

    std::size_t lower() const { return arc.child; }   // the arc's child vertex
    std::size_t upper() const { return arc.parent; }  // the arc's parent vertex
};

/// Crossing of S(r) for min(r1, r2) < r < max(r1, r2); none otherwise
/// (including exactly at an endpoint radius).
std::optional<LevelCrossing> level_crossing(const Arc& arc, double r);

/// All crossings of S(r) by tree edges, ordered by child vertex.
std::vector<LevelCrossing> level_set(const RadialTree& tree, double r);

/// Number of tree edges straddling S(r); equals level_set(tree, r).size().
std::size_t level_count(const RadialTree& tree, double r);

}  // namespace hrst
