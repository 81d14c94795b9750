#pragma once

#include <string>

#include "hrst/rst.hpp"

namespace hrst {

enum class EdgeStyle {
    /// The radius-monotone arc of each edge.
    Arc,
    /// The hyperbolic geodesic: a diameter or a circle arc orthogonal to
    /// the boundary.
    Geodesic,
};

EdgeStyle parse_edge_style(const std::string& name);
std::string to_string(EdgeStyle style);

struct RenderSpec {
    int size = 800;  // pixels per side
    EdgeStyle edges = EdgeStyle::Geodesic;
    /// One color per subtree hanging from the origin.
    bool color_subtrees = true;
    int samples = 32;  // polyline points per edge
    double stroke = 1.0;
    /// Throws std::invalid_argument unless size >= 64, samples >= 2 and
    /// stroke > 0.
    void validate() const;
};

/// SVG of a d = 1 tree in the Poincare disc. Coordinates are printed with a
/// fixed number of decimals, so equal inputs give equal bytes. Throws
/// std::invalid_argument for d >= 2.
std::string render_svg(const RadialTree& tree, const RenderSpec& spec = {});

}  // namespace hrst
