#include "hrst/render.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hrst/arcs.hpp"

namespace hrst {

namespace {

constexpr std::array<const char*, 10> kPalette{
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
};

std::string fixed(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    // Avoid "-0.000".
    std::string s(buf);
    return s == "-0.000" ? "0.000" : s;
}

}  // namespace

EdgeStyle parse_edge_style(const std::string& name) {
    if (name == "arc") return EdgeStyle::Arc;
    if (name == "geodesic") return EdgeStyle::Geodesic;
    throw std::invalid_argument("unknown edge style '" + name + "' (expected arc or geodesic)");
}

std::string to_string(EdgeStyle style) { return style == EdgeStyle::Arc ? "arc" : "geodesic"; }

void RenderSpec::validate() const {
    if (size < 64) throw std::invalid_argument("render size must be >= 64");
    if (samples < 2) throw std::invalid_argument("render samples must be >= 2");
    if (!(stroke > 0.0) || !std::isfinite(stroke)) throw std::invalid_argument("render stroke must be positive");
}

std::string render_svg(const RadialTree& tree, const RenderSpec& spec) {
    spec.validate();
    if (tree.dim() != 1) {
        throw std::invalid_argument("rendering needs a d = 1 tree");
    }
    const double half = spec.size / 2.0;
    const double scale = half - 2.0 * spec.stroke - 2.0;
    auto px = [&](const HPoint& p) {
        const Direction x = to_poincare(p);
        return fixed(half + scale * x[0]) + "," + fixed(half - scale * x[1]);
    };

    // Subtree of each point: the child of the root above it.
    const std::size_t n = tree.size();
    std::vector<std::size_t> branch(n, 0);
    std::size_t next_branch = 0;
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t p = tree.parent(v);
        branch[v] = p == kOrigin ? next_branch++ : branch[p];
    }

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.size) +
           "\" height=\"" + std::to_string(spec.size) + "\" viewBox=\"0 0 " +
           std::to_string(spec.size) + " " + std::to_string(spec.size) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<circle cx=\"" + fixed(half) + "\" cy=\"" + fixed(half) + "\" r=\"" + fixed(scale) +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"" + fixed(spec.stroke) + "\"/>\n";
    svg += "<g fill=\"none\" stroke-width=\"" + fixed(spec.stroke) + "\" stroke-linecap=\"round\">\n";
    for (std::size_t v = 0; v < n; ++v) {
        const char* color = spec.color_subtrees ? kPalette[branch[v] % kPalette.size()] : "black";
        svg += "<polyline stroke=\"" + std::string(color) + "\" points=\"";
        const Arc arc = spec.edges == EdgeStyle::Arc ? edge_arc(tree, v) : Arc{};
        for (int k = 0; k < spec.samples; ++k) {
            const double t = static_cast<double>(k) / (spec.samples - 1);
            const HPoint p = spec.edges == EdgeStyle::Arc
                                 ? arc_point(arc, t)
                                 : geodesic_point(tree.point(v), tree.point(tree.parent(v)), t);
            svg += (k ? " " : "") + px(p);
        }
        svg += "\"/>\n";
    }
    svg += "</g>\n<g stroke=\"none\">\n";
    const std::string dot = fixed(1.5 * spec.stroke);
    for (std::size_t v = 0; v < n; ++v) {
        const char* color = spec.color_subtrees ? kPalette[branch[v] % kPalette.size()] : "black";
        const Direction x = to_poincare(tree.point(v));
        svg += "<circle cx=\"" + fixed(half + scale * x[0]) + "\" cy=\"" + fixed(half - scale * x[1]) +
               "\" r=\"" + dot + "\" fill=\"" + color + "\"/>\n";
    }
    svg += "<circle cx=\"" + fixed(half) + "\" cy=\"" + fixed(half) + "\" r=\"" +
           fixed(2.0 * spec.stroke + 1.0) + "\" fill=\"black\"/>\n";
    svg += "</g>\n</svg>\n";
    return svg;
}

}  // namespace hrst
