#include <doctest.h>

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "hrst/render.hpp"

using namespace hrst;

namespace {
std::size_t count(const std::string& s, const std::string& what) {
    std::size_t n = 0;
    for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1)) ++n;
    return n;
}

RadialTree small_tree() {
    return build(make_cloud(1, 1.0, 4.0,
                            {HPoint::polar(1.0, 0.0), HPoint::polar(2.0, 0.4), HPoint::polar(2.5, 2.0),
                             HPoint::polar(3.0, -0.3), HPoint::polar(3.5, 2.3)}));
}
}  // namespace

TEST_CASE("rendering is deterministic and matches the golden file") {
    RenderSpec spec;
    spec.size = 256;
    spec.samples = 8;
    const std::string svg = render_svg(small_tree(), spec);
    CHECK(svg == render_svg(small_tree(), spec));
    std::ifstream in(std::string(HRST_TEST_DATA) + "/small_tree.svg");
    REQUIRE(in);
    std::stringstream golden;
    golden << in.rdbuf();
    CHECK(svg == golden.str());
}

TEST_CASE("an empty tree draws the boundary only") {
    const std::string svg = render_svg(build(make_cloud(1, 1.0, 3.0, {})));
    CHECK(count(svg, "<polyline") == 0);
    CHECK(count(svg, "<circle") == 2);  // boundary and origin
}

TEST_CASE("a radial chain is a straight diameter segment") {
    std::vector<HPoint> pts;
    for (int i = 1; i <= 5; ++i) pts.push_back(HPoint::polar(i, 0.7));
    RenderSpec spec;
    spec.samples = 16;
    for (auto style : {EdgeStyle::Arc, EdgeStyle::Geodesic}) {
        spec.edges = style;
        const std::string svg = render_svg(build(make_cloud(1, 1.0, 6.0, pts)), spec);
        const std::regex pair(R"((-?[0-9.]+),(-?[0-9.]+))");
        std::size_t checked = 0;
        for (std::sregex_iterator it(svg.begin(), svg.end(), pair), end; it != end; ++it) {
            const double x = std::stod((*it)[1]) - 400.0;
            const double y = 400.0 - std::stod((*it)[2]);
            // On the line through the center at angle 0.7, up to print rounding.
            CHECK(std::abs(x * std::sin(0.7) - y * std::cos(0.7)) < 2e-3);
            ++checked;
        }
        CHECK(checked == 5 * 16);
    }
}

TEST_CASE("subtree coloring") {
    const std::string colored = render_svg(small_tree());
    RenderSpec plain;
    plain.color_subtrees = false;
    const std::string black = render_svg(small_tree(), plain);
    CHECK(count(colored, "#1f77b4") > 0);
    CHECK(count(colored, "#d62728") > 0);
    CHECK(count(black, "#1f77b4") == 0);
}

TEST_CASE("invalid specs and dimensions") {
    RenderSpec spec;
    spec.size = 32;
    CHECK_THROWS_AS(render_svg(small_tree(), spec), std::invalid_argument);
    spec = RenderSpec{};
    spec.samples = 1;
    CHECK_THROWS_AS(render_svg(small_tree(), spec), std::invalid_argument);
    RandomStream rng(91, 0);
    CHECK_THROWS_AS(render_svg(build(sample_ball(2, 1.0, 2.0, rng))), std::invalid_argument);
    CHECK(parse_edge_style("arc") == EdgeStyle::Arc);
    CHECK_THROWS_AS(parse_edge_style("spline"), std::invalid_argument);
}
