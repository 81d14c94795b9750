#include "hrst/deviations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hrst/errors.hpp"
#include "hrst/format.hpp"

namespace hrst {
namespace {

constexpr double kPi = std::numbers::pi;

double angle(const HPoint& a, const HPoint& b) {
    return angle_between(a.direction, b.direction);
}

// Point of an arc at radius `level`, endpoints allowed.
LevelCrossing crossing_at(const Arc& arc, double level) {
    const double r1 = arc.child_point.radius;
    const double r2 = arc.parent_point.radius;
    LevelCrossing c;
    c.level = level;
    c.t = r1 == r2 ? 0.0 : std::clamp((level - r1) / (r2 - r1), 0.0, 1.0);
    c.location = arc_point(arc, c.t);
    c.location.radius = level;
    c.arc = arc;
    return c;
}

// Crossings of S(level) by the edges of root's subtree; radius(root) <= level.
void collect_crossings(const RadialTree& tree, std::size_t root, double level,
                       std::vector<LevelCrossing>& out) {
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
        const std::size_t a = stack.back();
        stack.pop_back();
        for (std::size_t b : tree.children(a)) {
            if (tree.radius(b) <= level) {
                stack.push_back(b);
            } else if (auto c = level_crossing(edge_arc(tree, b), level)) {
                out.push_back(std::move(*c));
            }
        }
    }
}

}  // namespace

void HorizonConfig::validate() const {
    if (!(censor_margin > 0.0)) {
        throw std::invalid_argument("censor margin must be positive");
    }
    if (!(horizon_radius - censor_margin > 0.0)) {
        throw std::invalid_argument("horizon radius must exceed the censor margin");
    }
    if (!(cap_scale > 0.0)) {
        throw std::invalid_argument("cap scale must be positive");
    }
}

double path_deviation(const RadialTree& tree, std::size_t v, double level) {
    double acc = 0.0;
    std::size_t cur = v;
    while (tree.radius(cur) > level) {
        const std::size_t par = tree.parent(cur);
        if (tree.radius(par) < level) {
            return acc + angle(tree.point(cur), crossing_at(edge_arc(tree, cur), level).location);
        }
        acc += angle(tree.point(cur), tree.point(par));
        cur = par;
    }
    return acc;
}

double cfd(const RadialTree& tree, const LevelCrossing& from, double to_level) {
    if (to_level > from.level) {
        throw std::invalid_argument("CFD target level lies above the starting crossing");
    }
    if (to_level == from.level) {
        return 0.0;
    }
    const std::size_t p = from.arc.parent;
    if (tree.radius(p) < to_level) {
        return angle(from.location, crossing_at(from.arc, to_level).location);
    }
    return angle(from.location, tree.point(p)) + path_deviation(tree, p, to_level);
}

LevelCrossing descend(const RadialTree& tree, const LevelCrossing& from, double level) {
    if (level > from.level) {
        throw std::invalid_argument("descend target lies above the starting crossing");
    }
    if (level == from.level) {
        return from;
    }
    const std::size_t p = from.arc.parent;
    if (tree.radius(p) < level) {
        return crossing_at(from.arc, level);
    }
    std::size_t cur = p;
    while (tree.radius(tree.parent(cur)) >= level) {
        cur = tree.parent(cur);
    }
    return crossing_at(edge_arc(tree, cur), level);
}

double telescoping_check(const RadialTree& tree, const LevelCrossing& top, double mid,
                         double base) {
    if (!(base <= mid && mid <= top.level)) {
        throw std::invalid_argument("telescoping levels must satisfy base <= mid <= top");
    }
    const LevelCrossing middle = descend(tree, top, mid);
    return std::abs(cfd(tree, top, base) - cfd(tree, top, mid) - cfd(tree, middle, base));
}

double mbd(const RadialTree& tree, const LevelCrossing& base, double up_to_level) {
    if (up_to_level < base.level) {
        throw std::invalid_argument("MBD upper level lies below the base");
    }
    const std::size_t c = base.arc.child;
    if (c == kOrigin || c >= tree.size() || tree.parent(c) != base.arc.parent ||
        !(tree.radius(base.arc.parent) < base.level && base.level < tree.radius(c))) {
        throw std::invalid_argument("base crossing is not an element of the level set");
    }
    if (up_to_level == base.level) {
        return 0.0;
    }
    if (tree.radius(c) > up_to_level) {
        return angle(base.location, crossing_at(base.arc, up_to_level).location);
    }
    struct Item {
        std::size_t v;
        double cfd;
    };
    const double cfd_c = angle(base.location, tree.point(c));
    double best = cfd_c;
    std::vector<Item> stack{{c, cfd_c}};
    while (!stack.empty()) {
        const Item item = stack.back();
        stack.pop_back();
        const HPoint& a = tree.point(item.v);
        for (std::size_t b : tree.children(item.v)) {
            const HPoint& pb = tree.point(b);
            if (pb.radius <= up_to_level) {
                const double value = item.cfd + angle(pb, a);
                best = std::max(best, value);
                stack.push_back({b, value});
            } else {
                const auto y = crossing_at(edge_arc(tree, b), up_to_level);
                best = std::max(best, item.cfd + angle(y.location, a));
            }
        }
    }
    return best;
}

std::vector<LevelCrossing> subtree_crossings(const RadialTree& tree, const LevelCrossing& base,
                                             double level) {
    std::vector<LevelCrossing> out;
    if (!(level > base.level)) {
        return out;
    }
    const std::size_t c = base.arc.child;
    if (tree.radius(c) > level) {
        out.push_back(crossing_at(base.arc, level));
        return out;
    }
    collect_crossings(tree, c, level, out);
    return out;
}

std::vector<LevelCrossing> subtree_crossings(const RadialTree& tree, std::size_t v, double level) {
    std::vector<LevelCrossing> out;
    if (tree.radius(v) < level) {
        collect_crossings(tree, v, level, out);
    }
    return out;
}

double ang(const RadialTree& tree, const LevelCrossing& base, double horizon) {
    double best = 0.0;
    for (const auto& y : subtree_crossings(tree, base, horizon)) {
        best = std::max(best, angle(base.location, y.location));
    }
    return best;
}

double cap_union_measure(std::span<const Direction> centers, double radius, int d,
                         std::size_t samples, RandomStream& rng) {
    if (centers.empty()) {
        return 0.0;
    }
    if (radius >= kPi) {
        return 1.0;
    }
    if (d == 1) {
        std::vector<double> angles;
        angles.reserve(centers.size());
        for (const auto& u : centers) {
            angles.push_back(direction_angle(u));
        }
        std::sort(angles.begin(), angles.end());
        double covered = 0.0;
        for (std::size_t i = 0; i < angles.size(); ++i) {
            const double next = i + 1 < angles.size() ? angles[i + 1] : angles.front() + 2.0 * kPi;
            covered += std::min(2.0 * radius, next - angles[i]);
        }
        return std::min(1.0, covered / (2.0 * kPi));
    }
    const double single = cap_measure(radius, d);
    bool disjoint = true;
    for (std::size_t i = 0; i < centers.size() && disjoint; ++i) {
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            if (angle_between(centers[i], centers[j]) < 2.0 * radius) {
                disjoint = false;
                break;
            }
        }
    }
    if (disjoint) {
        return std::min(1.0, single * static_cast<double>(centers.size()));
    }
    // Karp-Luby: a uniform point of a uniformly chosen cap, weighted by the
    // reciprocal of its multiplicity, is unbiased for |union| / sum |cap_i|.
    double acc = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(centers.size()));
        const Direction x = sample_cap_direction(d, centers[std::min(i, centers.size() - 1)], radius, rng);
        std::size_t mult = 0;
        for (const auto& c : centers) {
            mult += angle_between(x, c) <= radius ? 1 : 0;
        }
        acc += 1.0 / static_cast<double>(std::max<std::size_t>(mult, 1));
    }
    const double estimate =
        single * static_cast<double>(centers.size()) * acc / static_cast<double>(std::max<std::size_t>(samples, 1));
    return std::min(1.0, estimate);
}

namespace {

TraceEstimate finish_trace(std::vector<LevelCrossing> crossings, double base_level,
                           std::size_t base_vertex, int d, const HorizonConfig& cfg,
                           RandomStream& rng) {
    TraceEstimate est;
    est.base_level = base_level;
    est.base_vertex = base_vertex;
    for (auto& c : crossings) {
        est.horizon_directions.push_back(std::move(c.location.direction));
    }
    est.survived = !est.horizon_directions.empty();
    if (est.survived) {
        est.angular_extent = max_pairwise_angle(est.horizon_directions);
        est.sigma_proxy = cap_union_measure(est.horizon_directions,
                                            cfg.cap_scale * std::exp(-cfg.horizon_radius), d,
                                            cfg.cap_samples, rng);
    }
    return est;
}

}  // namespace

TraceEstimate trace_estimate(const RadialTree& tree, std::size_t v, const HorizonConfig& cfg,
                             RandomStream& rng) {
    cfg.validate();
    if (tree.radius(v) > cfg.max_base_level()) {
        throw VerificationError("base vertex lies above the censoring level");
    }
    return finish_trace(subtree_crossings(tree, v, cfg.horizon_radius), tree.radius(v), v,
                        tree.dim(), cfg, rng);
}

TraceEstimate trace_estimate(const RadialTree& tree, const LevelCrossing& base,
                             const HorizonConfig& cfg, RandomStream& rng) {
    cfg.validate();
    if (base.level > cfg.max_base_level()) {
        throw VerificationError("base crossing lies above the censoring level");
    }
    return finish_trace(subtree_crossings(tree, base, cfg.horizon_radius), base.level,
                        base.arc.child, tree.dim(), cfg, rng);
}

std::string trace_csv(std::span<const TraceRow> rows) {
    std::ostringstream out;
    out << "baseLevel,survived,angularExtent,sigmaProxy,mbd\n";
    for (const auto& row : rows) {
        out << format_double(row.base_level) << ',' << (row.survived ? 1 : 0) << ','
            << format_double(row.angular_extent) << ',' << format_double(row.sigma_proxy) << ','
            << format_double(row.mbd) << '\n';
    }
    return out.str();
}

}  // namespace hrst
