#include "hrst/rst.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "hrst/errors.hpp"
#include "hrst/parallel.hpp"

namespace hrst {
namespace {

constexpr double kPi = std::numbers::pi;

struct Best {
    std::size_t parent = kOrigin;
    double dist = 0.0;
};

struct TieCounter {
    std::atomic<std::size_t> count{0};
};

// Candidate j for point z. Smaller distance wins; on an exact tie the origin
// is kept, otherwise the lower index.
inline void consider(const HPoint& z, const HPoint& candidate, std::size_t j, Best& best,
                     TieCounter& ties) {
    const double dist = distance(z, candidate);
    if (dist == 0.0) {
        throw DegenerateInputError("coincident points at radius " + std::to_string(z.radius));
    }
    if (dist < best.dist) {
        best = Best{j, dist};
    } else if (dist == best.dist) {
        ties.count.fetch_add(1, std::memory_order_relaxed);
        if (best.parent != kOrigin && j < best.parent) {
            best.parent = j;
        }
    }
}

Best radial_scan(const std::vector<HPoint>& pts, std::size_t i, TieCounter& ties) {
    const HPoint& z = pts[i];
    Best best{kOrigin, z.radius};
    for (std::size_t j = i; j-- > 0;) {
        if (z.radius - pts[j].radius > best.dist) {
            break;
        }
        consider(z, pts[j], j, best, ties);
    }
    return best;
}

// Lower bound on d(z, y) over all y with radius in [r_lo, r_z] and angular
// separation from z of at least `gap` (d = 1 or any d: only the angle matters).
double angular_lower_bound(double r_z, double r_lo, double gap) {
    if (gap >= 0.5 * kPi) {
        // The closest point of a ray at angle >= pi/2 is the origin.
        return r_lo <= 0.0 ? r_z : distance(HPoint::polar(r_z, 0.0), HPoint::polar(r_lo, gap));
    }
    // Foot of the perpendicular from z onto the ray at angle `gap`.
    const double foot = std::atanh(std::tanh(r_z) * std::cos(gap));
    const double rho = std::clamp(foot, std::max(0.0, r_lo), r_z);
    return distance(HPoint::polar(r_z, 0.0), HPoint::polar(rho, gap));
}

class AngularBuckets {
  public:
    AngularBuckets(const std::vector<HPoint>& pts, int bits) : pts_(pts) {
        count_ = std::size_t{1} << bits;
        width_ = 2.0 * kPi / static_cast<double>(count_);
        buckets_.resize(count_);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            buckets_[bucket_of(direction_angle(pts[i].direction))].push_back(i);
        }
    }

    Best query(std::size_t i, TieCounter& ties) const {
        const HPoint& z = pts_[i];
        Best best{kOrigin, z.radius};
        const double a = direction_angle(z.direction);
        const std::size_t b0 = bucket_of(a);
        const double frac = std::clamp(a + kPi - static_cast<double>(b0) * width_, 0.0, width_);
        scan(b0, i, best, ties);
        bool open_up = true;
        bool open_down = true;
        std::size_t visited = 1;
        for (std::size_t k = 1; visited < count_ && (open_up || open_down); ++k) {
            if (open_up) {
                const double gap = static_cast<double>(k) * width_ - frac;
                if (prunable(z.radius, best.dist, gap)) {
                    open_up = false;
                } else {
                    scan((b0 + k) % count_, i, best, ties);
                    ++visited;
                }
            }
            if (open_down && visited < count_) {
                const double gap = static_cast<double>(k - 1) * width_ + frac;
                if (prunable(z.radius, best.dist, gap)) {
                    open_down = false;
                } else {
                    scan((b0 + count_ - k % count_) % count_, i, best, ties);
                    ++visited;
                }
            }
        }
        return best;
    }

  private:
    std::size_t bucket_of(double angle) const {
        const auto b = static_cast<std::size_t>((angle + kPi) / width_);
        return std::min(b, count_ - 1);
    }

    static bool prunable(double r_z, double best, double gap) {
        if (gap >= kPi) {
            return true;
        }
        const double bound = angular_lower_bound(r_z, r_z - best, gap);
        return bound * (1.0 - 1e-12) > best;
    }

    void scan(std::size_t b, std::size_t i, Best& best, TieCounter& ties) const {
        const auto& list = buckets_[b];
        auto it = std::lower_bound(list.begin(), list.end(), i);
        const HPoint& z = pts_[i];
        while (it != list.begin()) {
            const std::size_t j = *--it;
            if (z.radius - pts_[j].radius > best.dist) {
                break;
            }
            consider(z, pts_[j], j, best, ties);
        }
    }

    const std::vector<HPoint>& pts_;
    std::size_t count_ = 1;
    double width_ = 2.0 * kPi;
    std::vector<std::vector<std::size_t>> buckets_;
};

int auto_bucket_bits(std::size_t n) {
    int bits = 0;
    while ((std::size_t{1} << bits) < n && bits < 24) {
        ++bits;
    }
    return bits;
}

}  // namespace

std::span<const std::size_t> RadialTree::children(std::size_t v) const {
    const std::size_t slot = v == kOrigin ? parent_.size() : v;
    return std::span<const std::size_t>(child_list_).subspan(
        child_offsets_[slot], child_offsets_[slot + 1] - child_offsets_[slot]);
}

void RadialTree::finalize() {
    const std::size_t n = parent_.size();
    origin_ = HPoint::origin(cloud_.dim);
    child_offsets_.assign(n + 2, 0);
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t slot = parent_[v] == kOrigin ? n : parent_[v];
        ++child_offsets_[slot + 1];
    }
    for (std::size_t s = 0; s <= n; ++s) {
        child_offsets_[s + 1] += child_offsets_[s];
    }
    child_list_.assign(n, 0);
    std::vector<std::size_t> fill(child_offsets_.begin(), child_offsets_.end() - 1);
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t slot = parent_[v] == kOrigin ? n : parent_[v];
        child_list_[fill[slot]++] = v;
    }
}

RadialTree RadialTree::from_parents(PointCloud cloud, std::vector<std::size_t> parents) {
    if (parents.size() != cloud.size()) {
        throw std::invalid_argument("parent array length differs from the point count");
    }
    RadialTree tree;
    tree.ancestor_distance_.resize(parents.size());
    for (std::size_t v = 0; v < parents.size(); ++v) {
        const std::size_t p = parents[v];
        if (p != kOrigin && p >= v) {
            throw std::invalid_argument("parent must precede its child in radius order");
        }
        const double dist =
            p == kOrigin ? cloud.points[v].radius : distance(cloud.points[v], cloud.points[p]);
        if (dist == 0.0) {
            throw DegenerateInputError("edge between coincident points");
        }
        tree.ancestor_distance_[v] = dist;
    }
    tree.cloud_ = std::move(cloud);
    tree.parent_ = std::move(parents);
    tree.finalize();
    return tree;
}

RadialTree build(PointCloud cloud, const BuildOptions& options) {
    const auto& pts = cloud.points;
    const std::size_t n = pts.size();
    RadialTree tree;
    tree.parent_.assign(n, kOrigin);
    tree.ancestor_distance_.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        if (pts[i].radius == pts[i - 1].radius) {
            ++tree.diagnostics_.radius_ties;
        }
    }
    TieCounter ties;
    std::optional<AngularBuckets> buckets;
    if (cloud.dim == 1 && options.angular_buckets && n > 0) {
        buckets.emplace(pts, options.bucket_bits >= 0 ? options.bucket_bits : auto_bucket_bits(n));
    }
    parallel_for(n, options.threads, [&](std::size_t i) {
        const Best best = buckets ? buckets->query(i, ties) : radial_scan(pts, i, ties);
        tree.parent_[i] = best.parent;
        tree.ancestor_distance_[i] = best.dist;
    });
    tree.diagnostics_.distance_ties = ties.count.load();
    tree.cloud_ = std::move(cloud);
    tree.finalize();
    return tree;
}

std::size_t brute_force_parent(const PointCloud& cloud, std::size_t i) {
    const HPoint& z = cloud.points.at(i);
    std::size_t parent = kOrigin;
    double best = z.radius;
    for (std::size_t j = 0; j < i; ++j) {
        const double dist = distance(z, cloud.points[j]);
        if (dist < best) {
            best = dist;
            parent = j;
        }
    }
    return parent;
}

void collect_subtree(const RadialTree& tree, std::size_t v, std::vector<std::size_t>& out) {
    out.clear();
    std::vector<std::size_t> stack;
    if (v == kOrigin) {
        const auto roots = tree.children(kOrigin);
        stack.assign(roots.rbegin(), roots.rend());
    } else {
        stack.push_back(v);
    }
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        out.push_back(u);
        const auto kids = tree.children(u);
        stack.insert(stack.end(), kids.rbegin(), kids.rend());
    }
}

DescendantSet descendants(const RadialTree& tree, std::size_t v) {
    if (v != kOrigin && v >= tree.size()) {
        throw std::out_of_range("vertex index out of range");
    }
    DescendantSet set;
    set.root_vertex = v;
    std::vector<std::size_t> sub;
    collect_subtree(tree, v, sub);
    if (v == kOrigin) {
        set.members.push_back(kOrigin);
    }
    set.members.insert(set.members.end(), sub.begin(), sub.end());
    return set;
}

std::vector<std::size_t> path_to_root(const RadialTree& tree, std::size_t v) {
    if (v != kOrigin && v >= tree.size()) {
        throw std::out_of_range("vertex index out of range");
    }
    std::vector<std::size_t> path{v};
    while (v != kOrigin) {
        v = tree.parent(v);
        path.push_back(v);
    }
    return path;
}

std::size_t max_in_degree(const RadialTree& tree) {
    std::size_t best = tree.children(kOrigin).size();
    for (std::size_t v = 0; v < tree.size(); ++v) {
        best = std::max(best, tree.children(v).size());
    }
    return best;
}

std::vector<CrossingPair> check_planarity_d1(const RadialTree& tree, int samples,
                                             double tolerance) {
    if (tree.dim() != 1) {
        throw std::invalid_argument("planarity check is only defined for d = 1");
    }
    if (samples < 2) {
        throw std::invalid_argument("need at least 2 samples per edge");
    }
    struct Vec2 {
        double x, y;
    };
    const std::size_t n = tree.size();
    const auto per_edge = static_cast<std::size_t>(samples);
    std::vector<Vec2> poly(n * per_edge);
    for (std::size_t v = 0; v < n; ++v) {
        const HPoint& a = tree.point(v);
        const HPoint& b = tree.point(tree.parent(v));
        for (std::size_t k = 0; k < per_edge; ++k) {
            const double s = static_cast<double>(k) / static_cast<double>(per_edge - 1);
            const Direction x = to_poincare(geodesic_point(a, b, s));
            poly[v * per_edge + k] = Vec2{x[0], x[1]};
        }
    }
    const std::size_t segs_per_edge = per_edge - 1;
    const std::size_t total = n * segs_per_edge;
    const auto grid = static_cast<std::size_t>(
        std::clamp(std::sqrt(static_cast<double>(total)), 1.0, 1024.0));
    auto cell_of = [&](double c) {
        const auto k = static_cast<std::ptrdiff_t>((c + 1.0) * 0.5 * static_cast<double>(grid));
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, grid - 1));
    };
    std::vector<std::vector<std::size_t>> cells(grid * grid);
    for (std::size_t s = 0; s < total; ++s) {
        const std::size_t e = s / segs_per_edge;
        const Vec2 p = poly[e * per_edge + s % segs_per_edge];
        const Vec2 q = poly[e * per_edge + s % segs_per_edge + 1];
        const std::size_t x0 = cell_of(std::min(p.x, q.x)), x1 = cell_of(std::max(p.x, q.x));
        const std::size_t y0 = cell_of(std::min(p.y, q.y)), y1 = cell_of(std::max(p.y, q.y));
        for (std::size_t cx = x0; cx <= x1; ++cx) {
            for (std::size_t cy = y0; cy <= y1; ++cy) {
                cells[cx * grid + cy].push_back(s);
            }
        }
    }
    // Signed distance of c from the line through a, b.
    auto side = [](Vec2 a, Vec2 b, Vec2 c) {
        const double dx = b.x - a.x, dy = b.y - a.y;
        const double len = std::hypot(dx, dy);
        return len == 0.0 ? 0.0 : (dx * (c.y - a.y) - dy * (c.x - a.x)) / len;
    };
    auto opposite = [tolerance](double s1, double s2) {
        return (s1 > tolerance && s2 < -tolerance) || (s1 < -tolerance && s2 > tolerance);
    };
    std::set<std::pair<std::size_t, std::size_t>> found;
    for (const auto& cell : cells) {
        for (std::size_t i = 0; i < cell.size(); ++i) {
            for (std::size_t j = i + 1; j < cell.size(); ++j) {
                std::size_t e1 = cell[i] / segs_per_edge, e2 = cell[j] / segs_per_edge;
                if (e1 == e2) {
                    continue;
                }
                if (e1 > e2) {
                    std::swap(e1, e2);
                }
                if (found.contains({e1, e2})) {
                    continue;
                }
                const std::size_t s1 = cell[i], s2 = cell[j];
                const Vec2 a = poly[(s1 / segs_per_edge) * per_edge + s1 % segs_per_edge];
                const Vec2 b = poly[(s1 / segs_per_edge) * per_edge + s1 % segs_per_edge + 1];
                const Vec2 c = poly[(s2 / segs_per_edge) * per_edge + s2 % segs_per_edge];
                const Vec2 d = poly[(s2 / segs_per_edge) * per_edge + s2 % segs_per_edge + 1];
                if (opposite(side(a, b, c), side(a, b, d)) && opposite(side(c, d, a), side(c, d, b))) {
                    found.insert({e1, e2});
                }
            }
        }
    }
    std::vector<CrossingPair> out;
    for (const auto& [a, b] : found) {
        out.push_back(CrossingPair{a, b});
    }
    return out;
}

double max_pairwise_angle(std::span<const Direction> directions) {
    if (directions.size() < 2) {
        return 0.0;
    }
    if (directions.front().size() == 2) {
        // Offsets relative to the first direction; when they span at most pi
        // the extreme pair realizes the maximum.
        const double base = direction_angle(directions.front());
        double lo = 0.0, hi = 0.0;
        for (const auto& u : directions) {
            const double off = std::remainder(direction_angle(u) - base, 2.0 * kPi);
            lo = std::min(lo, off);
            hi = std::max(hi, off);
        }
        if (hi - lo <= kPi) {
            return hi - lo;
        }
    }
    double best = 0.0;
    for (std::size_t i = 0; i < directions.size(); ++i) {
        for (std::size_t j = i + 1; j < directions.size(); ++j) {
            best = std::max(best, angle_between(directions[i], directions[j]));
        }
    }
    return best;
}

double StraightnessProfile::fraction(std::size_t bin) const {
    return vertices.at(bin) == 0 ? 0.0
                                 : static_cast<double>(flagged[bin]) / static_cast<double>(vertices[bin]);
}

StraightnessProfile straightness_profile(const RadialTree& tree, double epsilon,
                                         std::vector<double> bin_edges, double max_base_radius) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("epsilon must lie in (0, 1)");
    }
    if (bin_edges.size() < 2 || !std::is_sorted(bin_edges.begin(), bin_edges.end())) {
        throw std::invalid_argument("bin edges must be sorted with at least two entries");
    }
    StraightnessProfile profile;
    profile.epsilon = epsilon;
    profile.bin_edges = std::move(bin_edges);
    const std::size_t bins = profile.bin_edges.size() - 1;
    profile.vertices.assign(bins, 0);
    profile.flagged.assign(bins, 0);
    std::vector<std::size_t> sub;
    std::vector<Direction> dirs;
    for (std::size_t v = 0; v < tree.size(); ++v) {
        const double r = tree.radius(v);
        if (r > max_base_radius || r < profile.bin_edges.front() || r >= profile.bin_edges.back()) {
            continue;
        }
        const auto bin = static_cast<std::size_t>(
            std::upper_bound(profile.bin_edges.begin(), profile.bin_edges.end(), r) -
            profile.bin_edges.begin() - 1);
        collect_subtree(tree, v, sub);
        dirs.clear();
        for (std::size_t u : sub) {
            dirs.push_back(tree.point(u).direction);
        }
        ++profile.vertices[bin];
        if (max_pairwise_angle(dirs) > std::exp(-(1.0 - epsilon) * r)) {
            ++profile.flagged[bin];
        }
    }
    return profile;
}

nlohmann::json to_json(const RadialTree& tree) {
    nlohmann::json parents = nlohmann::json::array();
    for (std::size_t p : tree.parents()) {
        if (p == kOrigin) {
            parents.push_back(-1);
        } else {
            parents.push_back(p);
        }
    }
    return nlohmann::json{
        {"cloud", to_json(tree.cloud())},
        {"parent", std::move(parents)},
        {"ancestorDistance", tree.ancestor_distances()},
    };
}

RadialTree tree_from_json(const nlohmann::json& j) {
    PointCloud cloud = cloud_from_json(j.at("cloud"));
    std::vector<std::size_t> parents;
    for (const auto& p : j.at("parent")) {
        const auto v = p.get<long long>();
        parents.push_back(v < 0 ? kOrigin : static_cast<std::size_t>(v));
    }
    RadialTree tree = RadialTree::from_parents(std::move(cloud), std::move(parents));
    if (j.contains("ancestorDistance")) {
        const auto stored = j.at("ancestorDistance").get<std::vector<double>>();
        if (stored.size() != tree.size()) {
            throw std::invalid_argument("ancestorDistance length differs from the point count");
        }
        for (std::size_t v = 0; v < stored.size(); ++v) {
            if (std::abs(stored[v] - tree.ancestor_distance(v)) > 1e-9 * (1.0 + stored[v])) {
                throw VerificationError("stored ancestor distance disagrees with the geometry");
            }
        }
    }
    return tree;
}

}  // namespace hrst
