#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrst/ppp.hpp"

namespace hrst {

/// Vertex id of the root (the origin). Poisson points are 0..n-1 in the
/// radius order of the cloud.
inline constexpr std::size_t kOrigin = std::numeric_limits<std::size_t>::max();

struct BuildOptions {
    /// Angular bucket index for d = 1 (the radial scan alone is used for
    /// d >= 2 or when disabled).
    bool angular_buckets = true;
    /// log2 of the bucket count; negative picks ceil(log2 n).
    int bucket_bits = -1;
    unsigned threads = 1;
};

struct BuildDiagnostics {
    /// Pairs of points at exactly equal radius; the lower index is treated
    /// as the smaller radius.
    std::size_t radius_ties = 0;
    /// Candidates at exactly the current best distance; the origin, then the
    /// lower index, wins.
    std::size_t distance_ties = 0;
};

/// The radial spanning tree over a cloud plus the origin.
///
/// Invariants: parent(v) has strictly smaller radius than v (or lower index
/// on an exact radius tie), so parent links are acyclic and end at kOrigin.
class RadialTree {
  public:
    RadialTree() = default;

    const PointCloud& cloud() const { return cloud_; }
    int dim() const { return cloud_.dim; }
    std::size_t size() const { return parent_.size(); }

    /// Point of vertex v; kOrigin maps to the origin.
    const HPoint& point(std::size_t v) const { return v == kOrigin ? origin_ : cloud_.points[v]; }
    double radius(std::size_t v) const { return v == kOrigin ? 0.0 : cloud_.points[v].radius; }
    std::size_t parent(std::size_t v) const { return parent_[v]; }
    double ancestor_distance(std::size_t v) const { return ancestor_distance_[v]; }
    std::span<const std::size_t> parents() const { return parent_; }
    std::span<const double> ancestor_distances() const { return ancestor_distance_; }

    /// Children of v in increasing index order; kOrigin gives the root's.
    std::span<const std::size_t> children(std::size_t v) const;

    const BuildDiagnostics& diagnostics() const { return diagnostics_; }

    /// Tree from explicit parent links. Each parent must precede its child
    /// in the cloud order (or be kOrigin). Ancestor distances are recomputed.
    static RadialTree from_parents(PointCloud cloud, std::vector<std::size_t> parents);

  private:
    friend RadialTree build(PointCloud cloud, const BuildOptions& options);
    void finalize();

    PointCloud cloud_;
    HPoint origin_;
    std::vector<std::size_t> parent_;
    std::vector<double> ancestor_distance_;
    std::vector<std::size_t> child_offsets_;  // CSR over vertices, root last
    std::vector<std::size_t> child_list_;
    BuildDiagnostics diagnostics_;
};

/// Ancestor of every point: the nearest among the origin and the points of
/// strictly smaller radius. Throws DegenerateInputError on coincident points.
RadialTree build(PointCloud cloud, const BuildOptions& options = {});

/// Ancestor of point i by exhaustive search over all smaller-radius points.
/// O(n) per query; the reference the fast paths are checked against.
std::size_t brute_force_parent(const PointCloud& cloud, std::size_t i);

struct DescendantSet {
    std::size_t root_vertex = kOrigin;
    /// Preorder; starts with root_vertex. For the origin, kOrigin comes
    /// first and is followed by every point.
    std::vector<std::size_t> members;
};

DescendantSet descendants(const RadialTree& tree, std::size_t v);

/// Preorder walk of the subtree of v (v included, kOrigin excluded) into
/// `out`, which is cleared first.
void collect_subtree(const RadialTree& tree, std::size_t v, std::vector<std::size_t>& out);

/// [v, A(v), A(A(v)), ..., kOrigin].
std::vector<std::size_t> path_to_root(const RadialTree& tree, std::size_t v);

std::size_t max_in_degree(const RadialTree& tree);

struct CrossingPair {
    std::size_t first;   // child vertex of the first edge
    std::size_t second;  // child vertex of the second edge
    friend bool operator==(const CrossingPair&, const CrossingPair&) = default;
};

/// Pairs of edges whose geodesics cross in their interiors, found on
/// `samples`-point polylines in the Poincare disc. d = 1 only.
std::vector<CrossingPair> check_planarity_d1(const RadialTree& tree, int samples = 64,
                                             double tolerance = 1e-9);

/// Largest pairwise angle at the origin among a set of directions.
double max_pairwise_angle(std::span<const Direction> directions);

struct StraightnessProfile {
    double epsilon = 0.0;
    std::vector<double> bin_edges;
    std::vector<std::size_t> vertices;  // per bin
    std::vector<std::size_t> flagged;   // per bin

    double fraction(std::size_t bin) const;
};

/// For each vertex v with radius in [bin_edges.front(), bin_edges.back())
/// and radius <= max_base_radius, compares the largest pairwise origin angle
/// within D(v) with exp(-(1 - epsilon) r_v).
StraightnessProfile straightness_profile(const RadialTree& tree, double epsilon,
                                         std::vector<double> bin_edges, double max_base_radius);

/// {cloud, parent, ancestorDistance}; the origin is encoded as -1.
nlohmann::json to_json(const RadialTree& tree);
RadialTree tree_from_json(const nlohmann::json& j);

}  // namespace hrst
