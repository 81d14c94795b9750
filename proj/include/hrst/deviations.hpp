#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hrst/arcs.hpp"
#include "hrst/rng.hpp"

namespace hrst {

/// Finite stand-in for the boundary at infinity. Functionals at base level r
/// are trusted only for r <= horizon_radius - censor_margin.
struct HorizonConfig {
    double horizon_radius = 0.0;
    double censor_margin = 2.0;
    /// Trace caps have angular radius cap_scale * exp(-horizon_radius).
    double cap_scale = 1.0;
    /// Monte Carlo samples for cap unions when d >= 2.
    std::size_t cap_samples = 20000;

    void validate() const;
    double max_base_level() const { return horizon_radius - censor_margin; }
};

/// Cumulative forward deviation from vertex v down to `level` <= radius(v):
/// the angles at the origin along the path to the root, the last term cut
/// at the crossing of S(level).
double path_deviation(const RadialTree& tree, std::size_t v, double level);

/// CFD from the crossing `from` (at level r') down to level r <= r'.
double cfd(const RadialTree& tree, const LevelCrossing& from, double to_level);

/// The crossing at `level` on the forward path from `from` toward the root.
/// An endpoint radius exactly equal to `level` yields the t = 0 point of the
/// arc leaving that vertex.
LevelCrossing descend(const RadialTree& tree, const LevelCrossing& from, double level);

/// |CFD(top -> base) - CFD(top -> mid) - CFD(mid crossing -> base)|.
double telescoping_check(const RadialTree& tree, const LevelCrossing& top, double mid,
                         double base);

/// Largest CFD back to `base` over the subtree above it, up to `up_to_level`:
/// the maximum over subtree vertices with radius in [r, up_to_level] and
/// subtree crossings of S(up_to_level).
double mbd(const RadialTree& tree, const LevelCrossing& base, double up_to_level);

/// Crossings of S(level) by the arcs of the subtree hanging from `base`
/// (the base arc included), level > base.level.
std::vector<LevelCrossing> subtree_crossings(const RadialTree& tree, const LevelCrossing& base,
                                             double level);
/// Same for the subtree of vertex v (radius(v) < level).
std::vector<LevelCrossing> subtree_crossings(const RadialTree& tree, std::size_t v, double level);

/// Largest origin angle between the base crossing and the subtree's
/// crossings of S(horizon); 0 when the subtree does not reach it.
double ang(const RadialTree& tree, const LevelCrossing& base, double horizon);

/// Normalized measure of a union of caps of equal angular radius. Exact for
/// d = 1 and for pairwise disjoint caps; otherwise a Karp-Luby estimate
/// drawing `samples` points from `rng`.
double cap_union_measure(std::span<const Direction> centers, double radius, int d,
                         std::size_t samples, RandomStream& rng);

struct TraceEstimate {
    double base_level = 0.0;
    std::size_t base_vertex = kOrigin;  // lower vertex of the base crossing
    bool survived = false;
    std::vector<Direction> horizon_directions;
    double angular_extent = 0.0;
    double sigma_proxy = 0.0;

    /// Reaches the horizon at two or more distinct directions.
    bool thick() const { return survived && angular_extent > 0.0; }
};

/// Horizon trace of the subtree of a vertex. Throws VerificationError when
/// the vertex lies above the censoring level. `rng` is only drawn from for
/// d >= 2 cap unions that overlap.
TraceEstimate trace_estimate(const RadialTree& tree, std::size_t v, const HorizonConfig& cfg,
                             RandomStream& rng);
TraceEstimate trace_estimate(const RadialTree& tree, const LevelCrossing& base,
                             const HorizonConfig& cfg, RandomStream& rng);

struct TraceRow {
    double base_level = 0.0;
    bool survived = false;
    double angular_extent = 0.0;
    double sigma_proxy = 0.0;
    double mbd = 0.0;
};

/// CSV with header baseLevel,survived,angularExtent,sigmaProxy,mbd.
std::string trace_csv(std::span<const TraceRow> rows);

}  // namespace hrst
