#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrst/hypgeom.hpp"
#include "hrst/rng.hpp"

namespace hrst {

/// A realization of a homogeneous Poisson process restricted to B(0, R).
///
/// Points are sorted by ascending radius; exact radius ties (a probability
/// zero event) keep their insertion order. `seed` and `seed_offset` identify
/// the stream position the sample was drawn from, so sample_ball can replay
/// it exactly.
struct PointCloud {
    int dim = 1;
    double intensity = 0.0;
    double domain_radius = 0.0;
    SeedDescriptor seed;
    std::uint64_t seed_offset = 0;
    std::vector<HPoint> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

struct SamplingOptions {
    /// Largest admissible expected point count; larger requests throw
    /// ResourceCapError.
    double max_expected_count = 1e7;
};

/// Builds a cloud from explicit points (synthetic configurations, files).
/// Validates dimensions, normalizes directions, sorts by radius and checks
/// every radius is below `domain_radius`.
PointCloud make_cloud(int d, double intensity, double domain_radius, std::vector<HPoint> points);

/// Poisson process of intensity `lambda` per rescaled volume in B(0, R).
PointCloud sample_ball(int d, double lambda, double R, RandomStream& rng,
                       const SamplingOptions& options = {});

/// Poisson process restricted to a bounded region, sampled by rejection from
/// the region's bounding sector. domain_radius is the sector's outer radius.
PointCloud sample_region(int d, double lambda, const Region& region, RandomStream& rng,
                         const SamplingOptions& options = {});

/// Keeps every point at radius >= r and replaces the configuration inside the
/// open ball B(0, r) with a fresh Poisson sample.
PointCloud resample_inside(const PointCloud& cloud, double r, RandomStream& rng);

/// Points of `cloud` inside B(0, r), as a cloud of domain radius r.
PointCloud restrict_to_ball(const PointCloud& cloud, double r);

/// Removes the points for which `drop` returns true.
template <class Pred>
PointCloud remove_points(const PointCloud& cloud, Pred&& drop) {
    PointCloud out = cloud;
    out.points.clear();
    for (const auto& p : cloud.points) {
        if (!drop(p)) {
            out.points.push_back(p);
        }
    }
    return out;
}

/// {d, lambda, R, seed: {master, stream, offset}, points: [[radius, u...]]}
nlohmann::json to_json(const PointCloud& cloud);
PointCloud cloud_from_json(const nlohmann::json& j);

}  // namespace hrst
