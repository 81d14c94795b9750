#include "hrst/ppp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hrst/errors.hpp"

namespace hrst {
namespace {

void sort_by_radius(std::vector<HPoint>& points) {
    std::stable_sort(points.begin(), points.end(),
                     [](const HPoint& a, const HPoint& b) { return a.radius < b.radius; });
}

void check_intensity(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("intensity must be finite and nonnegative");
    }
}

std::uint64_t draw_count(double expected, const SamplingOptions& options, RandomStream& rng) {
    if (expected > options.max_expected_count) {
        throw ResourceCapError("expected point count " + std::to_string(expected) +
                               " exceeds the cap " + std::to_string(options.max_expected_count));
    }
    return rng.poisson(expected);
}

}  // namespace

PointCloud make_cloud(int d, double intensity, double domain_radius, std::vector<HPoint> points) {
    if (d < 1) {
        throw std::invalid_argument("dimension d must be >= 1");
    }
    check_intensity(intensity);
    if (!(domain_radius > 0.0)) {
        throw std::invalid_argument("domain radius must be positive");
    }
    for (auto& p : points) {
        if (p.dim() != d) {
            throw std::invalid_argument("point dimension does not match the cloud");
        }
        // Unit directions are kept bit for bit so file round trips are exact.
        if (std::abs(norm(p.direction) - 1.0) > 1e-12) {
            p = HPoint::make(p.radius, p.direction);
        } else if (!(p.radius >= 0.0) || !std::isfinite(p.radius)) {
            throw std::invalid_argument("radius must be finite and nonnegative");
        }
        if (!(p.radius < domain_radius)) {
            throw std::invalid_argument("point radius must be below the domain radius");
        }
    }
    sort_by_radius(points);
    PointCloud cloud;
    cloud.dim = d;
    cloud.intensity = intensity;
    cloud.domain_radius = domain_radius;
    cloud.points = std::move(points);
    return cloud;
}

PointCloud sample_ball(int d, double lambda, double R, RandomStream& rng,
                       const SamplingOptions& options) {
    check_intensity(lambda);
    if (!(R > 0.0)) {
        throw std::invalid_argument("ball radius must be positive");
    }
    PointCloud cloud;
    cloud.dim = d;
    cloud.intensity = lambda;
    cloud.domain_radius = R;
    cloud.seed = rng.seed();
    cloud.seed_offset = rng.position();
    if (lambda == 0.0) {
        return cloud;
    }
    const RadialSampler radial(d, R);
    const auto n = draw_count(lambda * ball_volume(R, d), options, rng);
    cloud.points.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double r = radial.sample(rng);
        cloud.points.push_back(HPoint{std::min(r, std::nextafter(R, 0.0)), random_direction(d, rng)});
    }
    sort_by_radius(cloud.points);
    return cloud;
}

PointCloud sample_region(int d, double lambda, const Region& region, RandomStream& rng,
                         const SamplingOptions& options) {
    check_intensity(lambda);
    validate(region);
    const auto box = bounding_sector(region, d);
    if (!box) {
        throw std::invalid_argument("cannot sample an unbounded region");
    }
    PointCloud cloud;
    cloud.dim = d;
    cloud.intensity = lambda;
    cloud.domain_radius = box->outer;
    cloud.seed = rng.seed();
    cloud.seed_offset = rng.position();
    const double volume = box->volume(d);
    if (lambda == 0.0 || volume == 0.0) {
        return cloud;
    }
    // Proposals are a Poisson process on the sector; keeping those inside the
    // region is an independent thinning, which is again Poisson.
    const RadialSampler radial(d, box->outer);
    const auto n = draw_count(lambda * volume, options, rng);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double r = radial.sample_between(box->inner, box->outer, rng);
        HPoint z{r, sample_cap_direction(d, box->axis, box->aperture, rng)};
        if (region_contains(region, z)) {
            cloud.points.push_back(std::move(z));
        }
    }
    sort_by_radius(cloud.points);
    return cloud;
}

PointCloud resample_inside(const PointCloud& cloud, double r, RandomStream& rng) {
    if (!(r > 0.0 && r < cloud.domain_radius)) {
        throw std::invalid_argument("resampling radius must lie in (0, domain radius)");
    }
    PointCloud fresh = sample_ball(cloud.dim, cloud.intensity, r, rng);
    PointCloud out = cloud;
    out.points = std::move(fresh.points);
    const auto first_outer = std::lower_bound(
        cloud.points.begin(), cloud.points.end(), r,
        [](const HPoint& p, double radius) { return p.radius < radius; });
    out.points.insert(out.points.end(), first_outer, cloud.points.end());
    return out;
}

PointCloud restrict_to_ball(const PointCloud& cloud, double r) {
    if (!(r > 0.0)) {
        throw std::invalid_argument("restriction radius must be positive");
    }
    PointCloud out = cloud;
    out.domain_radius = r;
    out.points.clear();
    for (const auto& p : cloud.points) {
        if (p.radius < r) {
            out.points.push_back(p);
        }
    }
    return out;
}

nlohmann::json to_json(const PointCloud& cloud) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : cloud.points) {
        nlohmann::json row = nlohmann::json::array();
        row.push_back(p.radius);
        for (double c : p.direction) {
            row.push_back(c);
        }
        points.push_back(std::move(row));
    }
    return nlohmann::json{
        {"d", cloud.dim},
        {"lambda", cloud.intensity},
        {"R", cloud.domain_radius},
        {"seed",
         {{"master", cloud.seed.master}, {"stream", cloud.seed.stream}, {"offset", cloud.seed_offset}}},
        {"points", std::move(points)},
    };
}

PointCloud cloud_from_json(const nlohmann::json& j) {
    const int d = j.at("d").get<int>();
    std::vector<HPoint> points;
    for (const auto& row : j.at("points")) {
        if (row.size() != static_cast<std::size_t>(d) + 2) {
            throw std::invalid_argument("point row has the wrong number of components");
        }
        Direction u;
        for (std::size_t i = 1; i < row.size(); ++i) {
            u.push_back(row[i].get<double>());
        }
        points.push_back(HPoint{row[0].get<double>(), std::move(u)});
    }
    PointCloud cloud = make_cloud(d, j.at("lambda").get<double>(), j.at("R").get<double>(),
                                  std::move(points));
    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        cloud.seed = SeedDescriptor{s.at("master").get<std::uint64_t>(),
                                    s.at("stream").get<std::uint64_t>()};
        cloud.seed_offset = s.value("offset", std::uint64_t{0});
    }
    return cloud;
}

}  // namespace hrst
