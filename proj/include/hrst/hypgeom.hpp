#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "hrst/rng.hpp"

namespace hrst {

/// Unit vector in R^{d+1}. Inline storage covers d <= 3 without allocating.
using Direction = boost::container::small_vector<double, 4>;

/// A point of H^{d+1} in polar coordinates around the origin.
///
/// `radius` is the hyperbolic distance to the origin and `direction` a unit
/// vector of R^{d+1}. The origin is any point with radius 0; its direction is
/// arbitrary but still stored normalized.
struct HPoint {
    double radius = 0.0;
    Direction direction;

    /// Dimension d of the boundary sphere S^d (so the space is H^{d+1}).
    int dim() const { return static_cast<int>(direction.size()) - 1; }
    bool is_origin() const { return radius == 0.0; }

    static HPoint origin(int d);
    /// Convenience constructor for d = 1: direction (cos angle, sin angle).
    static HPoint polar(double radius, double angle);
    /// Normalizes `direction`; throws std::invalid_argument on a zero vector
    /// or a negative radius.
    static HPoint make(double radius, Direction direction);
};

Direction unit_axis(int d, std::size_t axis = 0);
Direction normalized(const Direction& v);
double dot(const Direction& u, const Direction& v);
double norm(const Direction& v);
/// Polar angle of a d = 1 direction, in (-pi, pi].
double direction_angle(const Direction& u);

/// Angle between two unit vectors, evaluated as 2 atan2(|u - v|, |u + v|),
/// which stays accurate for nearly parallel and nearly antipodal vectors.
double angle_between(const Direction& u, const Direction& v);

/// Hyperbolic distance (curvature -1).
double distance(const HPoint& a, const HPoint& b);

/// Non-oriented angle a-0-b at the origin. Throws std::invalid_argument if
/// either point is the origin.
double angle_at_origin(const HPoint& a, const HPoint& b);

/// Integral of sinh^d over [a, b]: closed forms for d <= 3, adaptive
/// Gauss-Kronrod quadrature otherwise.
double sinh_power_integral(double a, double b, int d);

/// Rescaled volume of B(0, r): the integral of sinh^d over [0, r] with the
/// direction measure normalized to sigma(S^d) = 1.
double ball_volume(double r, int d);

/// Rescaled volume of the annulus C(inner, outer).
double annulus_volume(double inner, double outer, int d);

/// Normalized measure of a spherical cap of angular radius theta on S^d.
/// Equals theta / pi for d = 1 and (1 - cos theta) / 2 for d = 2.
double cap_measure(double theta, int d);

/// Smallest C with cap_measure(theta, d) <= C theta^d for every theta in
/// (0, pi]. The ratio is decreasing in theta, so C is its limit at 0.
double cap_measure_bound_constant(int d);

/// Inverse of cap_measure in theta, for theta in [0, pi].
double cap_angle_for_measure(double measure, int d);

/// Euclidean coordinates in the Poincare ball: tanh(r / 2) u.
Direction to_poincare(const HPoint& z);
/// Inverse of to_poincare for a point of the open unit ball.
HPoint from_poincare(const Direction& x);

/// Hyperboloid-model coordinates (cosh r, sinh r u).
std::vector<double> to_hyperboloid(const HPoint& z);
HPoint from_hyperboloid(std::span<const double> x);

/// Point at fraction s in [0, 1] of the hyperbolic geodesic from a to b.
HPoint geodesic_point(const HPoint& a, const HPoint& b, double s);

/// Draws a uniform direction on S^d (normalized Gaussian vector).
Direction random_direction(int d, RandomStream& rng);
/// Draws a direction uniformly from the cap of angular radius `aperture`
/// around `axis` (the whole sphere when aperture >= pi or axis is empty).
Direction sample_cap_direction(int d, const Direction& axis, double aperture,
                               RandomStream& rng);
/// Applies a random orthogonal transformation, drawn once, to directions.
class RandomRotation {
  public:
    RandomRotation(int d, RandomStream& rng);
    Direction apply(const Direction& u) const;
    HPoint apply(const HPoint& z) const;

  private:
    int dim_;
    std::vector<double> matrix_;  // row-major (d+1) x (d+1)
};

// ---------------------------------------------------------------------------
// Regions

struct Ball {
    HPoint center;
    double radius = 0.0;
};

struct Annulus {
    double inner = 0.0;
    double outer = 0.0;
};

struct Cone {
    Direction axis;
    double aperture = 0.0;
};

/// B+(z, radius) = B(z, radius) intersected with B(0, d(0, z)).
struct HalfLens {
    HPoint point;
    double radius = 0.0;
};

struct Region;

struct Intersection {
    std::vector<Region> parts;
};

struct Region {
    std::variant<Ball, Annulus, Cone, HalfLens, Intersection> shape;

    Region(Ball b) : shape(std::move(b)) {}
    Region(Annulus a) : shape(a) {}
    Region(Cone c) : shape(std::move(c)) {}
    Region(HalfLens h) : shape(std::move(h)) {}
    Region(Intersection i) : shape(std::move(i)) {}
};

/// Throws std::invalid_argument if a region violates its invariants
/// (inner < outer, aperture in (0, pi], positive radii, nonempty intersection
/// list).
void validate(const Region& region);

/// Exact membership test. Balls, annuli and half-lenses are open; cones are
/// closed, matching the angle-at-most-aperture definition.
bool region_contains(const Region& region, const HPoint& z);

/// Polar box containing a region: radii in [inner, outer] and directions
/// within `aperture` of `axis`. Used as the rejection proposal for sampling.
struct AnnularSector {
    double inner = 0.0;
    double outer = 0.0;
    Direction axis;           // empty when aperture == pi
    double aperture = 0.0;

    double volume(int d) const;
};

/// Bounding sector of a region, or nullopt when the region is unbounded.
std::optional<AnnularSector> bounding_sector(const Region& region, int d);

struct VolumeEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
};

/// Monte Carlo estimate of the rescaled volume of a bounded region by
/// rejection from its bounding sector. Throws std::invalid_argument when the
/// region is unbounded or samples < 1000.
VolumeEstimate region_volume_mc(const Region& region, int d, std::size_t samples,
                                RandomStream& rng);

// ---------------------------------------------------------------------------
// Radial sampling

/// Inverse CDF sampler for the radial law with density sinh^d(r) / Vol(B(R))
/// on [0, R].
///
/// d = 1 uses the closed form acosh(1 + U (cosh R - 1)). Otherwise the
/// inverse CDF is tabulated as a monotone (Fritsch-Carlson) cubic in the
/// variable w = CDF^{1/(d+1)}, which removes the r^{d+1} behaviour at the
/// origin. The knot count starts at 4096 and doubles until the interpolant
/// agrees with the exact inverse to 1e-8 at every interval midpoint.
class RadialSampler {
  public:
    RadialSampler(int d, double max_radius);

    int dim() const { return dim_; }
    double max_radius() const { return max_radius_; }
    /// Radius with CDF value u in [0, 1].
    double inverse_cdf(double u) const;
    /// Exact CDF on [0, max_radius].
    double cdf(double r) const;
    double sample(RandomStream& rng) const { return inverse_cdf(rng.uniform()); }
    /// Radius uniform (w.r.t. Vol) on [lo, hi] within [0, max_radius].
    double sample_between(double lo, double hi, RandomStream& rng) const;
    /// Largest midpoint error observed while building the table (0 for d=1).
    double max_inverse_error() const { return max_error_; }
    std::size_t knot_count() const { return knots_w_.size(); }

  private:
    double interpolate(double w) const;
    double exact_inverse(double u) const;

    int dim_;
    double max_radius_;
    double total_volume_;
    std::vector<double> knots_w_;
    std::vector<double> knots_r_;
    std::vector<double> slopes_;
    double max_error_ = 0.0;
};

}  // namespace hrst
