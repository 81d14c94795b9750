#include "hrst/hypgeom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "hrst/errors.hpp"

namespace hrst {
namespace {

constexpr double kPi = std::numbers::pi;

void require_dim(int d) {
    if (d < 1) {
        throw std::invalid_argument("dimension d must be >= 1");
    }
}

// sinh(x) - x without cancellation near 0.
double sinh_minus_x(double x) {
    if (std::abs(x) < 0.1) {
        const double x2 = x * x;
        return x * x2 * (1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 * (1.0 / 5040.0 + x2 / 362880.0)));
    }
    return std::sinh(x) - x;
}

// cosh(x) - 1 = 2 sinh^2(x / 2).
double cosh_minus_one(double x) {
    const double s = std::sinh(0.5 * x);
    return 2.0 * s * s;
}

double quadrature(auto&& f, double a, double b) {
    if (b <= a) {
        return 0.0;
    }
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-13);
}

// Integral of sin^{d-1} over [0, pi].
double sphere_normalizer(int d) {
    return std::sqrt(kPi) * std::tgamma(0.5 * d) / std::tgamma(0.5 * (d + 1));
}

double chord_squared(const Direction& u, const Direction& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double diff = u[i] - v[i];
        s += diff * diff;
    }
    return s;
}

// Polar angle in [0, alpha] with density proportional to sin^{d-1}.
double sample_polar_angle(int d, double alpha, RandomStream& rng) {
    if (d == 1) {
        return alpha * rng.uniform();
    }
    if (d == 2) {
        const double top = std::sin(0.5 * alpha);
        return 2.0 * std::asin(top * std::sqrt(rng.uniform()));
    }
    // Proposal with density proportional to phi^{d-1}; accept with
    // probability (sin phi / phi)^{d-1} <= 1.
    for (;;) {
        const double phi = alpha * std::pow(rng.uniform_open(), 1.0 / d);
        const double ratio = std::sin(phi) / phi;
        if (rng.uniform() < std::pow(ratio, d - 1)) {
            return phi;
        }
    }
}

// Angular radius, seen from the origin, of a ball of hyperbolic radius rho
// centred at distance r from the origin.
double subtended_angle(double r, double rho) {
    if (rho >= r) {
        return kPi;
    }
    return std::asin(std::min(1.0, std::sinh(rho) / std::sinh(r)));
}

}  // namespace

Direction sample_cap_direction(int d, const Direction& axis, double aperture,
                               RandomStream& rng) {
    if (aperture >= kPi || axis.empty()) {
        return random_direction(d, rng);
    }
    if (cap_measure(aperture, d) > 0.25) {
        for (;;) {
            Direction u = random_direction(d, rng);
            if (angle_between(u, axis) <= aperture) {
                return u;
            }
        }
    }
    const double phi = sample_polar_angle(d, aperture, rng);
    if (d == 1) {
        const double base = direction_angle(axis);
        const double angle = rng.uniform() < 0.5 ? base + phi : base - phi;
        return Direction{std::cos(angle), std::sin(angle)};
    }
    // Uniform unit vector orthogonal to the axis.
    Direction w;
    double wn = 0.0;
    do {
        w = random_direction(d, rng);
        const double proj = dot(w, axis);
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] -= proj * axis[i];
        }
        wn = norm(w);
    } while (wn < 1e-8);
    Direction u(axis.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = std::cos(phi) * axis[i] + std::sin(phi) * w[i] / wn;
    }
    return normalized(u);
}

// ---------------------------------------------------------------------------
// HPoint and direction helpers

HPoint HPoint::origin(int d) {
    require_dim(d);
    return HPoint{0.0, unit_axis(d)};
}

HPoint HPoint::polar(double radius, double angle) {
    if (!(radius >= 0.0)) {
        throw std::invalid_argument("radius must be nonnegative");
    }
    return HPoint{radius, Direction{std::cos(angle), std::sin(angle)}};
}

HPoint HPoint::make(double radius, Direction direction) {
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("radius must be finite and nonnegative");
    }
    if (direction.size() < 2) {
        throw std::invalid_argument("direction must live in R^{d+1} with d >= 1");
    }
    return HPoint{radius, normalized(direction)};
}

Direction unit_axis(int d, std::size_t axis) {
    Direction u(static_cast<std::size_t>(d) + 1, 0.0);
    u.at(axis) = 1.0;
    return u;
}

Direction normalized(const Direction& v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw std::invalid_argument("cannot normalize a zero or non-finite vector");
    }
    Direction out(v.begin(), v.end());
    for (double& x : out) {
        x /= n;
    }
    return out;
}

double dot(const Direction& u, const Direction& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        s += u[i] * v[i];
    }
    return s;
}

double norm(const Direction& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

double direction_angle(const Direction& u) {
    return std::atan2(u[1], u[0]);
}

double angle_between(const Direction& u, const Direction& v) {
    double diff = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = u[i] - v[i];
        const double b = u[i] + v[i];
        diff += a * a;
        sum += b * b;
    }
    return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

double distance(const HPoint& a, const HPoint& b) {
    // sinh^2(d/2) = sinh^2((ra - rb)/2) + sinh(ra) sinh(rb) sin^2(theta/2)
    // Points on one ray (or the origin) are exactly |ra - rb| apart.
    const double sin_half_sq = a.radius > 0.0 && b.radius > 0.0
                                   ? std::min(1.0, 0.25 * chord_squared(a.direction, b.direction))
                                   : 0.0;
    if (sin_half_sq == 0.0) {
        return std::abs(a.radius - b.radius);
    }
    const double half_gap = std::sinh(0.5 * (a.radius - b.radius));
    const double x = half_gap * half_gap + std::sinh(a.radius) * std::sinh(b.radius) * sin_half_sq;
    return 2.0 * std::asinh(std::sqrt(x));
}

double angle_at_origin(const HPoint& a, const HPoint& b) {
    if (a.is_origin() || b.is_origin()) {
        throw std::invalid_argument("angle at the origin is undefined for the origin itself");
    }
    return angle_between(a.direction, b.direction);
}

// ---------------------------------------------------------------------------
// Volumes and caps

double sinh_power_integral(double a, double b, int d) {
    require_dim(d);
    if (a < 0.0 || b < a) {
        throw std::invalid_argument("sinh_power_integral needs 0 <= a <= b");
    }
    if (b == a) {
        return 0.0;
    }
    const double gap = b - a;
    switch (d) {
        case 1:
            // cosh b - cosh a
            return 2.0 * std::sinh(0.5 * (a + b)) * std::sinh(0.5 * gap);
        case 2:
            // (cosh(a+b) sinh(b-a) - (b-a)) / 2
            return 0.5 * (cosh_minus_one(a + b) * std::sinh(gap) + sinh_minus_x(gap));
        case 3: {
            // (cb - ca) ((cb^2 + cb ca + ca^2)/3 - 1) with c = 1 + e
            const double ea = cosh_minus_one(a);
            const double eb = cosh_minus_one(b);
            const double diff = 2.0 * std::sinh(0.5 * (a + b)) * std::sinh(0.5 * gap);
            return diff * (ea + eb + (ea * ea + ea * eb + eb * eb) / 3.0);
        }
        default:
            return quadrature([d](double s) { return std::pow(std::sinh(s), d); }, a, b);
    }
}

double ball_volume(double r, int d) {
    if (r < 0.0) {
        throw std::invalid_argument("ball radius must be nonnegative");
    }
    return sinh_power_integral(0.0, r, d);
}

double annulus_volume(double inner, double outer, int d) {
    return sinh_power_integral(inner, outer, d);
}

double cap_measure(double theta, int d) {
    require_dim(d);
    theta = std::clamp(theta, 0.0, kPi);
    switch (d) {
        case 1:
            return theta / kPi;
        case 2: {
            const double s = std::sin(0.5 * theta);
            return s * s;
        }
        case 3:
            return (theta - std::sin(theta) * std::cos(theta)) / kPi;
        default:
            return quadrature([d](double s) { return std::pow(std::sin(s), d - 1); }, 0.0, theta) /
                   sphere_normalizer(d);
    }
}

double cap_measure_bound_constant(int d) {
    require_dim(d);
    return 1.0 / (d * sphere_normalizer(d));
}

double cap_angle_for_measure(double measure, int d) {
    require_dim(d);
    measure = std::clamp(measure, 0.0, 1.0);
    if (d == 1) {
        return measure * kPi;
    }
    if (d == 2) {
        return 2.0 * std::asin(std::sqrt(measure));
    }
    double lo = 0.0;
    double hi = kPi;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cap_measure(mid, d) < measure ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Models

Direction to_poincare(const HPoint& z) {
    Direction x = z.direction;
    const double scale = std::tanh(0.5 * z.radius);
    for (double& c : x) {
        c *= scale;
    }
    return x;
}

HPoint from_poincare(const Direction& x) {
    const double n = norm(x);
    if (!(n < 1.0)) {
        throw std::invalid_argument("point is outside the open unit ball");
    }
    const int d = static_cast<int>(x.size()) - 1;
    if (n == 0.0) {
        return HPoint::origin(d);
    }
    return HPoint{2.0 * std::atanh(n), normalized(x)};
}

std::vector<double> to_hyperboloid(const HPoint& z) {
    std::vector<double> x(z.direction.size() + 1);
    x[0] = std::cosh(z.radius);
    const double s = std::sinh(z.radius);
    for (std::size_t i = 0; i < z.direction.size(); ++i) {
        x[i + 1] = s * z.direction[i];
    }
    return x;
}

HPoint from_hyperboloid(std::span<const double> x) {
    const Direction spatial(x.begin() + 1, x.end());
    const double n = norm(spatial);
    const int d = static_cast<int>(spatial.size()) - 1;
    if (n == 0.0) {
        return HPoint::origin(d);
    }
    return HPoint{std::asinh(n), normalized(spatial)};
}

HPoint geodesic_point(const HPoint& a, const HPoint& b, double s) {
    if (s <= 0.0) {
        return a;
    }
    if (s >= 1.0) {
        return b;
    }
    const double dist = distance(a, b);
    if (dist == 0.0) {
        return a;
    }
    const auto p = to_hyperboloid(a);
    const auto q = to_hyperboloid(b);
    const double wa = std::sinh((1.0 - s) * dist) / std::sinh(dist);
    const double wb = std::sinh(s * dist) / std::sinh(dist);
    std::vector<double> x(p.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = wa * p[i] + wb * q[i];
    }
    return from_hyperboloid(x);
}

Direction random_direction(int d, RandomStream& rng) {
    require_dim(d);
    Direction g(static_cast<std::size_t>(d) + 1);
    double n = 0.0;
    do {
        for (double& x : g) {
            x = rng.normal();
        }
        n = norm(g);
    } while (n < 1e-12);
    for (double& x : g) {
        x /= n;
    }
    return g;
}

RandomRotation::RandomRotation(int d, RandomStream& rng) : dim_(d + 1) {
    require_dim(d);
    const auto n = static_cast<std::size_t>(dim_);
    matrix_.assign(n * n, 0.0);
    // Gram-Schmidt on Gaussian rows yields a Haar-distributed orthogonal matrix.
    for (std::size_t row = 0; row < n; ++row) {
        for (;;) {
            for (std::size_t c = 0; c < n; ++c) {
                matrix_[row * n + c] = rng.normal();
            }
            for (std::size_t prev = 0; prev < row; ++prev) {
                double proj = 0.0;
                for (std::size_t c = 0; c < n; ++c) {
                    proj += matrix_[row * n + c] * matrix_[prev * n + c];
                }
                for (std::size_t c = 0; c < n; ++c) {
                    matrix_[row * n + c] -= proj * matrix_[prev * n + c];
                }
            }
            double len = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                len += matrix_[row * n + c] * matrix_[row * n + c];
            }
            len = std::sqrt(len);
            if (len > 1e-6) {
                for (std::size_t c = 0; c < n; ++c) {
                    matrix_[row * n + c] /= len;
                }
                break;
            }
        }
    }
}

Direction RandomRotation::apply(const Direction& u) const {
    const auto n = static_cast<std::size_t>(dim_);
    Direction out(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            out[r] += matrix_[r * n + c] * u[c];
        }
    }
    return out;
}

HPoint RandomRotation::apply(const HPoint& z) const {
    return HPoint{z.radius, apply(z.direction)};
}

// ---------------------------------------------------------------------------
// Regions

void validate(const Region& region) {
    std::visit(
        [](const auto& shape) {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, Ball>) {
                if (!(shape.radius > 0.0)) throw std::invalid_argument("ball radius must be > 0");
            } else if constexpr (std::is_same_v<T, Annulus>) {
                if (!(shape.inner >= 0.0 && shape.inner < shape.outer)) {
                    throw std::invalid_argument("annulus needs 0 <= inner < outer");
                }
            } else if constexpr (std::is_same_v<T, Cone>) {
                if (!(shape.aperture > 0.0 && shape.aperture <= kPi)) {
                    throw std::invalid_argument("cone aperture must lie in (0, pi]");
                }
                if (shape.axis.size() < 2) throw std::invalid_argument("cone axis missing");
            } else if constexpr (std::is_same_v<T, HalfLens>) {
                if (!(shape.radius > 0.0)) {
                    throw std::invalid_argument("half-lens radius must be > 0");
                }
            } else {
                if (shape.parts.empty()) {
                    throw std::invalid_argument("intersection of zero regions");
                }
                for (const auto& part : shape.parts) validate(part);
            }
        },
        region.shape);
}

bool region_contains(const Region& region, const HPoint& z) {
    return std::visit(
        [&z](const auto& shape) -> bool {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, Ball>) {
                return distance(shape.center, z) < shape.radius;
            } else if constexpr (std::is_same_v<T, Annulus>) {
                return z.radius > shape.inner && z.radius < shape.outer;
            } else if constexpr (std::is_same_v<T, Cone>) {
                return z.is_origin() || angle_between(shape.axis, z.direction) <= shape.aperture;
            } else if constexpr (std::is_same_v<T, HalfLens>) {
                return z.radius < shape.point.radius && distance(shape.point, z) < shape.radius;
            } else {
                return std::all_of(shape.parts.begin(), shape.parts.end(),
                                   [&z](const Region& part) { return region_contains(part, z); });
            }
        },
        region.shape);
}

double AnnularSector::volume(int d) const {
    if (outer <= inner) {
        return 0.0;
    }
    return annulus_volume(inner, outer, d) * cap_measure(aperture, d);
}

namespace {

// Sector of a region with outer = +inf allowed, so that unbounded parts
// still contribute their aperture to an intersection.
AnnularSector raw_sector(const Region& region, int d) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    return std::visit(
        [d](const auto& shape) -> AnnularSector {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, Ball>) {
                const auto& c = shape.center;
                return AnnularSector{std::max(0.0, c.radius - shape.radius), c.radius + shape.radius,
                                     c.direction, subtended_angle(c.radius, shape.radius)};
            } else if constexpr (std::is_same_v<T, Annulus>) {
                return AnnularSector{shape.inner, shape.outer, {}, kPi};
            } else if constexpr (std::is_same_v<T, Cone>) {
                return AnnularSector{0.0, kInf, shape.axis, shape.aperture};
            } else if constexpr (std::is_same_v<T, HalfLens>) {
                const auto& z = shape.point;
                return AnnularSector{std::max(0.0, z.radius - shape.radius), z.radius, z.direction,
                                     subtended_angle(z.radius, shape.radius)};
            } else {
                AnnularSector box{0.0, kInf, {}, kPi};
                for (const auto& part : shape.parts) {
                    const AnnularSector sub = raw_sector(part, d);
                    box.inner = std::max(box.inner, sub.inner);
                    box.outer = std::min(box.outer, sub.outer);
                    if (sub.aperture < box.aperture) {
                        box.aperture = sub.aperture;
                        box.axis = sub.axis;
                    }
                }
                box.outer = std::max(box.outer, box.inner);
                return box;
            }
        },
        region.shape);
}

}  // namespace

std::optional<AnnularSector> bounding_sector(const Region& region, int d) {
    AnnularSector box = raw_sector(region, d);
    if (!std::isfinite(box.outer)) {
        return std::nullopt;
    }
    return box;
}

VolumeEstimate region_volume_mc(const Region& region, int d, std::size_t samples,
                                RandomStream& rng) {
    require_dim(d);
    validate(region);
    if (samples < 1000) {
        throw std::invalid_argument("region_volume_mc needs at least 1000 samples");
    }
    const auto box = bounding_sector(region, d);
    if (!box) {
        throw std::invalid_argument("region is unbounded: no enclosing ball");
    }
    const double total = box->volume(d);
    if (total == 0.0) {
        return {0.0, 0.0};
    }
    const RadialSampler radial(d, box->outer);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double r = radial.sample_between(box->inner, box->outer, rng);
        HPoint z{r, sample_cap_direction(d, box->axis, box->aperture, rng)};
        if (region_contains(region, z)) {
            ++hits;
        }
    }
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    return {total * p, total * std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

// ---------------------------------------------------------------------------
// RadialSampler

RadialSampler::RadialSampler(int d, double max_radius)
    : dim_(d), max_radius_(max_radius), total_volume_(0.0) {
    require_dim(d);
    if (!(max_radius > 0.0) || !std::isfinite(max_radius)) {
        throw std::invalid_argument("radial sampler needs a finite positive radius");
    }
    total_volume_ = ball_volume(max_radius, d);
    if (d == 1) {
        return;
    }
    const double exponent = 1.0 / (d + 1);
    for (std::size_t knots = 4096; knots <= (std::size_t{1} << 20); knots = 2 * knots - 1) {
        knots_r_.resize(knots);
        knots_w_.resize(knots);
        double cumulative = 0.0;
        knots_r_[0] = 0.0;
        knots_w_[0] = 0.0;
        for (std::size_t i = 1; i < knots; ++i) {
            knots_r_[i] = max_radius * static_cast<double>(i) / static_cast<double>(knots - 1);
            cumulative += sinh_power_integral(knots_r_[i - 1], knots_r_[i], d);
            knots_w_[i] = std::pow(std::min(1.0, cumulative / total_volume_), exponent);
        }
        knots_w_.back() = 1.0;
        knots_r_.back() = max_radius;

        // Fritsch-Carlson monotone slopes dr/dw.
        const std::size_t n = knots;
        std::vector<double> secant(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double dw = knots_w_[i + 1] - knots_w_[i];
            secant[i] = dw > 0.0 ? (knots_r_[i + 1] - knots_r_[i]) / dw : 0.0;
        }
        slopes_.assign(n, 0.0);
        slopes_[0] = secant[0];
        slopes_[n - 1] = secant[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (secant[i - 1] * secant[i] <= 0.0) {
                slopes_[i] = 0.0;
            } else {
                const double h0 = knots_w_[i] - knots_w_[i - 1];
                const double h1 = knots_w_[i + 1] - knots_w_[i];
                const double w1 = 2.0 * h1 + h0;
                const double w2 = h1 + 2.0 * h0;
                slopes_[i] = (w1 + w2) / (w1 / secant[i - 1] + w2 / secant[i]);
            }
        }

        max_error_ = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double wm = 0.5 * (knots_w_[i] + knots_w_[i + 1]);
            const double um = std::pow(wm, d + 1);
            max_error_ = std::max(max_error_, std::abs(interpolate(wm) - exact_inverse(um)));
        }
        if (max_error_ < 1e-8) {
            return;
        }
    }
    throw VerificationError("radial inverse CDF table failed to reach 1e-8 accuracy");
}

double RadialSampler::cdf(double r) const {
    r = std::clamp(r, 0.0, max_radius_);
    if (dim_ == 1) {
        const double num = std::sinh(0.5 * r);
        const double den = std::sinh(0.5 * max_radius_);
        return (num * num) / (den * den);
    }
    return std::min(1.0, sinh_power_integral(0.0, r, dim_) / total_volume_);
}

double RadialSampler::exact_inverse(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    double lo = 0.0;
    double hi = max_radius_;
    double r = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = cdf(r) - u;
        if (f < 0.0) {
            lo = r;
        } else {
            hi = r;
        }
        const double density = std::pow(std::sinh(r), dim_) / total_volume_;
        double next = density > 0.0 ? r - f / density : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - r) < 1e-15 * std::max(1.0, r) || hi - lo < 1e-15) {
            return next;
        }
        r = next;
    }
    return r;
}

double RadialSampler::interpolate(double w) const {
    w = std::clamp(w, 0.0, 1.0);
    const auto it = std::upper_bound(knots_w_.begin(), knots_w_.end(), w);
    std::size_t i = it == knots_w_.begin() ? 0 : static_cast<std::size_t>(it - knots_w_.begin()) - 1;
    i = std::min(i, knots_w_.size() - 2);
    const double h = knots_w_[i + 1] - knots_w_[i];
    if (h <= 0.0) {
        return knots_r_[i];
    }
    const double s = (w - knots_w_[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * knots_r_[i] + h10 * h * slopes_[i] + h01 * knots_r_[i + 1] +
           h11 * h * slopes_[i + 1];
}

double RadialSampler::inverse_cdf(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    if (dim_ == 1) {
        return std::min(max_radius_, 2.0 * std::asinh(std::sqrt(u) * std::sinh(0.5 * max_radius_)));
    }
    return std::clamp(interpolate(std::pow(u, 1.0 / (dim_ + 1))), 0.0, max_radius_);
}

double RadialSampler::sample_between(double lo, double hi, RandomStream& rng) const {
    const double ulo = cdf(lo);
    const double uhi = cdf(hi);
    const double r = inverse_cdf(ulo + rng.uniform() * (uhi - ulo));
    return std::clamp(r, lo, hi);
}

}  // namespace hrst
