#include "hrst/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hrst/covering.hpp"
#include "hrst/errors.hpp"
#include "hrst/parallel.hpp"

namespace hrst {

namespace {

constexpr std::array<std::pair<ExperimentKind, const char*>, 7> kKinds{{
    {ExperimentKind::LevelCount, "levelcount"},
    {ExperimentKind::MbdMoments, "mbd"},
    {ExperimentKind::DensityThick, "thick"},
    {ExperimentKind::Straightness, "straightness"},
    {ExperimentKind::StabProbe, "stab"},
    {ExperimentKind::EmptyingDemo, "emptying"},
    {ExperimentKind::BlockBound, "blocks"},
}};

/// Expected points per replication stay below this.
constexpr double kMaxExpectedPoints = 1e5;

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw std::invalid_argument("experiment config: " + what);
    }
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

double cloud_radius(const ExperimentConfig& cfg) { return cfg.horizon + cfg.shell; }

/// The replication's cloud. Sampled in the larger of B(horizon + shell) and
/// B(sample_radius), then restricted, so coupled runs share their points.
PointCloud replicate_cloud(const ExperimentConfig& cfg, RandomStream& rng) {
    const double target = cloud_radius(cfg);
    const double outer = std::max(target, cfg.sample_radius);
    PointCloud cloud = sample_ball(cfg.dim, cfg.lambda, outer, rng,
                                   SamplingOptions{kMaxExpectedPoints});
    return outer > target ? restrict_to_ball(cloud, target) : cloud;
}

ReportRow summary_row(std::string metric, double level, double param,
                      std::span<const double> xs, double confidence) {
    const Summary s = summarize(xs);
    return ReportRow{std::move(metric), level, param, s.mean, s.stderr_,
                     normal_interval(s, confidence), s.n};
}

ReportRow ratio_row(std::string metric, double level, double param, std::span<const double> num,
                    std::span<const double> den, double confidence) {
    const RatioEstimate r = ratio_estimate(num, den, confidence);
    double total = 0.0;
    for (double d : den) {
        total += d;
    }
    return ReportRow{std::move(metric), level, param, r.estimate, r.stderr_, r.ci,
                     static_cast<std::uint64_t>(std::llround(total))};
}

ReportRow proportion_row(std::string metric, double level, double param, std::size_t successes,
                         std::size_t n, double confidence) {
    const double p = n == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(n);
    const double se = n == 0 ? std::numeric_limits<double>::infinity()
                             : std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    return ReportRow{std::move(metric), level, param, p, se, wilson_interval(successes, n, confidence),
                     n};
}

/// A deterministic quantity: its interval is the point itself.
ReportScalar exact_scalar(std::string name, double value) {
    return ReportScalar{std::move(name), value, 0.0, Interval{value, value}};
}

ReportScalar slope_scalar(std::string name, const SlopeEstimate& s) {
    return ReportScalar{std::move(name), s.slope, s.stderr_, s.ci};
}

/// Column k of a replication-major matrix.
std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t k) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r[k]);
    }
    return out;
}

bool all_columns_positive(const std::vector<std::vector<double>>& rows, std::size_t cols) {
    for (std::size_t k = 0; k < cols; ++k) {
        double sum = 0.0;
        for (const auto& r : rows) {
            sum += r[k];
        }
        if (!(sum > 0.0)) {
            return false;
        }
    }
    return true;
}

nlohmann::json number(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

template <class Result, class Rep>
std::vector<Result> run_replications(std::size_t n, const RunOptions& options, Rep&& rep) {
    std::vector<Result> out(n);
    parallel_for(n, options.jobs, [&](std::size_t i) { out[i] = rep(i); });
    return out;
}

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

// ---------------------------------------------------------------------------
// Kinds and configuration

std::string to_string(ExperimentKind kind) {
    for (const auto& [k, name] : kKinds) {
        if (k == kind) {
            return name;
        }
    }
    throw std::invalid_argument("unknown experiment kind");
}

ExperimentKind parse_kind(const std::string& name) {
    for (const auto& [k, n] : kKinds) {
        if (name == n) {
            return k;
        }
    }
    throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

const std::vector<std::string>& kind_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, n] : kKinds) {
            v.emplace_back(n);
        }
        return v;
    }();
    return names;
}

void ExperimentConfig::validate() const {
    require(dim >= 1, "dim must be >= 1");
    require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
    require(positive(horizon), "horizon must be positive");
    require(std::isfinite(margin) && margin >= 0.0, "margin must be >= 0");
    require(std::isfinite(shell) && shell >= 0.0, "shell must be >= 0");
    require(std::isfinite(sample_radius) && sample_radius >= 0.0, "sample_radius must be >= 0");
    require(reps >= 1, "reps must be >= 1");
    require(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
    const double expected = lambda * ball_volume(std::max(cloud_radius(*this), sample_radius), dim);
    if (expected > kMaxExpectedPoints) {
        throw ResourceCapError("experiment config: expected " + format_double(expected) +
                               " points per replication exceeds the cap of 1e5");
    }
    const double top = horizon - margin;
    auto check_levels = [&](const std::vector<double>& ls, const std::string& name) {
        require(!ls.empty(), name + " must be nonempty");
        for (double r : ls) {
            require(std::isfinite(r) && r >= 1.0 && r <= top,
                    name + " must lie in [1, horizon - margin]");
        }
        require(std::is_sorted(ls.begin(), ls.end()) &&
                    std::adjacent_find(ls.begin(), ls.end()) == ls.end(),
                name + " must be strictly increasing");
    };
    switch (kind) {
        case ExperimentKind::LevelCount:
            check_levels(levels, "levels");
            require(caps_per_level >= 1, "caps_per_level must be >= 1");
            break;
        case ExperimentKind::MbdMoments:
            check_levels(levels, "levels");
            require(p >= 1.5 * dim, "p must be >= 3d/2");
            break;
        case ExperimentKind::DensityThick:
            check_levels(levels, "levels");
            require(positive(cap_scale), "cap_scale must be positive");
            break;
        case ExperimentKind::Straightness:
            require(bins.size() >= 2, "bins needs at least two edges");
            require(std::is_sorted(bins.begin(), bins.end()) &&
                        std::adjacent_find(bins.begin(), bins.end()) == bins.end(),
                    "bins must be strictly increasing");
            require(bins.front() >= 1.0 && bins.back() <= top, "bins must lie in [1, horizon - margin]");
            require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
            break;
        case ExperimentKind::StabProbe:
            check_levels(probe_levels, "probe_levels");
            require(!h_values.empty(), "h_values must be nonempty");
            for (double hv : h_values) {
                require(positive(hv), "h values must be positive");
            }
            require(positive(delta_prime), "delta_prime must be positive");
            require(resamples >= 1 && directions >= 1, "resamples and directions must be >= 1");
            for (double r : probe_levels) {
                for (double hv : h_values) {
                    require(r + hv + delta_prime + margin <= horizon,
                            "r + h + delta_prime + margin must not exceed the horizon");
                }
            }
            break;
        case ExperimentKind::EmptyingDemo:
            require(positive(delta) && positive(delta_prime) && positive(h), "delta, delta_prime, h must be positive");
            require(positive(z1_min_radius), "z1_min_radius must be positive");
            require(z1_min_radius + h + delta_prime + margin <= horizon,
                    "z1_min_radius + h + delta_prime + margin must not exceed the horizon");
            require(resamples >= 1, "resamples must be >= 1");
            require(target_eligible >= 1 && batch >= 1, "target_eligible and batch must be >= 1");
            require(positive(theta_tolerance), "theta_tolerance must be positive");
            require(positive(cap_scale), "cap_scale must be positive");
            break;
        case ExperimentKind::BlockBound:
            require(!deltas.empty(), "deltas must be nonempty");
            for (double dl : deltas) {
                require(dl > 0.0 && dl < 1.0, "deltas must lie in (0, 1)");
            }
            require(std::is_sorted(deltas.begin(), deltas.end()), "deltas must be increasing");
            require(block_level_min >= 1 && block_level_min <= block_level_max, "block levels out of order");
            require(block_level_max + 1 <= cloud_radius(*this),
                    "block_level_max + 1 must not exceed horizon + shell");
            require(volume_samples >= 1000, "volume_samples must be >= 1000");
            break;
    }
}

nlohmann::json to_json(const ExperimentConfig& c) {
    return nlohmann::json{
        {"kind", to_string(c.kind)},
        {"dim", c.dim},
        {"lambda", c.lambda},
        {"horizon", c.horizon},
        {"margin", c.margin},
        {"shell", c.shell},
        {"sample_radius", c.sample_radius},
        {"levels", c.levels},
        {"reps", c.reps},
        {"seed", c.seed},
        {"confidence", c.confidence},
        {"caps_per_level", c.caps_per_level},
        {"p", c.p},
        {"cap_scale", c.cap_scale},
        {"epsilon", c.epsilon},
        {"bins", c.bins},
        {"delta", c.delta},
        {"delta_prime", c.delta_prime},
        {"h_values", c.h_values},
        {"probe_levels", c.probe_levels},
        {"resamples", c.resamples},
        {"directions", c.directions},
        {"h", c.h},
        {"z1_min_radius", c.z1_min_radius},
        {"target_eligible", c.target_eligible},
        {"batch", c.batch},
        {"theta_tolerance", c.theta_tolerance},
        {"deltas", c.deltas},
        {"block_level_min", c.block_level_min},
        {"block_level_max", c.block_level_max},
        {"volume_samples", c.volume_samples},
    };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("experiment config must be a JSON object");
    }
    ExperimentConfig c;
    if (j.contains("kind")) {
        c = default_config(parse_kind(j.at("kind").get<std::string>()));
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") continue;
        else if (key == "dim") value.get_to(c.dim);
        else if (key == "lambda") value.get_to(c.lambda);
        else if (key == "horizon") value.get_to(c.horizon);
        else if (key == "margin") value.get_to(c.margin);
        else if (key == "shell") value.get_to(c.shell);
        else if (key == "sample_radius") value.get_to(c.sample_radius);
        else if (key == "levels") value.get_to(c.levels);
        else if (key == "reps") value.get_to(c.reps);
        else if (key == "seed") value.get_to(c.seed);
        else if (key == "confidence") value.get_to(c.confidence);
        else if (key == "caps_per_level") value.get_to(c.caps_per_level);
        else if (key == "p") value.get_to(c.p);
        else if (key == "cap_scale") value.get_to(c.cap_scale);
        else if (key == "epsilon") value.get_to(c.epsilon);
        else if (key == "bins") value.get_to(c.bins);
        else if (key == "delta") value.get_to(c.delta);
        else if (key == "delta_prime") value.get_to(c.delta_prime);
        else if (key == "h_values") value.get_to(c.h_values);
        else if (key == "probe_levels") value.get_to(c.probe_levels);
        else if (key == "resamples") value.get_to(c.resamples);
        else if (key == "directions") value.get_to(c.directions);
        else if (key == "h") value.get_to(c.h);
        else if (key == "z1_min_radius") value.get_to(c.z1_min_radius);
        else if (key == "target_eligible") value.get_to(c.target_eligible);
        else if (key == "batch") value.get_to(c.batch);
        else if (key == "theta_tolerance") value.get_to(c.theta_tolerance);
        else if (key == "deltas") value.get_to(c.deltas);
        else if (key == "block_level_min") value.get_to(c.block_level_min);
        else if (key == "block_level_max") value.get_to(c.block_level_max);
        else if (key == "volume_samples") value.get_to(c.volume_samples);
        else throw std::invalid_argument("unknown experiment config field '" + key + "'");
    }
    return c;
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    // Horizon 10 keeps every per-level statistic within 2% of its value at
    // horizon 11; at 8 the top levels move by up to 16%. The thick fraction
    // is defined relative to the horizon and keeps the reference value 8.
    switch (kind) {
        case ExperimentKind::LevelCount:
            c.horizon = 10.0;
            c.levels = {2, 3, 4, 5, 6};
            c.reps = 200;
            break;
        case ExperimentKind::MbdMoments:
            c.horizon = 10.0;
            c.levels = {2, 3, 4, 5};
            c.reps = 300;
            break;
        case ExperimentKind::DensityThick:
            c.levels = {2, 3, 4, 5};
            c.reps = 200;
            break;
        case ExperimentKind::Straightness:
            c.horizon = 10.0;
            c.bins = {2, 3, 4, 5, 6};
            c.reps = 100;
            break;
        case ExperimentKind::StabProbe:
            c.horizon = 10.0;
            c.shell = 0.0;
            c.reps = 200;
            break;
        case ExperimentKind::EmptyingDemo:
            c.horizon = 9.0;
            c.reps = 640;
            break;
        case ExperimentKind::BlockBound:
            c.horizon = 7.0;
            c.shell = 0.0;
            c.reps = 20;
            break;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Reports

const ReportRow* ExperimentReport::row(const std::string& metric, double level, double param) const {
    for (const auto& r : rows) {
        if (r.metric == metric && r.level == level && r.param == param) {
            return &r;
        }
    }
    return nullptr;
}

std::vector<const ReportRow*> ExperimentReport::rows_of(const std::string& metric) const {
    std::vector<const ReportRow*> out;
    for (const auto& r : rows) {
        if (r.metric == metric) {
            out.push_back(&r);
        }
    }
    return out;
}

const ReportScalar* ExperimentReport::scalar(const std::string& name) const {
    for (const auto& s : scalars) {
        if (s.name == name) {
            return &s;
        }
    }
    return nullptr;
}

nlohmann::json to_json(const ExperimentReport& report, bool include_timing) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"metric", r.metric},
                        {"level", r.level},
                        {"param", r.param},
                        {"estimate", number(r.estimate)},
                        {"stderr", number(r.stderr_)},
                        {"ci", {number(r.ci.low), number(r.ci.high)}},
                        {"samples", r.samples}});
    }
    nlohmann::json scalars = nlohmann::json::array();
    for (const auto& s : report.scalars) {
        scalars.push_back({{"name", s.name},
                           {"estimate", number(s.estimate)},
                           {"stderr", number(s.stderr_)},
                           {"ci", {number(s.ci.low), number(s.ci.high)}}});
    }
    nlohmann::json seeds = nlohmann::json::array();
    for (std::size_t i = 0; i < report.replications; ++i) {
        seeds.push_back({report.config.seed, i});
    }
    nlohmann::json j{{"schema_version", ExperimentReport::kSchemaVersion},
                     {"config", to_json(report.config)},
                     {"confidence", report.config.confidence},
                     {"replications", report.replications},
                     {"replication_seeds", std::move(seeds)},
                     {"rows", std::move(rows)},
                     {"scalars", std::move(scalars)},
                     {"notes", report.notes}};
    if (include_timing) {
        j["wall_clock_seconds"] = report.wall_clock_seconds;
    }
    return j;
}

std::string report_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "metric,level,param,estimate,stderr,ciLow,ciHigh,samples\n";
    for (const auto& r : report.rows) {
        out << r.metric << ',' << format_double(r.level) << ',' << format_double(r.param) << ','
            << format_double(r.estimate) << ',' << format_double(r.stderr_) << ','
            << format_double(r.ci.low) << ',' << format_double(r.ci.high) << ',' << r.samples
            << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Stability probe

StabilityProbe::StabilityProbe(const RadialTree& tree, double r, std::size_t resamples,
                               RandomStream& rng)
    : tree_(tree), r_(r) {
    const auto& pts = tree.cloud().points;
    const std::size_t n = pts.size();
    first_outer_ = static_cast<std::size_t>(
        std::lower_bound(pts.begin(), pts.end(), r,
                         [](const HPoint& p, double x) { return p.radius < x; }) -
        pts.begin());

    // Sensitive points and their best candidate outside B(r). The origin is
    // always a candidate, so only outer points closer than r_y matter.
    struct Sensitive {
        std::size_t y;
        std::size_t best;
        double best_distance;
    };
    std::vector<Sensitive> sensitive;
    for (std::size_t y = first_outer_; y < n; ++y) {
        const double ry = pts[y].radius;
        if (!(tree.ancestor_distance(y) > ry - r)) {
            continue;
        }
        Sensitive s{y, kOrigin, ry};
        for (std::size_t j = y; j-- > first_outer_;) {
            if (ry - pts[j].radius > s.best_distance) {
                break;
            }
            const double dist = distance(pts[y], pts[j]);
            if (dist < s.best_distance || (dist == s.best_distance && s.best != kOrigin && j < s.best)) {
                s.best_distance = dist;
                s.best = j;
            }
        }
        sensitive.push_back(s);
    }

    changes_.resize(resamples);
    for (std::size_t k = 0; k < resamples; ++k) {
        const PointCloud inner = sample_ball(tree.dim(), tree.cloud().intensity, r, rng);
        auto& changed = changes_[k];
        for (const auto& s : sensitive) {
            std::size_t best = s.best;
            double best_distance = s.best_distance;
            bool inner_wins = false;
            for (const auto& q : inner.points) {
                const double dist = distance(pts[s.y], q);
                if (dist < best_distance) {
                    best_distance = dist;
                    inner_wins = true;
                }
            }
            const std::size_t fresh = inner_wins ? kOrigin : best;
            const std::size_t old_parent = tree.parent(s.y);
            const std::size_t old = (old_parent == kOrigin || old_parent < first_outer_) ? kOrigin : old_parent;
            if (fresh != old) {
                changed.emplace_back(s.y, fresh);
            }
        }
    }
}

std::vector<std::size_t> StabilityProbe::points_in_ball(const HPoint& center, double radius) const {
    const auto& pts = tree_.cloud().points;
    auto lo = std::lower_bound(pts.begin(), pts.end(), center.radius - radius,
                               [](const HPoint& p, double x) { return p.radius < x; });
    std::vector<std::size_t> out;
    for (auto it = lo; it != pts.end() && it->radius <= center.radius + radius; ++it) {
        if (distance(*it, center) < radius) {
            out.push_back(static_cast<std::size_t>(it - pts.begin()));
        }
    }
    return out;
}

bool StabilityProbe::member(std::size_t y, std::size_t w,
                            const std::vector<std::pair<std::size_t, std::size_t>>* changes) const {
    std::size_t cur = y;
    const double rw = tree_.radius(w);
    for (;;) {
        if (cur == w) {
            return true;
        }
        if (tree_.radius(cur) <= rw) {
            return false;
        }
        std::size_t p = tree_.parent(cur);
        if (changes != nullptr) {
            auto it = std::lower_bound(changes->begin(), changes->end(), cur,
                                       [](const auto& c, std::size_t v) { return c.first < v; });
            if (it != changes->end() && it->first == cur) {
                p = it->second;
            }
        }
        if (p == kOrigin || p < first_outer_) {
            return false;
        }
        cur = p;
    }
}

bool StabilityProbe::stable(const std::vector<std::size_t>& watched) const {
    for (std::size_t w : watched) {
        if (w < first_outer_) {
            throw std::invalid_argument("stability probe: watched point inside B(r)");
        }
    }
    // D(w) changes iff some re-parented point above w switches membership.
    for (const auto& changed : changes_) {
        for (const auto& [y, fresh] : changed) {
            for (std::size_t w : watched) {
                if (tree_.radius(y) <= tree_.radius(w) || y == w) {
                    continue;
                }
                if (member(y, w, nullptr) != member(y, w, &changed)) {
                    return false;
                }
            }
        }
    }
    return true;
}

bool stable_by_rebuild(const RadialTree& tree, double r, const std::vector<std::size_t>& watched,
                       const std::vector<std::vector<HPoint>>& inner_samples) {
    const PointCloud& cloud = tree.cloud();
    const auto first_outer = static_cast<std::size_t>(
        std::lower_bound(cloud.points.begin(), cloud.points.end(), r,
                         [](const HPoint& p, double x) { return p.radius < x; }) -
        cloud.points.begin());
    for (const auto& inner : inner_samples) {
        std::vector<HPoint> pts = inner;
        pts.insert(pts.end(), cloud.points.begin() + static_cast<std::ptrdiff_t>(first_outer),
                   cloud.points.end());
        const RadialTree fresh =
            build(make_cloud(cloud.dim, cloud.intensity, cloud.domain_radius, std::move(pts)));
        // Outer point i sits at index i - first_outer + inner.size() in the rebuilt cloud.
        const std::size_t shift = inner.size();
        for (std::size_t w : watched) {
            std::vector<std::size_t> before = descendants(tree, w).members;
            for (auto& v : before) {
                v = v - first_outer + shift;
            }
            std::vector<std::size_t> after = descendants(fresh, w - first_outer + shift).members;
            std::sort(before.begin(), before.end());
            std::sort(after.begin(), after.end());
            if (before != after) {
                return false;
            }
        }
    }
    return true;
}

bool in_emptying_set(const HPoint& p, double r, double h, double delta_prime, double theta,
                     const HPoint& z2) {
    if (!(p.radius > r) || !(p.radius < r + h + delta_prime)) {
        return false;
    }
    if (distance(p, z2) < delta_prime) {
        return false;
    }
    return angle_between(p.direction, z2.direction) <= theta;
}

std::size_t parent_after_emptying(const RadialTree& tree, std::size_t z, double r, double h,
                                  double delta_prime, double theta, const HPoint& z2) {
    const auto& pts = tree.cloud().points;
    std::size_t best = kOrigin;
    double best_distance = pts[z].radius;
    for (std::size_t j = 0; j < z; ++j) {
        if (in_emptying_set(pts[j], r, h, delta_prime, theta, z2)) {
            continue;
        }
        const double dist = distance(pts[z], pts[j]);
        if (dist < best_distance) {
            best_distance = dist;
            best = j;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Runners

namespace {

ExperimentReport start_report(const ExperimentConfig& cfg, ExperimentKind kind) {
    if (cfg.kind != kind) {
        throw std::invalid_argument("experiment config kind mismatch: expected " + to_string(kind));
    }
    cfg.validate();
    ExperimentReport report;
    report.config = cfg;
    report.replications = cfg.reps;
    return report;
}

/// Adds the log-mean slope of a per-level matrix, or a note when a level
/// has a zero mean.
void add_log_slope(ExperimentReport& report, const std::string& name, std::span<const double> x,
                   const std::vector<std::vector<double>>& rows) {
    if (x.size() < 2) {
        report.notes.push_back(name + ": fewer than two levels; slope not fitted");
        return;
    }
    if (!all_columns_positive(rows, x.size())) {
        report.notes.push_back(name + ": a level has zero mean; slope not fitted");
        return;
    }
    report.scalars.push_back(
        slope_scalar(name, jackknife_log_slope(x, rows, report.config.confidence)));
}

}  // namespace

ExperimentReport run_levelcount(const ExperimentConfig& cfg, const RunOptions& options) {
    const Stopwatch clock;
    ExperimentReport report = start_report(cfg, ExperimentKind::LevelCount);
    const std::size_t L = cfg.levels.size();
    struct Rep {
        std::vector<double> counts, cap_mean, cap_square;
    };
    const auto reps = run_replications<Rep>(cfg.reps, options, [&](std::size_t i) {
        RandomStream rng(cfg.seed, i);
        const RadialTree tree = build(replicate_cloud(cfg, rng));
        RandomStream caps = rng.substream(1);
        Rep rep;
        for (double r : cfg.levels) {
            const auto crossings = level_set(tree, r);
            rep.counts.push_back(static_cast<double>(crossings.size()));
            const double aperture = std::exp(-r);
            double sum = 0.0, sum_sq = 0.0;
            for (std::size_t c = 0; c < cfg.caps_per_level; ++c) {
                const Direction u = random_direction(cfg.dim, caps);
                double k = 0.0;
                for (const auto& x : crossings) {
                    if (angle_between(u, x.location.direction) <= aperture) {
                        k += 1.0;
                    }
                }
                sum += k;
                sum_sq += k * k;
            }
            const auto m = static_cast<double>(cfg.caps_per_level);
            rep.cap_mean.push_back(sum / m);
            rep.cap_square.push_back(sum_sq / m);
        }
        return rep;
    });

    std::vector<std::vector<double>> counts, squares;
    for (const auto& r : reps) {
        counts.push_back(r.counts);
        squares.push_back(r.cap_square);
    }
    for (std::size_t k = 0; k < L; ++k) {
        const double r = cfg.levels[k];
        report.rows.push_back(summary_row("level_count", r, 0, column(counts, k), cfg.confidence));
        std::vector<double> mean;
        for (const auto& rep : reps) {
            mean.push_back(rep.cap_mean[k]);
        }
        report.rows.push_back(summary_row("cap_count", r, 0, mean, cfg.confidence));
        report.rows.push_back(
            summary_row("cap_second_moment", r, 0, column(squares, k), cfg.confidence));
    }
    add_log_slope(report, "level_count_log_slope", cfg.levels, counts);
    report.scalars.push_back(exact_scalar("predicted_log_slope", cfg.dim));
    if (L >= 2) {
        std::vector<double> slopes;
        for (const auto& rep : reps) {
            slopes.push_back(linear_fit(cfg.levels, rep.cap_square).slope);
        }
        const Summary s = summarize(slopes);
        report.scalars.push_back(ReportScalar{"cap_second_moment_trend", s.mean, s.stderr_,
                                              normal_interval(s, cfg.confidence)});
    }
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_mbd_moments(const ExperimentConfig& cfg, const RunOptions& options) {
    const Stopwatch clock;
    ExperimentReport report = start_report(cfg, ExperimentKind::MbdMoments);
    const std::size_t L = cfg.levels.size();
    struct Rep {
        std::vector<double> moment, counts, max_mbd;
    };
    const auto reps = run_replications<Rep>(cfg.reps, options, [&](std::size_t i) {
        RandomStream rng(cfg.seed, i);
        const RadialTree tree = build(replicate_cloud(cfg, rng));
        Rep rep;
        for (double r : cfg.levels) {
            double sum = 0.0, top = 0.0;
            const auto crossings = level_set(tree, r);
            for (const auto& x : crossings) {
                const double m = mbd(tree, x, cfg.horizon);
                sum += std::pow(m, cfg.p);
                top = std::max(top, m);
            }
            rep.moment.push_back(sum);
            rep.counts.push_back(static_cast<double>(crossings.size()));
            rep.max_mbd.push_back(top);
        }
        return rep;
    });
    std::vector<std::vector<double>> moments, counts, tops;
    for (const auto& r : reps) {
        moments.push_back(r.moment);
        counts.push_back(r.counts);
        tops.push_back(r.max_mbd);
    }
    for (std::size_t k = 0; k < L; ++k) {
        const double r = cfg.levels[k];
        report.rows.push_back(summary_row("mbd_moment", r, cfg.p, column(moments, k), cfg.confidence));
        report.rows.push_back(summary_row("level_count", r, 0, column(counts, k), cfg.confidence));
        report.rows.push_back(summary_row("max_mbd", r, 0, column(tops, k), cfg.confidence));
    }
    add_log_slope(report, "mbd_moment_log_slope", cfg.levels, moments);
    report.scalars.push_back(exact_scalar("predicted_log_slope", cfg.dim - cfg.p));
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_density_thick(const ExperimentConfig& cfg, const RunOptions& options) {
    const Stopwatch clock;
    ExperimentReport report = start_report(cfg, ExperimentKind::DensityThick);
    const std::size_t L = cfg.levels.size();
    HorizonConfig hc;
    hc.horizon_radius = cfg.horizon;
    hc.censor_margin = cfg.margin;
    hc.cap_scale = cfg.cap_scale;
    struct Rep {
        std::vector<double> count, thick, survived, sigma_sum, cs_bound;
        double coverage = 0.0;
    };
    const auto reps = run_replications<Rep>(cfg.reps, options, [&](std::size_t i) {
        RandomStream rng(cfg.seed, i);
        const RadialTree tree = build(replicate_cloud(cfg, rng));
        RandomStream caps = rng.substream(1);
        Rep rep;
        for (double r : cfg.levels) {
            double thick = 0, survived = 0, s1 = 0, s2 = 0;
            const auto crossings = level_set(tree, r);
            for (const auto& x : crossings) {
                const TraceEstimate t = trace_estimate(tree, x, hc, caps);
                thick += t.thick() ? 1.0 : 0.0;
                survived += t.survived ? 1.0 : 0.0;
                s1 += t.sigma_proxy;
                s2 += t.sigma_proxy * t.sigma_proxy;
            }
            rep.count.push_back(static_cast<double>(crossings.size()));
            rep.thick.push_back(thick);
            rep.survived.push_back(survived);
            rep.sigma_sum.push_back(s1);
            rep.cs_bound.push_back(s2 > 0.0 ? s1 * s1 / s2 : 0.0);
        }
        std::vector<Direction> horizon_dirs;
        for (const auto& x : level_set(tree, cfg.horizon)) {
            horizon_dirs.push_back(x.location.direction);
        }
        rep.coverage = cap_union_measure(horizon_dirs, cfg.cap_scale * std::exp(-cfg.horizon),
                                         cfg.dim, hc.cap_samples, caps);
        return rep;
    });
    auto col = [&](auto member, std::size_t k) {
        std::vector<double> out;
        for (const auto& rep : reps) {
            out.push_back((rep.*member)[k]);
        }
        return out;
    };
    for (std::size_t k = 0; k < L; ++k) {
        const double r = cfg.levels[k];
        const auto count = col(&Rep::count, k);
        const auto thick = col(&Rep::thick, k);
        report.rows.push_back(ratio_row("thick_fraction", r, 0, thick, count, cfg.confidence));
        double t = 0, n = 0;
        for (std::size_t i = 0; i < reps.size(); ++i) {
            t += thick[i];
            n += count[i];
        }
        report.rows.push_back(proportion_row("thick_fraction_pooled", r, 0,
                                             static_cast<std::size_t>(t), static_cast<std::size_t>(n),
                                             cfg.confidence));
        report.rows.push_back(
            ratio_row("survival_fraction", r, 0, col(&Rep::survived, k), count, cfg.confidence));
        report.rows.push_back(summary_row("thick_count", r, 0, thick, cfg.confidence));
        report.rows.push_back(summary_row("level_count", r, 0, count, cfg.confidence));
        report.rows.push_back(summary_row("sigma_sum", r, 0, col(&Rep::sigma_sum, k), cfg.confidence));
        report.rows.push_back(
            summary_row("cauchy_schwarz_bound", r, 0, col(&Rep::cs_bound, k), cfg.confidence));
    }
    std::vector<double> coverage;
    for (const auto& rep : reps) {
        coverage.push_back(rep.coverage);
    }
    const Summary s = summarize(coverage);
    report.scalars.push_back(
        ReportScalar{"horizon_coverage", s.mean, s.stderr_, normal_interval(s, cfg.confidence)});
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_straightness(const ExperimentConfig& cfg, const RunOptions& options) {
    const Stopwatch clock;
    ExperimentReport report = start_report(cfg, ExperimentKind::Straightness);
    const std::size_t B = cfg.bins.size() - 1;
    const auto reps = run_replications<StraightnessProfile>(cfg.reps, options, [&](std::size_t i) {
        RandomStream rng(cfg.seed, i);
        const RadialTree tree = build(replicate_cloud(cfg, rng));
        return straightness_profile(tree, cfg.epsilon, cfg.bins, cfg.horizon - cfg.margin);
    });
    for (std::size_t b = 0; b < B; ++b) {
        std::vector<double> flagged, vertices;
        for (const auto& p : reps) {
            flagged.push_back(static_cast<double>(p.flagged[b]));
            vertices.push_back(static_cast<double>(p.vertices[b]));
        }
        report.rows.push_back(
            ratio_row("violation_fraction", cfg.bins[b], cfg.epsilon, flagged, vertices, cfg.confidence));
        report.rows.push_back(summary_row("vertices", cfg.bins[b], 0, vertices, cfg.confidence));
    }
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_stab_probe(const ExperimentConfig& cfg, const RunOptions& options) {
    const Stopwatch clock;
    ExperimentReport report = start_report(cfg, ExperimentKind::StabProbe);
    const std::size_t R = cfg.probe_levels.size();
    const std::size_t H = cfg.h_values.size();
    // Per (level, h): probes, stable, nonvacuous, nonvacuous and stable.
    using Counts = std::vector<std::array<double, 4>>;
    const auto reps = run_replications<Counts>(cfg.reps, options, [&](std::size_t i) {
        RandomStream rng(cfg.seed, i);
        const RadialTree tree = build(replicate_cloud(cfg, rng));
        RandomStream dirs = rng.substream(1);
        std::vector<Direction> us;
        for (std::size_t j = 0; j < cfg.directions; ++j) {
            us.push_back(random_direction(cfg.dim, dirs));
        }
        Counts counts(R * H, {0, 0, 0, 0});
        for (std::size_t a = 0; a < R; ++a) {
            const double r = cfg.probe_levels[a];
            RandomStream inner = rng.substream(2 + a);
            const StabilityProbe probe(tree, r, cfg.resamples, inner);
            for (std::size_t b = 0; b < H; ++b) {
                for (const auto& u : us) {
                    const HPoint z2{r + cfg.h_values[b], u};
                    const auto watched = probe.points_in_ball(z2, cfg.delta_prime);
                    const bool ok = probe.stable(watched);
                    auto& c = counts[a * H + b];
                    c[0] += 1;
                    c[1] += ok ? 1 : 0;
                    c[2] += watched.empty() ? 0 : 1;
                    c[3] += (!watched.empty() && ok) ? 1 : 0;
                }
            }
        }
        return counts;
    });
    for (std::size_t a = 0; a < R; ++a) {
        for (std::size_t b = 0; b < H; ++b) {
            std::array<std::vector<double>, 4> cols;
            for (const auto& rep : reps) {
                for (std::size_t q = 0; q < 4; ++q) {
                    cols[q].push_back(rep[a * H + b][q]);
                }
            }
            const double r = cfg.probe_levels[a];
            const double hv = cfg.h_values[b];
            report.rows.push_back(ratio_row("stability_frequency", r, hv, cols[1], cols[0], cfg.confidence));
            report.rows.push_back(
                ratio_row("conditional_stability", r, hv, cols[3], cols[2], cfg.confidence));
            report.rows.push_back(ratio_row("nonvacuous_fraction", r, hv, cols[2], cols[0], cfg.confidence));
        }
    }
    report.wall_clock_seconds = clock.seconds();
    return report;
}

namespace {

struct EmptyingOutcome {
    bool eligible = false;
    std::size_t candidates = 0;
    double level = 0.0;
    double theta_low = 0.0;
    double theta_high = 0.0;
    bool full_success = false;       // A(z) = z1 after emptying U(pi)
    bool bisected_success = false;   // A(z) = z1 at the bisected theta
    bool rebuild_agrees = false;     // rst.build on the edited cloud agrees
    bool descendants_kept = false;   // D_old(z) survives inside D_new(z)
    bool trace_attached = false;     // z still reaches the horizon below z1
};

/// First eligible (z1, z) pair of a replication, and the re-parenting
/// demonstration on it.
EmptyingOutcome emptying_replication(const ExperimentConfig& cfg, std::size_t i) {
    RandomStream rng(cfg.seed, i);
    const RadialTree tree = build(replicate_cloud(cfg, rng));
    RandomStream traces = rng.substream(1);
    RandomStream inner = rng.substream(2);
    const auto& pts = tree.cloud().points;
    HorizonConfig hc;
    hc.horizon_radius = cfg.horizon;
    hc.censor_margin = cfg.margin;
    hc.cap_scale = cfg.cap_scale;
    const double dp = cfg.delta_prime;
    const double r_top = cfg.horizon - cfg.margin - cfg.h - dp;

    EmptyingOutcome out;
    for (std::size_t z1 = 0; z1 < pts.size(); ++z1) {
        const double r = pts[z1].radius;
        if (r < cfg.z1_min_radius) continue;
        if (r > r_top) break;
        if (tree.ancestor_distance(z1) < cfg.delta) continue;
        ++out.candidates;
        const HPoint z2{r + cfg.h, pts[z1].direction};
        // (i) a unique point z in B(z2, delta').
        std::vector<std::size_t> near;
        for (std::size_t j = z1 + 1; j < pts.size() && pts[j].radius < z2.radius + dp; ++j) {
            if (pts[j].radius > z2.radius - dp && distance(pts[j], z2) < dp) {
                near.push_back(j);
            }
        }
        if (near.size() != 1) continue;
        const std::size_t z = near.front();
        // (iv) the rest of D(z) lies outside B(r + h + delta').
        bool outside = true;
        for (std::size_t c : tree.children(z)) {
            outside = outside && pts[c].radius >= r + cfg.h + dp;
        }
        if (!outside) continue;
        // (ii) a thick trace at the horizon.
        if (!trace_estimate(tree, z, hc, traces).thick()) continue;
        // (iii) insensitivity to the configuration inside B(r).
        const StabilityProbe probe(tree, r, cfg.resamples, inner);
        if (!probe.stable({z})) continue;

        out.eligible = true;
        out.level = r;
        auto succeeds = [&](double theta) {
            return parent_after_emptying(tree, z, r, cfg.h, dp, theta, z2) == z1;
        };
        const double pi = std::numbers::pi;
        out.full_success = succeeds(pi);
        if (succeeds(0.0)) {
            out.theta_low = out.theta_high = 0.0;
        } else if (out.full_success) {
            // Success is monotone in theta: U grows and z1 is never removed.
            double lo = 0.0, hi = pi;
            while (hi - lo > cfg.theta_tolerance) {
                const double mid = 0.5 * (lo + hi);
                (succeeds(mid) ? hi : lo) = mid;
            }
            out.theta_low = lo;
            out.theta_high = hi;
        } else {
            out.theta_low = out.theta_high = std::numeric_limits<double>::quiet_NaN();
            return out;
        }
        const double theta = out.theta_high;
        out.bisected_success = succeeds(theta);

        std::vector<std::size_t> new_index(pts.size(), kOrigin);
        std::size_t kept = 0;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (!in_emptying_set(pts[j], r, cfg.h, dp, theta, z2)) {
                new_index[j] = kept++;
            }
        }
        const RadialTree edited = build(remove_points(
            tree.cloud(), [&](const HPoint& p) { return in_emptying_set(p, r, cfg.h, dp, theta, z2); }));
        const std::size_t z_new = new_index[z];
        out.rebuild_agrees = edited.parent(z_new) == new_index[z1];
        std::vector<std::size_t> after = descendants(edited, z_new).members;
        std::sort(after.begin(), after.end());
        out.descendants_kept = true;
        for (std::size_t v : descendants(tree, z).members) {
            out.descendants_kept = out.descendants_kept && new_index[v] != kOrigin &&
                                   std::binary_search(after.begin(), after.end(), new_index[v]);
        }
        out.trace_attached = out.rebuild_agrees && trace_estimate(edited, z_new, hc, traces).thick();
        return out;
    }
    return out;
}

}  // namespace

ExperimentReport run_emptying_demo(const ExperimentConfig& cfg, const RunOptions& options) {
    const Stopwatch clock;
    ExperimentReport report = start_report(cfg, ExperimentKind::EmptyingDemo);
    // Fixed-size batches keep the stopping point independent of the job count.
    std::vector<EmptyingOutcome> outcomes;
    std::size_t eligible = 0;
    std::size_t used = 0;
    while (used < cfg.reps && eligible < cfg.target_eligible) {
        const std::size_t first = outcomes.size();
        const std::size_t count = std::min(cfg.batch, cfg.reps - first);
        auto batch = run_replications<EmptyingOutcome>(
            count, options, [&](std::size_t k) { return emptying_replication(cfg, first + k); });
        for (auto& o : batch) {
            outcomes.push_back(o);
            ++used;
            eligible += o.eligible ? 1 : 0;
            if (eligible >= cfg.target_eligible) break;
        }
    }
    report.replications = used;

    std::size_t full = 0, bisected = 0, rebuilt = 0, kept = 0, attached = 0;
    std::vector<double> thresholds;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        if (!o.eligible) continue;
        full += o.full_success;
        bisected += o.bisected_success;
        rebuilt += o.rebuild_agrees;
        kept += o.descendants_kept;
        attached += o.trace_attached;
        if (o.full_success) {
            thresholds.push_back(o.theta_high);
            // The bisection bracket is the threshold's interval.
            report.rows.push_back(ReportRow{"theta_threshold", o.level, static_cast<double>(i),
                                            o.theta_high, o.theta_high - o.theta_low,
                                            Interval{o.theta_low, o.theta_high}, 1});
        }
    }
    auto rate = [&](const std::string& name, std::size_t k, std::size_t n) {
        const ReportRow row = proportion_row(name, 0, 0, k, n, cfg.confidence);
        report.scalars.push_back(ReportScalar{name, row.estimate, row.stderr_, row.ci});
    };
    report.scalars.push_back(exact_scalar("eligible_replications", static_cast<double>(eligible)));
    rate("eligibility_frequency", eligible, used);
    rate("reparent_success_full", full, eligible);
    rate("reparent_success_bisected", bisected, eligible);
    rate("rebuild_agreement", rebuilt, eligible);
    rate("descendants_kept", kept, eligible);
    rate("trace_attached", attached, eligible);
    if (!thresholds.empty()) {
        const Summary s = summarize(thresholds);
        report.scalars.push_back(
            ReportScalar{"theta_threshold_mean", s.mean, s.stderr_, normal_interval(s, cfg.confidence)});
    }
    if (eligible < cfg.target_eligible) {
        report.notes.push_back("found " + std::to_string(eligible) + " eligible replications of " +
                               std::to_string(cfg.target_eligible) + " requested");
    }
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_block_bound(const ExperimentConfig& cfg, const RunOptions& options) {
    const Stopwatch clock;
    ExperimentReport report = start_report(cfg, ExperimentKind::BlockBound);
    const std::size_t D = cfg.deltas.size();
    // Per delta: bad blocks, blocks, largest bad component, max degree.
    using Rep = std::vector<std::array<double, 4>>;
    const auto reps = run_replications<Rep>(cfg.reps, options, [&](std::size_t i) {
        RandomStream rng(cfg.seed, i);
        const RadialTree tree = build(replicate_cloud(cfg, rng));
        Rep rep;
        for (double delta : cfg.deltas) {
            const BlockGraph g = build_block_graph(tree, delta, cfg.block_level_min, cfg.block_level_max);
            rep.push_back({static_cast<double>(g.bad_count()), static_cast<double>(g.blocks.size()),
                           static_cast<double>(g.largest_component()),
                           static_cast<double>(g.max_degree())});
        }
        return rep;
    });
    // The constant comes from its own stream, shared by every replication.
    RandomStream volume_rng(cfg.seed, std::uint64_t{1} << 40);
    const double c1 = estimate_block_constant(cfg.block_level_min, cfg.block_level_max, cfg.dim,
                                              cfg.volume_samples, volume_rng);
    double exact = 0.0;
    for (int r = cfg.block_level_min; r <= cfg.block_level_max; ++r) {
        exact = std::max(exact, block_volume(r, cfg.dim));
    }
    report.scalars.push_back(exact_scalar("block_constant", c1));
    report.scalars.push_back(exact_scalar("block_constant_exact", 1.1 * exact));

    std::vector<std::vector<double>> largest(D);
    for (std::size_t k = 0; k < D; ++k) {
        const double delta = cfg.deltas[k];
        std::array<std::vector<double>, 4> cols;
        for (const auto& rep : reps) {
            for (std::size_t q = 0; q < 4; ++q) {
                cols[q].push_back(rep[k][q]);
            }
        }
        largest[k] = cols[2];
        report.rows.push_back(ratio_row("bad_fraction", 0, delta, cols[0], cols[1], cfg.confidence));
        const double bound = bad_probability_bound(delta, cfg.lambda, cfg.dim, c1);
        report.rows.push_back(ReportRow{"bad_bound", 0, delta, bound, 0.0, Interval{bound, bound},
                                        reps.size()});
        report.rows.push_back(summary_row("largest_component", 0, delta, cols[2], cfg.confidence));
        report.rows.push_back(summary_row("max_degree", 0, delta, cols[3], cfg.confidence));
        report.rows.push_back(summary_row("blocks", 0, delta, cols[1], cfg.confidence));
    }
    if (D >= 2) {
        const TestResult t = mann_whitney_less(largest.front(), largest.back());
        report.scalars.push_back(exact_scalar("largest_component_mann_whitney_p", t.p_value));
        report.scalars.push_back(exact_scalar("largest_component_mann_whitney_u", t.statistic));
    }
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
    switch (cfg.kind) {
        case ExperimentKind::LevelCount: return run_levelcount(cfg, options);
        case ExperimentKind::MbdMoments: return run_mbd_moments(cfg, options);
        case ExperimentKind::DensityThick: return run_density_thick(cfg, options);
        case ExperimentKind::Straightness: return run_straightness(cfg, options);
        case ExperimentKind::StabProbe: return run_stab_probe(cfg, options);
        case ExperimentKind::EmptyingDemo: return run_emptying_demo(cfg, options);
        case ExperimentKind::BlockBound: return run_block_bound(cfg, options);
    }
    throw std::invalid_argument("unknown experiment kind");
}

ExperimentReport run_horizon_calibration(const ExperimentConfig& cfg, const RunOptions& options) {
    const Stopwatch clock;
    ExperimentConfig base = cfg;
    base.sample_radius = cfg.horizon + 1.0 + cfg.shell;
    ExperimentConfig extended = base;
    extended.horizon = cfg.horizon + 1.0;
    const ExperimentReport a = run_experiment(base, options);
    const ExperimentReport b = run_experiment(extended, options);

    ExperimentReport report;
    report.config = base;
    report.replications = a.replications;
    for (const auto& ra : a.rows) {
        const ReportRow* rb = b.row(ra.metric, ra.level, ra.param);
        if (rb == nullptr) continue;
        const double denom = std::abs(rb->estimate);
        const double diff = std::abs(ra.estimate - rb->estimate);
        const double rel = diff == 0.0 ? 0.0 : diff / denom;
        const double se = denom == 0.0 ? std::numeric_limits<double>::infinity()
                                       : std::hypot(ra.stderr_, rb->stderr_) / denom;
        const double z = normal_quantile(cfg.confidence);
        report.rows.push_back(ReportRow{"relative_change:" + ra.metric, ra.level, ra.param, rel, se,
                                        Interval{std::max(0.0, rel - z * se), rel + z * se},
                                        ra.samples});
    }
    report.notes.push_back("horizons " + format_double(base.horizon) + " and " +
                           format_double(extended.horizon) + " on shared clouds");
    report.wall_clock_seconds = clock.seconds();
    return report;
}

}  // namespace hrst
