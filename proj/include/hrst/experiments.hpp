#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrst/deviations.hpp"
#include "hrst/format.hpp"
#include "hrst/stats.hpp"

namespace hrst {

enum class ExperimentKind {
    LevelCount,
    MbdMoments,
    DensityThick,
    Straightness,
    StabProbe,
    EmptyingDemo,
    BlockBound,
};

std::string to_string(ExperimentKind kind);
/// Accepts levelcount, mbd, thick, straightness, stab, emptying, blocks.
ExperimentKind parse_kind(const std::string& name);
const std::vector<std::string>& kind_names();

/// Every parameter of every experiment kind. Fields a kind does not use are
/// still echoed so a report identifies its inputs completely.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::LevelCount;
    int dim = 1;
    double lambda = 1.0;
    double horizon = 8.0;
    double margin = 2.0;
    /// Clouds are sampled in B(horizon + shell) so that arcs cross S(horizon).
    double shell = 1.0;
    /// When positive, clouds are sampled in B(sample_radius) and restricted
    /// to B(horizon + shell). Used to couple runs at different horizons.
    double sample_radius = 0.0;
    std::vector<double> levels{2.0, 3.0, 4.0, 5.0, 6.0};
    std::size_t reps = 200;
    std::uint64_t seed = 1;
    double confidence = 0.95;

    // levelcount
    std::size_t caps_per_level = 8;
    // mbd
    double p = 2.0;
    // thick
    double cap_scale = 1.0;
    // straightness
    double epsilon = 0.5;
    std::vector<double> bins{2.0, 3.0, 4.0, 5.0, 6.0};
    // stab and emptying
    double delta = 0.95;
    double delta_prime = 0.3;
    std::vector<double> h_values{1.0, 2.0, 3.0};
    std::vector<double> probe_levels{2.0, 3.0};
    std::size_t resamples = 20;
    std::size_t directions = 32;
    // emptying
    double h = 2.0;
    double z1_min_radius = 1.5;
    std::size_t target_eligible = 20;
    std::size_t batch = 64;
    double theta_tolerance = 1e-6;
    // blocks
    std::vector<double> deltas{0.05, 0.1, 0.2, 0.4};
    int block_level_min = 2;
    int block_level_max = 6;
    std::size_t volume_samples = 100000;

    /// Throws std::invalid_argument on an inconsistent configuration,
    /// including levels outside [1, horizon - margin].
    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing fields keep their defaults; unknown fields are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Preset matching the reference settings of a kind (levels, horizon, reps).
ExperimentConfig default_config(ExperimentKind kind);

/// One per-level (or per-parameter) statistic.
struct ReportRow {
    std::string metric;
    double level = 0.0;
    double param = 0.0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    Interval ci;
    std::uint64_t samples = 0;
};

/// A named scalar such as a regression slope.
struct ReportScalar {
    std::string name;
    double estimate = 0.0;
    double stderr_ = 0.0;
    Interval ci;
};

struct ExperimentReport {
    static constexpr int kSchemaVersion = 1;

    ExperimentConfig config;
    std::vector<ReportRow> rows;
    std::vector<ReportScalar> scalars;
    std::vector<std::string> notes;
    /// Replications actually run; replication i used stream (seed, i).
    std::size_t replications = 0;
    /// Not serialized unless asked for, so reports stay byte-identical.
    double wall_clock_seconds = 0.0;

    const ReportRow* row(const std::string& metric, double level, double param = 0.0) const;
    std::vector<const ReportRow*> rows_of(const std::string& metric) const;
    const ReportScalar* scalar(const std::string& name) const;
};

nlohmann::json to_json(const ExperimentReport& report, bool include_timing = false);
/// metric,level,param,estimate,stderr,ciLow,ciHigh,samples
std::string report_csv(const ExperimentReport& report);

struct RunOptions {
    unsigned jobs = 1;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

ExperimentReport run_levelcount(const ExperimentConfig& cfg, const RunOptions& options = {});
ExperimentReport run_mbd_moments(const ExperimentConfig& cfg, const RunOptions& options = {});
ExperimentReport run_density_thick(const ExperimentConfig& cfg, const RunOptions& options = {});
ExperimentReport run_straightness(const ExperimentConfig& cfg, const RunOptions& options = {});
ExperimentReport run_stab_probe(const ExperimentConfig& cfg, const RunOptions& options = {});
ExperimentReport run_emptying_demo(const ExperimentConfig& cfg, const RunOptions& options = {});
ExperimentReport run_block_bound(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Runs `cfg` at horizon R and R + 1 on the same clouds (both sampled in
/// B(R + 1 + shell)) and reports |a - b| / |b| for every shared row as
/// metric "relative_change:<metric>".
ExperimentReport run_horizon_calibration(const ExperimentConfig& cfg, const RunOptions& options = {});

// ---------------------------------------------------------------------------
// Probes used by the stab and emptying experiments

/// Sensitivity of descendant sets to the configuration inside B(r).
///
/// Holds k fresh samples of the process inside B(r). A point y outside B(r)
/// can change its ancestor only if d(y, A(y)) > r_y - r, so only those
/// points are re-examined against each resample; all other parent links are
/// provably unchanged.
class StabilityProbe {
  public:
    StabilityProbe(const RadialTree& tree, double r, std::size_t resamples, RandomStream& rng);

    /// Points of the tree inside B(center, radius).
    std::vector<std::size_t> points_in_ball(const HPoint& center, double radius) const;

    /// True when every listed point (all outside B(r)) keeps its descendant
    /// set under every resample. An empty list is vacuously stable.
    bool stable(const std::vector<std::size_t>& watched) const;

    std::size_t resample_count() const { return changes_.size(); }
    double level() const { return r_; }

  private:
    bool member(std::size_t y, std::size_t w, const std::vector<std::pair<std::size_t, std::size_t>>* changes) const;

    const RadialTree& tree_;
    double r_;
    std::size_t first_outer_;
    /// Per resample: (point, new parent) for points whose parent changed,
    /// sorted by point. A parent inside B(r) is recorded as kOrigin.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> changes_;
};

/// Same answer as StabilityProbe::stable, by rebuilding the whole tree for
/// each resample. Quadratically slower; kept as the reference.
bool stable_by_rebuild(const RadialTree& tree, double r, const std::vector<std::size_t>& watched,
                       const std::vector<std::vector<HPoint>>& inner_samples);

/// U(r, h, delta', theta): points of B(r + h + delta') outside the closed
/// ball of radius r and outside B(z2, delta'), within angle theta of the
/// direction of z2.
bool in_emptying_set(const HPoint& p, double r, double h, double delta_prime, double theta,
                     const HPoint& z2);

/// Ancestor of point z after deleting the points of U(theta), found by
/// exhaustive search; kOrigin for the origin.
std::size_t parent_after_emptying(const RadialTree& tree, std::size_t z, double r, double h,
                                  double delta_prime, double theta, const HPoint& z2);

}  // namespace hrst
