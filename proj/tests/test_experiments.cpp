#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hrst/errors.hpp"
#include "hrst/experiments.hpp"

using namespace hrst;

namespace {
ExperimentConfig small(ExperimentKind kind) {
    ExperimentConfig c = default_config(kind);
    c.reps = 6;
    c.seed = 99;
    return c;
}
}  // namespace

TEST_CASE("kind names round trip") {
    for (const auto& name : kind_names()) {
        CHECK(to_string(parse_kind(name)) == name);
    }
    CHECK_THROWS_AS(parse_kind("bogus"), std::invalid_argument);
}

TEST_CASE("config JSON round trip and validation") {
    ExperimentConfig c = default_config(ExperimentKind::StabProbe);
    c.h_values = {1.5, 2.5};
    c.seed = 12345678901234ULL;
    const ExperimentConfig back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
    CHECK(to_json(back) == to_json(c));
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"kind", "mbd"}, {"colour", 1}}), std::invalid_argument);

    ExperimentConfig bad = default_config(ExperimentKind::LevelCount);
    bad.levels = {2, 9};  // above horizon - margin
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = default_config(ExperimentKind::MbdMoments);
    bad.p = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = default_config(ExperimentKind::StabProbe);
    bad.h_values = {6.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = default_config(ExperimentKind::LevelCount);
    bad.reps = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = default_config(ExperimentKind::LevelCount);
    bad.horizon = 14;
    bad.levels = {2};
    CHECK_THROWS_AS(bad.validate(), ResourceCapError);
    for (const auto& name : kind_names()) {
        CHECK_NOTHROW(default_config(parse_kind(name)).validate());
    }
}

TEST_CASE("reports are identical across reruns and job counts") {
    for (auto kind : {ExperimentKind::LevelCount, ExperimentKind::MbdMoments, ExperimentKind::DensityThick,
                      ExperimentKind::Straightness, ExperimentKind::BlockBound}) {
        ExperimentConfig c = small(kind);
        if (kind == ExperimentKind::BlockBound) c.volume_samples = 5000;
        const std::string a = to_json(run_experiment(c, RunOptions{1})).dump();
        const std::string b = to_json(run_experiment(c, RunOptions{3})).dump();
        CAPTURE(to_string(kind));
        CHECK(a == b);
        CHECK(report_csv(run_experiment(c)) == report_csv(run_experiment(c, RunOptions{2})));
    }
}

TEST_CASE("every row carries an interval") {
    const ExperimentReport r = run_levelcount(small(ExperimentKind::LevelCount));
    CHECK(r.replications == 6);
    CHECK(r.rows.size() == 3 * 5);
    for (const auto& row : r.rows) {
        CHECK(row.ci.low <= row.estimate);
        CHECK(row.estimate <= row.ci.high);
    }
    REQUIRE(r.scalar("level_count_log_slope") != nullptr);
    REQUIRE(r.scalar("cap_second_moment_trend") != nullptr);
    const auto j = to_json(r);
    CHECK(j["schema_version"] == ExperimentReport::kSchemaVersion);
    CHECK(j["replication_seeds"].size() == 6);
    CHECK_FALSE(j.contains("wall_clock_seconds"));
    CHECK(to_json(r, true).contains("wall_clock_seconds"));
    CHECK(report_csv(r).rfind("metric,level,param,estimate,stderr,ciLow,ciHigh,samples\n", 0) == 0);
}

TEST_CASE("empty clouds give zero counts") {
    ExperimentConfig c = small(ExperimentKind::LevelCount);
    c.lambda = 0.0;
    const ExperimentReport r = run_levelcount(c);
    for (const auto* row : r.rows_of("level_count")) CHECK(row->estimate == 0.0);
    CHECK(r.scalar("level_count_log_slope") == nullptr);
    CHECK_FALSE(r.notes.empty());
}

TEST_CASE("a single replication gives an unbounded but valid report") {
    ExperimentConfig c = small(ExperimentKind::LevelCount);
    c.reps = 1;
    const ExperimentReport r = run_levelcount(c);
    const auto* row = r.row("level_count", 2.0);
    REQUIRE(row != nullptr);
    CHECK(std::isinf(row->ci.high));
    CHECK(to_json(r)["rows"][0]["ci"][1].is_null());
}

TEST_CASE("the stability probe agrees with full rebuilds") {
    for (std::uint64_t s = 0; s < 4; ++s) {
        RandomStream rng(81, s);
        const RadialTree tree = build(sample_ball(1, 1.0, 6.0, rng));
        for (double r : {1.5, 2.5}) {
            RandomStream inner(82, s);
            RandomStream replay = inner;
            const StabilityProbe probe(tree, r, 5, inner);
            std::vector<std::vector<HPoint>> samples;
            for (int k = 0; k < 5; ++k) samples.push_back(sample_ball(1, 1.0, r, replay).points);
            std::size_t unstable = 0;
            for (std::size_t w = 0; w < tree.size(); w += 7) {
                if (tree.radius(w) < r) continue;
                const bool fast = probe.stable({w});
                CHECK(fast == stable_by_rebuild(tree, r, {w}, samples));
                unstable += !fast;
            }
            CAPTURE(unstable);
        }
    }
}

TEST_CASE("a stable watch set stays stable with fewer resamples") {
    RandomStream rng(83, 0);
    const RadialTree tree = build(sample_ball(1, 1.0, 7.0, rng));
    RandomStream a(84, 0), b(84, 0);
    const StabilityProbe many(tree, 2.0, 20, a);
    const StabilityProbe one(tree, 2.0, 1, b);
    for (std::size_t w = 0; w < tree.size(); w += 5) {
        if (tree.radius(w) < 2.0) continue;
        if (many.stable({w})) CHECK(one.stable({w}));
    }
    CHECK(many.stable({}));
    CHECK(many.resample_count() == 20);
}

TEST_CASE("emptying helpers") {
    RandomStream rng(85, 0);
    const RadialTree tree = build(sample_ball(1, 1.0, 7.0, rng));
    const HPoint z2 = HPoint::polar(4.0, 0.3);
    CHECK_FALSE(in_emptying_set(HPoint::polar(2.0, 0.3), 2.0, 2.0, 0.3, 1.0, z2));  // on S(r)
    CHECK_FALSE(in_emptying_set(HPoint::polar(4.1, 0.3), 2.0, 2.0, 0.3, 1.0, z2));  // near z2
    CHECK(in_emptying_set(HPoint::polar(3.0, 0.3), 2.0, 2.0, 0.3, 1.0, z2));
    CHECK_FALSE(in_emptying_set(HPoint::polar(3.0, 1.5), 2.0, 2.0, 0.3, 1.0, z2));  // outside the cone
    CHECK_FALSE(in_emptying_set(HPoint::polar(4.5, 0.3), 2.0, 2.0, 0.3, 1.0, z2));  // beyond r + h + delta'
    // With nothing removed the parent is unchanged.
    for (std::size_t z = 0; z < tree.size(); z += 11) {
        CHECK(parent_after_emptying(tree, z, 2.0, 2.0, 0.3, 0.0, HPoint{4.0, tree.point(z).direction}) ==
              tree.parent(z));
    }
    // A full emptying agrees with a rebuild on the edited cloud.
    for (std::size_t z = 0; z < tree.size(); z += 13) {
        const HPoint center{3.5, tree.point(z).direction};
        auto drop = [&](const HPoint& p) { return in_emptying_set(p, 1.5, 2.0, 0.3, 0.8, center); };
        if (drop(tree.point(z))) continue;
        std::vector<std::size_t> index(tree.size(), kOrigin);
        std::size_t kept = 0;
        for (std::size_t j = 0; j < tree.size(); ++j) if (!drop(tree.point(j))) index[j] = kept++;
        const RadialTree edited = build(remove_points(tree.cloud(), drop));
        const std::size_t expected = parent_after_emptying(tree, z, 1.5, 2.0, 0.3, 0.8, center);
        CHECK(edited.parent(index[z]) == (expected == kOrigin ? kOrigin : index[expected]));
    }
}

TEST_CASE("stab probe report") {
    ExperimentConfig c = small(ExperimentKind::StabProbe);
    c.horizon = 8.0;
    c.h_values = {1.0, 2.0};
    c.probe_levels = {2.0};
    c.directions = 8;
    c.resamples = 4;
    const ExperimentReport r = run_stab_probe(c);
    CHECK(r.rows_of("stability_frequency").size() == 2);
    for (const auto* row : r.rows_of("stability_frequency")) {
        CHECK(row->estimate >= 0.0);
        CHECK(row->estimate <= 1.0);
        CHECK(row->samples == 6 * 8);
    }
    CHECK(to_json(run_stab_probe(c)).dump() == to_json(r).dump());
}

TEST_CASE("emptying demo report") {
    ExperimentConfig c = small(ExperimentKind::EmptyingDemo);
    c.reps = 8;
    c.batch = 3;
    c.target_eligible = 2;
    c.resamples = 4;
    const ExperimentReport r = run_emptying_demo(c);
    const auto* eligible = r.scalar("eligible_replications");
    REQUIRE(eligible != nullptr);
    CHECK(r.replications <= 8);
    if (eligible->estimate >= 2) {
        CHECK(r.notes.empty());
    }
    for (const auto* row : r.rows_of("theta_threshold")) {
        CHECK(row->ci.low <= row->estimate);
        CHECK(row->ci.high - row->ci.low <= c.theta_tolerance);
        CHECK(row->estimate <= std::numbers::pi);
    }
    CHECK(to_json(run_emptying_demo(c, RunOptions{2})).dump() == to_json(r).dump());
}

TEST_CASE("horizon calibration compares shared clouds") {
    ExperimentConfig c = small(ExperimentKind::LevelCount);
    c.horizon = 6.0;
    c.levels = {2.0, 3.0};
    const ExperimentReport r = run_horizon_calibration(c);
    const auto* row = r.row("relative_change:level_count", 2.0);
    REQUIRE(row != nullptr);
    // Levels far below the horizon do not see it: the counts agree exactly.
    CHECK(row->estimate == 0.0);
}

TEST_CASE("preset horizons keep censored levels within 5% of the next horizon") {
    for (ExperimentKind kind : {ExperimentKind::LevelCount, ExperimentKind::MbdMoments,
                                ExperimentKind::Straightness}) {
        ExperimentConfig c = default_config(kind);
        c.reps = 20;
        const ExperimentReport r = run_horizon_calibration(c);
        CAPTURE(to_string(kind));
        REQUIRE(!r.rows.empty());
        for (const ReportRow& row : r.rows) {
            CAPTURE(row.metric);
            CAPTURE(row.level);
            CHECK(row.estimate < 0.05);
        }
    }
}
