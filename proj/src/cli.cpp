#include "hrst/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hrst/errors.hpp"
#include "hrst/experiments.hpp"
#include "hrst/parallel.hpp"
#include "hrst/render.hpp"

namespace hrst {

namespace {

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot read '" + path + "'");
    }
    return nlohmann::json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::invalid_argument("cannot write '" + path + "'");
    }
    out << text;
    if (!out) {
        throw std::invalid_argument("failed writing '" + path + "'");
    }
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

/// Experiment flags shared by `experiment` and `sweep`; unset flags keep the
/// kind's preset (or the --config file).
struct ExperimentFlags {
    std::string kind;
    std::string config_path;
    std::optional<std::size_t> reps;
    std::optional<std::uint64_t> seed;
    std::optional<int> dim;
    std::optional<double> lambda;
    std::optional<double> horizon;
    std::optional<double> margin;
    std::vector<double> levels;
    unsigned jobs = default_jobs();

    void attach(CLI::App& cmd) {
        cmd.add_option("kind", kind, "Experiment kind")
            ->required()
            ->check(CLI::IsMember(kind_names()));
        cmd.add_option("--config", config_path, "JSON config; flags override its fields");
        cmd.add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
        cmd.add_option("--seed", seed, "Master seed");
        cmd.add_option("--dim", dim, "Boundary dimension d")->check(CLI::PositiveNumber);
        cmd.add_option("--lambda", lambda, "Intensity")->check(CLI::NonNegativeNumber);
        cmd.add_option("--horizon", horizon, "Horizon radius")->check(CLI::PositiveNumber);
        cmd.add_option("--margin", margin, "Censor margin")->check(CLI::NonNegativeNumber);
        cmd.add_option("--levels", levels, "Level grid");
        cmd.add_option("--jobs", jobs, "Worker threads (default HRST_JOBS or 1)")
            ->check(CLI::PositiveNumber);
    }

    ExperimentConfig config() const {
        ExperimentConfig cfg = default_config(parse_kind(kind));
        if (!config_path.empty()) {
            nlohmann::json j = read_json(config_path);
            j["kind"] = kind;
            cfg = config_from_json(j);
        }
        if (reps) cfg.reps = *reps;
        if (seed) cfg.seed = *seed;
        if (dim) cfg.dim = *dim;
        if (lambda) cfg.lambda = *lambda;
        if (horizon) cfg.horizon = *horizon;
        if (margin) cfg.margin = *margin;
        if (!levels.empty()) {
            cfg.levels = levels;
            cfg.probe_levels = levels;
        }
        return cfg;
    }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Radial spanning tree of a hyperbolic Poisson process"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Sample a Poisson cloud in B(0, R)");
    int dim = 1;
    double lambda = 1.0, radius = 0.0;
    std::uint64_t seed = 1, stream = 0;
    std::string cloud_out, tree_out;
    simulate->add_option("--dim", dim, "Boundary dimension d")->check(CLI::PositiveNumber);
    simulate->add_option("--lambda", lambda, "Intensity")->check(CLI::NonNegativeNumber);
    simulate->add_option("--radius", radius, "Ball radius R")->required()->check(CLI::NonNegativeNumber);
    simulate->add_option("--seed", seed, "Master seed");
    simulate->add_option("--stream", stream, "Stream index");
    simulate->add_option("--out", cloud_out, "Cloud JSON output")->required();
    simulate->add_option("--build", tree_out, "Also write the tree JSON here");

    // build
    auto* build_cmd = app.add_subcommand("build", "Build the tree of a cloud file");
    std::string cloud_in, build_out;
    build_cmd->add_option("--cloud", cloud_in, "Cloud JSON input")->required();
    build_cmd->add_option("--out", build_out, "Tree JSON output")->required();

    // render
    auto* render = app.add_subcommand("render", "Draw a d = 1 tree in the Poincare disc");
    std::string render_tree, render_cloud, svg_out, edge_style = "geodesic";
    RenderSpec spec;
    bool no_color = false;
    auto* tree_opt = render->add_option("--tree", render_tree, "Tree JSON input");
    render->add_option("--cloud", render_cloud, "Cloud JSON input (built on the fly)")->excludes(tree_opt);
    render->add_option("--out", svg_out, "SVG output")->required();
    render->add_option("--size", spec.size, "Image size in pixels")->check(CLI::Range(64, 1 << 16));
    render->add_option("--edges", edge_style, "arc or geodesic")->check(CLI::IsMember({"arc", "geodesic"}));
    render->add_flag("--no-color", no_color, "Draw every subtree in black");
    render->add_option("--samples", spec.samples, "Polyline points per edge")->check(CLI::Range(2, 100000));
    render->add_option("--stroke", spec.stroke, "Stroke width")->check(CLI::PositiveNumber);

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
    ExperimentFlags exp_flags;
    exp_flags.attach(*experiment);
    std::string report_out, csv_out;
    bool calibrate = false, timing = false;
    experiment->add_option("--out", report_out, "Report JSON output (default stdout)");
    experiment->add_option("--csv", csv_out, "Per-level CSV output");
    experiment->add_flag("--calibrate", calibrate, "Compare horizons R and R + 1 on shared clouds");
    experiment->add_flag("--timing", timing, "Include wall-clock time in the JSON report");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run an experiment over a (lambda, R, level) grid");
    ExperimentFlags sweep_flags;
    sweep_flags.attach(*sweep);
    std::vector<double> sweep_lambdas, sweep_horizons, sweep_levels;
    std::string sweep_out;
    sweep->add_option("--lambdas", sweep_lambdas, "Intensities");
    sweep->add_option("--horizons", sweep_horizons, "Horizon radii");
    sweep->add_option("--sweep-levels", sweep_levels, "Levels, one configuration each");
    sweep->add_option("--out", sweep_out, "Merged CSV output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate) {
            RandomStream rng(seed, stream);
            PointCloud cloud = sample_ball(dim, lambda, radius, rng);
            write_json(cloud_out, to_json(cloud));
            if (!tree_out.empty()) {
                write_json(tree_out, to_json(build(std::move(cloud))));
            }
        } else if (*build_cmd) {
            write_json(build_out, to_json(build(cloud_from_json(read_json(cloud_in)))));
        } else if (*render) {
            if (render_tree.empty() == render_cloud.empty()) {
                throw std::invalid_argument("render needs exactly one of --tree and --cloud");
            }
            const RadialTree tree = render_tree.empty() ? build(cloud_from_json(read_json(render_cloud)))
                                                        : tree_from_json(read_json(render_tree));
            spec.edges = parse_edge_style(edge_style);
            spec.color_subtrees = !no_color;
            write_text(svg_out, render_svg(tree, spec));
        } else if (*experiment) {
            const ExperimentConfig cfg = exp_flags.config();
            const RunOptions options{exp_flags.jobs};
            const ExperimentReport report =
                calibrate ? run_horizon_calibration(cfg, options) : run_experiment(cfg, options);
            const std::string json = to_json(report, timing).dump(2) + "\n";
            if (report_out.empty()) {
                out << json;
            } else {
                write_text(report_out, json);
            }
            if (!csv_out.empty()) {
                write_text(csv_out, report_csv(report));
            }
            err << to_string(cfg.kind) << ": " << report.replications << " replications in "
                << report.wall_clock_seconds << " s\n";
        } else if (*sweep) {
            const ExperimentConfig base = sweep_flags.config();
            const auto lambdas = sweep_lambdas.empty() ? std::vector<double>{base.lambda} : sweep_lambdas;
            const auto horizons = sweep_horizons.empty() ? std::vector<double>{base.horizon} : sweep_horizons;
            std::vector<std::vector<double>> grids;
            if (sweep_levels.empty()) {
                grids.push_back(base.levels);
            } else {
                for (double l : sweep_levels) grids.push_back({l});
            }
            std::ostringstream csv;
            csv << "lambda,horizon,levels,metric,level,param,estimate,stderr,ciLow,ciHigh,samples\n";
            for (double lam : lambdas) {
                for (double hor : horizons) {
                    for (const auto& grid : grids) {
                        ExperimentConfig cfg = base;
                        cfg.lambda = lam;
                        cfg.horizon = hor;
                        if (!sweep_levels.empty()) {
                            cfg.levels = grid;
                            cfg.probe_levels = grid;
                        }
                        const ExperimentReport report = run_experiment(cfg, RunOptions{sweep_flags.jobs});
                        std::string levels_field;
                        for (std::size_t k = 0; k < cfg.levels.size(); ++k) {
                            levels_field += (k ? ";" : "") + format_double(cfg.levels[k]);
                        }
                        std::istringstream rows(report_csv(report));
                        std::string line;
                        std::getline(rows, line);  // header
                        while (std::getline(rows, line)) {
                            csv << format_double(lam) << ',' << format_double(hor) << ','
                                << levels_field << ',' << line << '\n';
                        }
                        for (const auto& s : report.scalars) {
                            csv << format_double(lam) << ',' << format_double(hor) << ',' << levels_field
                                << ",scalar:" << s.name << ",0,0," << format_double(s.estimate) << ','
                                << format_double(s.stderr_) << ',' << format_double(s.ci.low) << ','
                                << format_double(s.ci.high)
                                << ",0\n";
                        }
                    }
                }
            }
            if (sweep_out.empty()) {
                out << csv.str();
            } else {
                write_text(sweep_out, csv.str());
            }
        }
    } catch (const ResourceCapError& e) {
        err << "error: " << e.what() << '\n';
        return kExitResourceCap;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed input: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitVerification;
    }
    return kExitOk;
}

}  // namespace hrst
