#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrst/cli.hpp"

using namespace hrst;
namespace fs = std::filesystem;

namespace {
struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "hrst");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / ("hrst_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}
}  // namespace

TEST_CASE("simulate writes reproducible clouds and trees") {
    const fs::path dir = scratch();
    const std::string a = (dir / "a.json").string(), b = (dir / "b.json").string();
    const std::string t = (dir / "t.json").string();
    REQUIRE(cli({"simulate", "--dim", "1", "--lambda", "1", "--radius", "6", "--seed", "3", "--out", a,
                 "--build", t}).code == kExitOk);
    REQUIRE(cli({"simulate", "--dim", "1", "--lambda", "1", "--radius", "6", "--seed", "3", "--out", b})
                .code == kExitOk);
    CHECK(slurp(a) == slurp(b));
    const auto cloud = nlohmann::json::parse(slurp(a));
    const double n = static_cast<double>(cloud["points"].size());
    const double mean = std::cosh(6.0) - 1.0;
    // Poisson 99% interval, normal approximation.
    CHECK(std::abs(n - mean) < 2.576 * std::sqrt(mean));
    const auto tree = nlohmann::json::parse(slurp(t));
    CHECK(tree["parent"].size() == cloud["points"].size());

    const std::string rebuilt = (dir / "t2.json").string();
    REQUIRE(cli({"build", "--cloud", a, "--out", rebuilt}).code == kExitOk);
    CHECK(slurp(rebuilt) == slurp(t));
}

TEST_CASE("zero intensity gives a valid empty cloud") {
    const fs::path dir = scratch();
    const std::string a = (dir / "empty.json").string();
    REQUIRE(cli({"simulate", "--lambda", "0", "--radius", "5", "--out", a}).code == kExitOk);
    CHECK(nlohmann::json::parse(slurp(a))["points"].empty());
}

TEST_CASE("exit codes") {
    const fs::path dir = scratch();
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"simulate", "--radius", "x", "--out", "y"}).code == kExitUsage);
    CHECK(cli({"experiment", "nosuchkind"}).code == kExitUsage);
    CHECK(cli({"simulate", "--radius", "30", "--out", (dir / "big.json").string()}).code ==
          kExitResourceCap);
    CHECK(cli({"experiment", "levelcount", "--horizon", "14", "--levels", "2"}).code == kExitResourceCap);
    CHECK(cli({"experiment", "levelcount", "--levels", "9"}).code == kExitUsage);
    CHECK(cli({"render", "--tree", (dir / "missing.json").string(), "--out", "x.svg"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);

    // A tampered tree fails verification.
    const std::string t = (dir / "tree.json").string();
    REQUIRE(cli({"simulate", "--radius", "3", "--out", (dir / "c.json").string(), "--build", t}).code == kExitOk);
    auto j = nlohmann::json::parse(slurp(t));
    REQUIRE_FALSE(j["ancestorDistance"].empty());
    j["ancestorDistance"][0] = 0.5;
    std::ofstream(t) << j.dump();
    CHECK(cli({"render", "--tree", t, "--out", (dir / "x.svg").string()}).code == kExitVerification);
}

TEST_CASE("render from files is deterministic") {
    const fs::path dir = scratch();
    const std::string c = (dir / "c.json").string(), t = (dir / "t.json").string();
    REQUIRE(cli({"simulate", "--lambda", "5", "--radius", "3", "--out", c, "--build", t}).code == kExitOk);
    const std::string s1 = (dir / "1.svg").string(), s2 = (dir / "2.svg").string();
    REQUIRE(cli({"render", "--tree", t, "--out", s1, "--edges", "arc"}).code == kExitOk);
    REQUIRE(cli({"render", "--cloud", c, "--out", s2, "--edges", "arc"}).code == kExitOk);
    CHECK(slurp(s1) == slurp(s2));
    REQUIRE(cli({"simulate", "--dim", "2", "--radius", "2", "--out", c, "--build", t}).code == kExitOk);
    CHECK(cli({"render", "--tree", t, "--out", s1}).code == kExitUsage);
}

TEST_CASE("experiment and sweep reports") {
    const fs::path dir = scratch();
    const std::string json = (dir / "r.json").string(), csv = (dir / "r.csv").string();
    REQUIRE(cli({"experiment", "levelcount", "--reps", "1", "--out", json, "--csv", csv}).code == kExitOk);
    const auto report = nlohmann::json::parse(slurp(json));
    CHECK(report["config"]["reps"] == 1);
    CHECK(report["replications"] == 1);
    bool has_slope = false;
    for (const auto& s : report["scalars"]) has_slope = has_slope || s["name"] == "level_count_log_slope";
    CHECK(has_slope);

    const std::string again = (dir / "r2.json").string();
    REQUIRE(cli({"experiment", "levelcount", "--reps", "1", "--out", again, "--jobs", "2"}).code == kExitOk);
    CHECK(slurp(again) == slurp(json));

    const Run one = cli({"sweep", "levelcount", "--reps", "2", "--lambdas", "1"});
    const Run two = cli({"sweep", "levelcount", "--reps", "2", "--lambdas", "1", "2"});
    REQUIRE(one.code == kExitOk);
    REQUIRE(two.code == kExitOk);
    auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
    CHECK(lines(two.out) - 1 == 2 * (lines(one.out) - 1));
    CHECK(two.out.find("\n2,10,") != std::string::npos);

    const Run levels = cli({"sweep", "mbd", "--reps", "2", "--sweep-levels", "2", "3"});
    REQUIRE(levels.code == kExitOk);
    CHECK(levels.out.find(",2,mbd_moment,2,") != std::string::npos);

    // The same run through a config file.
    std::ofstream(dir / "cfg.json") << R"({"reps": 1, "levels": [2, 3]})";
    const Run from_file = cli({"experiment", "levelcount", "--config", (dir / "cfg.json").string()});
    REQUIRE(from_file.code == kExitOk);
    CHECK(nlohmann::json::parse(from_file.out)["config"]["levels"].size() == 2);
}
