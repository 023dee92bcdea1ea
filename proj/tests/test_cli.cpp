#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "kinex/config.hpp"
#include "kinex/error.hpp"
#include "kinex/runner.hpp"

using namespace kinex;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path base = fs::temp_directory_path() / "kinex_cli_tests";
    fs::create_directories(base);
    return base;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

const std::string kMomentsCfg = R"(
experiment = "eps_infinity"
trials = 4000
seed = 321
lambda = 0.5
check = "moments"
max_moment = 2

[measure]
family = "uniform"
)";

ExperimentConfig cfg_with(const std::string& text, const std::string& out,
                          int threads = 1) {
    CliOverrides ov;
    ov.out = out;
    ov.threads = threads;
    return validate_config(parse_config_text(text), ov);
}

#ifdef KINEX_CLI_PATH
int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(KINEX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}
#endif

} // namespace

TEST_SUITE("cli") {

TEST_CASE("experiment catalogue text") {
    const std::string text = list_experiments_text();
    for (const char* name :
         {"canonical", "wealth_stationary", "product_check", "duality_energy",
          "duality_wealth", "diffusion", "nagent", "eps_infinity"}) {
        CHECK(text.find(name) != std::string::npos);
    }
}

TEST_CASE("validation report echoes resolved values") {
    const ExperimentConfig cfg =
        cfg_with(kMomentsCfg, (scratch_dir() / "report").string());
    const std::string report = validate_report(cfg);
    CHECK(report.rfind("ok:", 0) == 0);
    CHECK(report.find("eps_infinity") != std::string::npos);
    CHECK(report.find("seed = 321") != std::string::npos);
    CHECK(report.find("max_moment") != std::string::npos);
}

TEST_CASE("runner round trip produces the documented artifacts") {
    const fs::path out = scratch_dir() / "roundtrip";
    fs::remove_all(out);
    const RunResult rr = run_experiment(cfg_with(kMomentsCfg, out.string()));
    CHECK(rr.pass);
    REQUIRE(fs::exists(rr.summary_path));
    REQUIRE(fs::exists(rr.results_path));
    REQUIRE(fs::exists(rr.histogram_path));

    const json summary = json::parse(slurp(rr.summary_path));
    CHECK(summary["schema"] == "kinex.summary.v1");
    CHECK(summary["experiment"] == "eps_infinity");
    CHECK(summary["seed"] == 321);
    CHECK(summary["trials"] == 4000);
    CHECK(summary["pass"] == true);
    REQUIRE(summary["checks"].is_array());
    CHECK(!summary["checks"].empty());
    for (const json& c : summary["checks"]) {
        CHECK(c.contains("name"));
        CHECK(c.contains("pass"));
    }

    const std::string results = slurp(rr.results_path);
    CHECK(results.rfind("# schema kinex.results.", 0) == 0);
    const std::string hist = slurp(rr.histogram_path);
    CHECK(hist.rfind("# schema kinex.histogram.v1", 0) == 0);
}

TEST_CASE("artifacts are byte-identical across reruns and thread counts") {
    const fs::path a = scratch_dir() / "det_a";
    const fs::path b = scratch_dir() / "det_b";
    const fs::path c = scratch_dir() / "det_c";
    for (const fs::path& p : {a, b, c}) fs::remove_all(p);

    const RunResult ra = run_experiment(cfg_with(kMomentsCfg, a.string(), 1));
    const RunResult rb = run_experiment(cfg_with(kMomentsCfg, b.string(), 1));
    const RunResult rc = run_experiment(cfg_with(kMomentsCfg, c.string(), 4));

    CHECK(slurp(ra.results_path) == slurp(rb.results_path));
    CHECK(slurp(ra.results_path) == slurp(rc.results_path));
    CHECK(slurp(ra.histogram_path) == slurp(rc.histogram_path));

    // Summaries agree except for the echoed thread count.
    json sa = json::parse(slurp(ra.summary_path));
    json sc = json::parse(slurp(rc.summary_path));
    CHECK(sa["threads"] == 1);
    CHECK(sc["threads"] == 4);
    sa.erase("threads");
    sc.erase("threads");
    CHECK(sa == sc);
}

TEST_CASE("unwritable output directory is a config error") {
    const fs::path blocker = scratch_dir() / "blocker";
    spit(blocker, "not a directory\n");
    const fs::path out = blocker / "sub";
    CHECK_THROWS_AS((void)run_experiment(cfg_with(kMomentsCfg, out.string())),
                    const error&);
}

#ifdef KINEX_CLI_PATH

TEST_CASE("binary exit codes and artifacts") {
    const fs::path dir = scratch_dir();
    const fs::path good = dir / "good.toml";
    spit(good, kMomentsCfg);

    CHECK(run_cli("list") == 0);
    CHECK(run_cli("validate " + good.string()) == 0);

    const fs::path out = dir / "bin_run";
    fs::remove_all(out);
    CHECK(run_cli("run " + good.string() + " --out " + out.string() +
                  " --trials 2000") == 0);
    CHECK(fs::exists(out / "summary.json"));
    const json summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary["trials"] == 2000); // the flag overrides the file value

    // A failing statistical check exits with 1: a fixed-total uniform pair is
    // nowhere near a product of exponentials.
    const fs::path failing = dir / "failing.toml";
    spit(failing, R"(
experiment = "canonical"
trials = 20000
check = "product_exponential"
s = 1.0

[measure]
family = "uniform"
)");
    const fs::path fail_out = dir / "bin_fail";
    fs::remove_all(fail_out);
    CHECK(run_cli("run " + failing.string() + " --out " + fail_out.string()) ==
          1);
    const json fail_summary = json::parse(slurp(fail_out / "summary.json"));
    CHECK(fail_summary["pass"] == false);

    // Config mistakes exit with 2, as do command-line mistakes.
    const fs::path bad = dir / "bad.toml";
    spit(bad, "experiment = \"eps_infinity\"\nwhat = 1\n");
    CHECK(run_cli("validate " + bad.string()) == 2);
    CHECK(run_cli("run " + bad.string()) == 2);
    CHECK(run_cli("run " + dir.string() + "/does_not_exist.toml") == 2);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
}

#endif // KINEX_CLI_PATH

} // TEST_SUITE
