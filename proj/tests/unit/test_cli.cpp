#include "doctest.h"

#include "json.hpp"
#include "stormfx/csv.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
    std::string err;
};

const fs::path& work_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "stormfx_test_cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run run(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt", err = work_dir() / "stderr.txt";
    const std::string cmd = std::string(STORMFX_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = stormfx::read_text(out);
    r.err = stormfx::read_text(err);
    return r;
}

std::string path(const std::string& leaf) { return (work_dir() / leaf).string(); }

} // namespace

TEST_CASE("simulate, build panels, select k and fit") {
    const Run sim = run("simulate --seed 5 --storms 2 --units 20 --factors 1 --treated 5 --out-dir " + path("study"));
    REQUIRE_MESSAGE(sim.status == 0, sim.err);
    CHECK(nlohmann::json::parse(sim.out).at("storms") == 2);
    for (const char* f : {"counties.csv", "counts.csv", "exposures.csv", "predictors.csv", "adjacency.csv", "run.cfg",
                          "manifest.json"}) {
        CHECK_MESSAGE(fs::exists(work_dir() / "study" / f), f);
    }

    const std::string s = path("study") + "/";
    const Run bp = run("build-panels --counties " + s + "counties.csv --counts " + s + "counts.csv --exposures " + s +
                       "exposures.csv --out-dir " + path("panels"));
    REQUIRE_MESSAGE(bp.status == 0, bp.err);
    CHECK(nlohmann::json::parse(bp.out).at("panels") == 2);

    const Run sk = run("select-k --panels " + path("panels") + " --out-dir " + path("scree"));
    REQUIRE_MESSAGE(sk.status == 0, sk.err);
    const int k = nlohmann::json::parse(sk.out).at("k");
    CHECK(k >= 1);
    CHECK(k <= 3);

    const std::string fit = "fit-causal --seed 9 --factors 1 --draws 40 --threads 1 --panels " + path("panels");
    const Run a = run(fit + " --out-dir " + path("fit_a"));
    REQUIRE_MESSAGE(a.status == 0, a.err);
    const Run b = run(fit + " --out-dir " + path("fit_b"));
    REQUIRE(b.status == 0);
    for (const auto& e : fs::directory_iterator(work_dir() / "fit_a")) {
        if (e.path().filename() == "manifest.json") continue;
        CHECK_MESSAGE(stormfx::read_text(e.path()) ==
                          stormfx::read_text(work_dir() / "fit_b" / e.path().filename()),
                      e.path().filename().string());
    }

    const Run es = run("estimands --panels " + path("panels") + " --posterior " + path("fit_a") + " --out-dir " +
                       path("effects"));
    REQUIRE_MESSAGE(es.status == 0, es.err);
    CHECK(fs::exists(work_dir() / "effects" / "effect_draws.csv"));
}

TEST_CASE("run-full from a config file") {
    const Run sim = run("simulate --seed 6 --storms 3 --units 30 --factors 1 --treated 10 --out-dir " + path("full"));
    REQUIRE_MESSAGE(sim.status == 0, sim.err);
    stormfx::write_text(work_dir() / "full" / "small.cfg",
                        "counties = counties.csv\ncounts = counts.csv\nexposures = exposures.csv\n"
                        "predictors = predictors.csv\nout_dir = run\nseed = 3\nfactors = 1\ndraws = 60\n"
                        "variant = linear\ncross_validation = no\nthreads = 1\n");
    const Run r = run("run-full --config " + path("full/small.cfg"));
    REQUIRE_MESSAGE(r.status == 0, r.err);
    const fs::path out = work_dir() / "full" / "run";
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "effects" / "manifest.json"));
    CHECK(fs::exists(out / "predictive" / "fit_archive.json"));
    const auto report = nlohmann::json::parse(stormfx::read_text(out / "report.json"));
    CHECK(report.contains("tee"));
    CHECK(report.contains("aer"));

    const Run pr = run("predict --seed 4 --fit " + (out / "predictive" / "fit_archive.json").string() +
                       " --scenario " + path("full/predictors.csv") + " --out-dir " + path("pred"));
    REQUIRE_MESSAGE(pr.status == 0, pr.err);
    CHECK(stormfx::CsvTable::read(work_dir() / "pred" / "predictions.csv").rows() > 0);
}

TEST_CASE("errors are reported as JSON with a nonzero exit") {
    stormfx::write_text(work_dir() / "bad.cfg", "panels = .\nwidth = 3\n");
    const Run bad = run("run-full --config " + path("bad.cfg"));
    CHECK(bad.status == 1);
    const auto j = nlohmann::json::parse(bad.err);
    CHECK(j.at("error").at("kind") == "invalid_input");
    CHECK(j.at("error").at("command") == "run-full");

    const Run usage = run("fit-causal --draws");
    CHECK(usage.status == 2);
    CHECK(nlohmann::json::parse(usage.err).at("error").at("kind") == "usage");
}
