#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "test_support.hpp"

// End-to-end checks of the installed command-line tool. COTLENS_CLI_BIN is
// injected by the build.

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(COTLENS_CLI_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli drives the full pipeline on a synthetic population") {
    testsupport::TempDir dir("cli");
    const std::string out = (dir.path() / "work").string();
    const std::string cfg = " --config " + out + "/config.json --run-id r1";

    REQUIRE(run_cli("synth --mode golden --out " + out + " --seed 5") == 0);
    CHECK(std::filesystem::exists(dir.path() / "work" / "dataset.jsonl"));
    CHECK(std::filesystem::exists(dir.path() / "work" / "tables.json"));
    CHECK(std::filesystem::exists(dir.path() / "work" / "planted.json"));

    CHECK(run_cli("validate" + cfg) == 0);
    CHECK(run_cli("beliefs" + cfg) == 0);
    CHECK(run_cli("cot" + cfg) == 0);
    CHECK(run_cli("judge" + cfg) == 0);
    CHECK(run_cli("metrics" + cfg) == 0);
    CHECK(run_cli("report" + cfg) == 0);
    CHECK(run_cli("analyze-inter" + cfg) == 0);
    CHECK(run_cli("analyze-intra" + cfg) == 0);

    const auto run_dir = dir.path() / "work" / "runs" / "r1";
    CHECK(std::filesystem::exists(run_dir / "manifest.json"));
    CHECK(std::filesystem::exists(run_dir / "records.jsonl"));
    for (const char* name :
         {"shift_e2e.csv", "shift_points.csv", "stage_separation.csv", "inter_corr.csv",
          "intra_corr.csv", "intra_subgroups.csv", "belief_hists.csv", "explicitness_table.csv"}) {
        CHECK_MESSAGE(std::filesystem::exists(run_dir / "reports" / name), name);
    }
}

TEST_CASE("cli validate rejects a malformed dataset with exit code 1") {
    testsupport::TempDir dir("clibad");
    const auto bad = dir.path() / "bad.jsonl";
    std::ofstream(bad) << R"({"id":"q1","question":"?","choices":[{"label":"a","text":"x"}],)"
                       << R"("answer_label":"z"})" << "\n";
    CHECK(run_cli("validate --dataset " + bad.string()) == 1);
}

TEST_CASE("cli requires a subcommand and reports unknown ones") {
    CHECK(run_cli("") != 0);
    CHECK(run_cli("not-a-command") != 0);
}
