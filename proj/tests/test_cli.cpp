#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "siren/score_store.hpp"
#include "support.hpp"

using namespace siren;
using namespace siren::testing;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the built binary with `args` appended; `env` is prefixed verbatim.
RunResult run(const TempDir& dir, const std::string& args, const std::string& env = "") {
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" SIREN_CLI_PATH "' " + args + " >'" + out.string() +
                            "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}

std::string write_scores(const TempDir& dir) {
    std::ostringstream csv;
    write_long_csv(random_grid(80, 2, 2, 3, 42), csv);
    const auto p = dir / "scores.csv";
    write_file(p, csv.str());
    return "'" + p.string() + "'";
}

nlohmann::json load_json(const std::filesystem::path& p) { return nlohmann::json::parse(read_file(p)); }

}  // namespace

TEST_CASE("validate and load errors") {
    TempDir dir("cli-validate");
    const std::string scores = write_scores(dir);

    const auto ok = run(dir, "validate --scores " + scores);
    CHECK(ok.code == 0);
    CHECK(ok.out.find("80 items") != std::string::npos);

    const std::string missing = (dir / "no-such-file.csv").string();
    const auto gone = run(dir, "validate --scores '" + missing + "'");
    CHECK(gone.code == 2);
    CHECK(gone.err.find(missing) != std::string::npos);

    write_file(dir / "bad.csv", "item_id,system,budget,score\nq0,A,b1,1\n");
    CHECK(run(dir, "validate --scores '" + (dir / "bad.csv").string() + "'").code == 2);

    CHECK(run(dir, "report").code == 2);   // --scores is required
    CHECK(run(dir, "report --scores " + scores + " --no-such-flag").code == 2);
    CHECK(run(dir, "report --scores " + scores + " --rho 1.5").code == 2);
    CHECK(run(dir, "--help").code == 0);
    CHECK(run(dir, "--version").out.find("0.1.0") != std::string::npos);
}

TEST_CASE("report output") {
    TempDir dir("cli-report");
    const std::string scores = write_scores(dir);
    const auto a = dir / "a.json", b = dir / "b.json", c = dir / "c.json";
    const std::string common = "report --scores " + scores + " --R 4 --n-boot 300 --seed 9";

    REQUIRE(run(dir, common + " --out '" + a.string() + "'").code == 0);
    REQUIRE(run(dir, "--threads 3 " + common + " --out '" + b.string() + "'").code == 0);
    CHECK(read_file(a) == read_file(b));

    const auto doc = load_json(a);
    CHECK(doc["config"]["R"] == 4);
    CHECK(doc["config"]["seed"] == 9);
    CHECK(doc["bootstrap"]["cells"].size() == 4);
    CHECK(doc["baselines"].size() == 4);

    SUBCASE("the seed comes from SIREN_SEED unless given") {
        const std::string no_seed = "report --scores " + scores + " --R 4 --n-boot 300";
        REQUIRE(run(dir, no_seed + " --out '" + c.string() + "'", "SIREN_SEED=9").code == 0);
        CHECK(read_file(c) == read_file(a));
        REQUIRE(run(dir, common + " --out '" + c.string() + "'", "SIREN_SEED=123").code == 0);
        CHECK(read_file(c) == read_file(a));
    }
    SUBCASE("flags override the config file") {
        write_file(dir / "cfg.json", R"({"R": 3, "alpha": 0.1, "n_boot": 200})");
        const std::string cfg = " --config '" + (dir / "cfg.json").string() + "'";
        REQUIRE(run(dir, "report --scores " + scores + cfg + " --R 6 --out '" + c.string() + "'").code == 0);
        const auto j = load_json(c);
        CHECK(j["config"]["R"] == 6);
        CHECK(j["config"]["alpha"] == 0.1);
        CHECK(j["config"]["n_boot"] == 200);
    }
    SUBCASE("hard selection with one split matches the single-split baseline") {
        const std::string hard = "report --scores " + scores + " --n-boot 300 --seed 9 --selector hard --R 1";
        REQUIRE(run(dir, hard + " --out '" + c.string() + "'").code == 0);
        const auto j = load_json(c);
        const auto& cells = j["estimate"]["cells"];
        const auto& m3 = j["baselines"][2];
        REQUIRE(m3["method"] == "M3");
        for (std::size_t i = 0; i < cells.size(); ++i)
            CHECK(cells[i]["theta"].get<double>() == m3["cells"][i]["estimate"].get<double>());
    }
    SUBCASE("csv directory and contrasts") {
        const auto csv = dir / "tables";
        REQUIRE(run(dir, common + " --csv-dir '" + csv.string() + "' --contrast sys0:8:1,sys1:8:-1 --out '" +
                             c.string() + "'")
                    .code == 0);
        CHECK(read_file(csv / "intervals.csv").rfind("system,budget,theta,", 0) == 0);
        CHECK(read_file(csv / "baselines.csv").rfind("method,", 0) == 0);
        CHECK(read_file(csv / "diagnostics.csv").rfind("system,budget,theta,pi_win", 0) == 0);
        CHECK(load_json(c)["bootstrap"]["contrasts"].size() == 1);

        CHECK(run(dir, common + " --contrast ,").code == 2);
        CHECK(run(dir, common + " --contrast nobody:8:1").code == 2);
    }
}

TEST_CASE("contrast subcommand") {
    TempDir dir("cli-contrast");
    const std::string scores = write_scores(dir);
    const std::string common = " --scores " + scores + " --R 4 --n-boot 300 --seed 3";
    const auto rep = dir / "r.json", con = dir / "c.json";
    REQUIRE(run(dir, "report" + common + " --out '" + rep.string() + "'").code == 0);
    REQUIRE(run(dir, "contrast" + common + " sys1:16:1 --out '" + con.string() + "'").code == 0);

    // A single unit term is that cell's pointwise interval.
    const auto r = load_json(rep), c = load_json(con);
    const auto& cell = r["bootstrap"]["cells"][3];
    REQUIRE(cell["system"] == "sys1");
    REQUIRE(cell["budget"] == "16");
    CHECK(c["lo"].get<double>() == doctest::Approx(cell["lo_pt"].get<double>()));
    CHECK(c["hi"].get<double>() == doctest::Approx(cell["hi_pt"].get<double>()));

    CHECK(run(dir, "contrast" + common).code == 2);
    CHECK(run(dir, "contrast" + common + " sys9:16:1").code == 2);
    CHECK(run(dir, "contrast" + common + " sys1:16:abc").code == 2);
}

TEST_CASE("baselines subcommand") {
    TempDir dir("cli-baselines");
    const std::string scores = write_scores(dir);
    const auto out = dir / "b.json";
    REQUIRE(run(dir, "baselines --scores " + scores + " --R 3 --seed 1 --out '" + out.string() + "'").code == 0);
    const auto j = load_json(out);
    REQUIRE(j.is_array());
    CHECK(j.size() == 4);
    CHECK(j[0]["method"] == "M1");
}

TEST_CASE("simulate subcommands") {
    TempDir dir("cli-simulate");
    const auto a1 = dir / "a1.csv", a2 = dir / "a2.csv";
    const std::string study_a = "simulate a --M 100,200 --K 2 --R 3 --n-sim 20 --n-gt 30 --n-boot 100 --seed 4";
    REQUIRE(run(dir, study_a + " --csv '" + a1.string() + "'").code == 0);
    REQUIRE(run(dir, "--threads 2 " + study_a + " --csv '" + a2.string() + "'").code == 0);
    CHECK(read_file(a1) == read_file(a2));
    std::istringstream lines(read_file(a1));
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) ++n;
    CHECK(n == 3);

    const auto b = run(dir, "simulate b --delta 0.3 --selector hard --n-sim 20 --n-gt 20 --n-boot 100");
    CHECK(b.code == 0);
    CHECK(b.out.rfind("delta,selector,", 0) == 0);

    const auto c = dir / "c.json";
    REQUIRE(run(dir, "simulate c --H 3 --n-sim 10 --n-gt 10 --n-boot 100 --out '" + c.string() + "'").code == 0);
    CHECK(load_json(c)["rows"].size() == 1);

    CHECK(run(dir, "simulate a --M 0 --n-sim 5 --n-gt 5").code == 2);
    CHECK(run(dir, "simulate b --selector sideways --n-sim 5").code == 2);
    CHECK(run(dir, "simulate d").code == 2);
}
