#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ctxval/cli.hpp"
#include "test_support.hpp"

using ctxval::run_cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

struct Fixture {
    fs::path root = testutil::scratch_dir("cli");
    std::string gt = (root / "gt").string();
    std::string a = (root / "a").string();
    std::string b = (root / "b").string();

    Fixture() {
        REQUIRE(run_cli({"gen", "--out", gt, "--images", "5", "--width", "320", "--height", "240", "--objects-min", "3",
                         "--objects-max", "6", "--box-min", "10", "--box-max", "30", "--seed", "3"}) == 0);
        REQUIRE(run_cli({"corrupt", "--set-a", gt, "--out", a, "--seed", "1"}) == 0);
        REQUIRE(run_cli({"corrupt", "--set-a", gt, "--out", b, "--seed", "2", "--jitter", "2", "--miss", "0.2"}) == 0);
    }
};

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli(std::vector<std::string>{}) == 2);
    CHECK(run_cli({"frobnicate"}) == 2);
    CHECK(run_cli({"compare", "--set-a", "x"}) == 2);
    CHECK(run_cli({"compare", "--set-a", "x", "--set-b", "y", "--theta", "2"}) == 2);
    CHECK(run_cli({"compare", "--set-a", "x", "--set-b", "y", "--patch", "12"}) == 2);
    CHECK(run_cli({"compare", "--set-a", "x", "--set-b", "y", "--plot-csv", "theta_sweep:out.csv"}) == 2);
}

TEST_CASE("data errors exit with 1") {
    const auto empty = testutil::scratch_dir("cli_missing");
    CHECK(run_cli({"compare", "--set-a", (empty / "nope").string(), "--set-b", (empty / "nope").string()}) == 1);
    CHECK(run_cli({"summary", "--set-a", (empty / "nope").string()}) == 1);
}

TEST_CASE("validate reports a bad dataset with exit code 1") {
    Fixture f;
    CHECK(run_cli({"validate", "--set-a", f.a}) == 0);
    // A prediction with confidence above 1 loads (with checking off) but fails validation.
    const auto first_label = *fs::directory_iterator(fs::path(f.a) / "predictions");
    std::ofstream(first_label.path(), std::ios::app) << "0 0.5 0.5 0.1 0.1 1.5\n";
    CHECK(run_cli({"validate", "--set-a", f.a}) == 1);
}

TEST_CASE("every report command is reproducible byte for byte") {
    Fixture f;
    const fs::path out = f.root / "out";
    fs::create_directories(out);
    struct Case {
        std::vector<std::string> args;
        std::string plot;
    };
    const std::vector<Case> cases{
        {{"compare", "--set-a", f.a, "--set-b", f.b, "--direction", "both", "--patch", "60x60"}, "diff_vs_overlap"},
        {{"sweep-theta", "--set-a", f.a, "--set-b", f.b, "--patch", "60x60"}, "theta_sweep"},
        {{"sweep-patch", "--set-a", f.a, "--set-b", f.b, "--patches", "40x40,60x60"}, "patch_sweep"},
        {{"pointwise", "--set-a", f.a, "--set-b", f.b}, "pointwise_vs_distribution"},
    };
    for (const auto& c : cases) {
        std::string json_text[2];
        std::string csv_text[2];
        for (int run = 0; run < 2; ++run) {
            ::setenv("CONTEXTVAL_THREADS", run == 0 ? "1" : "3", 1);
            const std::string tag = c.args[0] + std::to_string(run);
            auto args = c.args;
            args.insert(args.end(), {"--no-timestamp", "--out", (out / (tag + ".json")).string(), "--plot-csv",
                                     c.plot + ":" + (out / (tag + ".csv")).string()});
            REQUIRE(run_cli(args) == 0);
            json_text[run] = slurp(out / (tag + ".json"));
            csv_text[run] = slurp(out / (tag + ".csv"));
        }
        ::unsetenv("CONTEXTVAL_THREADS");
        CHECK(!json_text[0].empty());
        CHECK(json_text[0] == json_text[1]);
        CHECK(csv_text[0] == csv_text[1]);
    }
}

TEST_CASE("an invalid worker count is a usage error") {
    Fixture f;
    ::setenv("CONTEXTVAL_THREADS", "zero", 1);
    CHECK(run_cli({"compare", "--set-a", f.a, "--set-b", f.b}) == 2);
    ::unsetenv("CONTEXTVAL_THREADS");
}

TEST_CASE("summary and perturb") {
    Fixture f;
    const std::string twin = (f.root / "twin").string();
    CHECK(run_cli({"perturb", "--set-a", f.gt, "--out", twin, "--seed", "9"}) == 0);
    CHECK(run_cli({"summary", "--set-a", twin, "--out", (f.root / "s.json").string()}) == 0);
    CHECK(slurp(f.root / "s.json").find("\"image_count\":5") != std::string::npos);
}
