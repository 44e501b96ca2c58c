#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ctxval/report.hpp"
#include "ctxval/synthgen.hpp"
#include "test_support.hpp"

using namespace ctxval;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

struct Pair {
    Dataset a;
    Dataset b;
};

Pair scene() {
    ScenarioConfig sc;
    sc.images = 6;
    sc.image_width = 320;
    sc.image_height = 240;
    sc.objects_min = 3;
    sc.objects_max = 6;
    sc.box_height_min = 10;
    sc.box_height_max = 30;
    CorruptionModel cm;
    cm.center_jitter_px = 1.0;
    return {synthesize_predictions(generate_dataset(sc, 1).dataset, cm, 2),
            synthesize_predictions(generate_dataset(sc, 3).dataset, cm, 4)};
}

}  // namespace

TEST_CASE("canonical form sorts keys and strips whitespace") {
    const json j = {{"b", 1}, {"a", {{"y", true}, {"x", nullptr}}}, {"c", json::array({1.5, "s"})}};
    CHECK(canonical_json(j) == "{\"a\":{\"x\":null,\"y\":true},\"b\":1,\"c\":[1.5,\"s\"]}\n");
}

TEST_CASE("reals always carry a decimal point or exponent") {
    CHECK(canonical_json(json(1.0)) == "1.0\n");
    CHECK(canonical_json(json(0.1)) == "0.1\n");
    CHECK(canonical_json(json(-0.0)) == "0.0\n");
    CHECK(canonical_json(json(1e-12)) == "1e-12\n");
    CHECK(canonical_json(json(2.0 / 3.0)) == "0.666666667\n");
    CHECK(canonical_json(json(7)) == "7\n");
    CHECK_THROWS_AS(canonical_json(json(std::nan(""))), std::invalid_argument);
}

TEST_CASE("write_report requires a schema version and reads back") {
    const auto dir = testutil::scratch_dir("report");
    CHECK_THROWS_AS(write_report(json{{"kind", "x"}}, dir / "r.json"), std::invalid_argument);
    const ReportDocument doc = make_document("compare", json::object(), json::object(), json{{"v", 0.25}}, {});
    write_report(doc, dir / "r.json");
    const ReportDocument back = read_report(dir / "r.json");
    CHECK(back["schema_version"] == kReportSchemaVersion);
    CHECK(back["results"]["v"].get<double>() == 0.25);
    CHECK(back["provenance"]["generated_at"].is_null());
    CHECK(canonical_json(back) == slurp(dir / "r.json"));
}

TEST_CASE("compare documents are byte-identical across runs and thread counts") {
    const auto [a, b] = scene();
    CompareConfig cfg;
    cfg.theta = 0.5;
    cfg.patch = {60, 60};
    std::string first;
    for (int t : {1, 3}) {
        cfg.threads = t;
        const auto r = compare(a, b, cfg);
        const auto doc = make_document("compare", config_to_json(cfg), json::object(),
                                       json{{"a2b", compare_to_json(r, a, b)}}, {});
        const std::string text = canonical_json(doc);
        if (first.empty()) first = text;
        CHECK(text == first);
    }
    const json parsed = json::parse(first);
    CHECK_FALSE(parsed["config"].contains("threads"));
    CHECK(parsed["config"]["patch"] == "60x60");
    const json& c0 = parsed["results"]["a2b"]["classes"][0];
    CHECK(c0["n_a"].get<std::size_t>() == c0["overlap_a"].size() + c0["no_overlap_a"].size());
}

TEST_CASE("content hash tracks dataset contents") {
    const auto [a, b] = scene();
    const auto d1 = testutil::scratch_dir("hash1");
    const auto d2 = testutil::scratch_dir("hash2");
    write_dataset(a, d1);
    write_dataset(a, d2);
    CHECK(content_hash(d1) == content_hash(d2));
    CHECK(content_hash(d1).size() == 64);
    std::ofstream(d2 / "labels" / (a.images[0].image_id + ".txt"), std::ios::app) << "0 0.5 0.5 0.1 0.1\n";
    CHECK(content_hash(d1) != content_hash(d2));
}

TEST_CASE("plot CSV layouts") {
    const auto [a, b] = scene();
    CompareConfig cfg;
    cfg.theta = 0.3;
    cfg.patch = {60, 60};
    const std::vector<DirectedReport> dir{{"a2b", compare(a, b, cfg)}};
    const std::string csv = plot_csv(dir, PlotKind::diff_vs_overlap);
    CHECK(csv.rfind("direction,class,overlap_fraction_a,overlap_fraction_b,w1,m_diff,n_batches\r\n", 0) == 0);
    CHECK(csv.find("\r\na2b,0,") != std::string::npos);

    const SweepTable st = sweep_theta(a, b, cfg, {0.3, 0.6});
    const std::string sc = plot_csv(st, PlotKind::theta_sweep);
    CHECK(sc.rfind("theta,class,w1,m_diff,overlap_fraction_a,overlap_fraction_b,mean_batch_size_a,mean_batch_size_b,n_batches\r\n", 0) == 0);
    std::size_t rows = 0;
    for (std::size_t p = sc.find("\r\n"); p != std::string::npos; p = sc.find("\r\n", p + 2)) ++rows;
    CHECK(rows == 1 + 2 * 2);

    const SweepTable sp = sweep_patch(a, b, cfg, {{40, 40}, {80, 60}});
    CHECK(plot_csv(sp, PlotKind::patch_sweep).find("\r\n80,60,") != std::string::npos);

    CHECK_THROWS_AS(plot_csv(st, PlotKind::diff_vs_overlap), PlotKindMismatch);
    CHECK_THROWS_AS(plot_csv(dir, PlotKind::pointwise_vs_distribution), PlotKindMismatch);
    CHECK(parse_plot_kind("theta_sweep") == PlotKind::theta_sweep);
    CHECK_THROWS(parse_plot_kind("histogram"));
}

TEST_CASE("CSV fields with separators are quoted") {
    const auto [a, b] = scene();
    CompareConfig cfg;
    cfg.theta = 0.0;
    cfg.patch = {30, 30};
    const std::vector<DirectedReport> dir{{"a, \"b\"", compare(a, b, cfg)}};
    CHECK(plot_csv(dir, PlotKind::diff_vs_overlap).find("\r\n\"a, \"\"b\"\"\",0,") != std::string::npos);
}
