#include "ctxval/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "ctxval/dataset.hpp"
#include "ctxval/pipeline.hpp"
#include "ctxval/report.hpp"
#include "ctxval/synthgen.hpp"

namespace ctxval {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

PatchSpec parse_patch(const std::string& s) {
    const auto x = s.find_first_of("xX");
    if (x == std::string::npos) throw UsageError("patch must look like HxW, got '" + s + "'");
    try {
        std::size_t used_h = 0;
        std::size_t used_w = 0;
        const std::string hs = s.substr(0, x);
        const std::string ws = s.substr(x + 1);
        PatchSpec p{std::stoi(hs, &used_h), std::stoi(ws, &used_w)};
        if (used_h != hs.size() || used_w != ws.size() || !p.is_valid()) throw std::invalid_argument(s);
        return p;
    } catch (const std::exception&) {
        throw UsageError("invalid patch size '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);)
        if (!item.empty()) out.push_back(item);
    return out;
}

struct CommonOptions {
    std::string set_a;
    std::string set_b;
    double theta = 0.8;
    std::string patch = "120x120";
    double confidence_floor = 0.0;
    std::size_t min_batch = 1;
    std::string classes;
    std::string reduction = "mean";
    std::string out;
    std::vector<std::string> plot_csv;
    bool no_timestamp = false;
    std::string direction = "a2b";
    double pair_radius = 20.0;
};

void add_compare_options(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--set-a", o.set_a, "Dataset A (yolo_dir)")->required();
    cmd->add_option("--set-b", o.set_b, "Dataset B (yolo_dir)")->required();
    cmd->add_option("--theta", o.theta, "Similarity threshold")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--patch", o.patch, "Patch size HxW");
    cmd->add_option("--confidence-floor", o.confidence_floor, "Ignore predictions below this confidence");
    cmd->add_option("--min-batch", o.min_batch, "Minimum |A^c| and |B^c|")->check(CLI::PositiveNumber);
    cmd->add_option("--classes", o.classes, "Comma-separated class ids");
    cmd->add_option("--reduction", o.reduction, "Reduction over batches")
        ->check(CLI::IsMember({"mean", "median", "max"}));
    cmd->add_option("--out", o.out, "Report path (stdout when omitted)");
    cmd->add_option("--plot-csv", o.plot_csv, "Plot data as <kind>:<path>");
    cmd->add_flag("--no-timestamp", o.no_timestamp, "Omit the provenance timestamp");
}

CompareConfig to_config(const CommonOptions& o) {
    CompareConfig cfg;
    cfg.theta = o.theta;
    cfg.patch = parse_patch(o.patch);
    cfg.confidence_floor = o.confidence_floor;
    cfg.min_batch_size = o.min_batch;
    cfg.reduction = parse_reduction(o.reduction);
    cfg.pair_radius = o.pair_radius;
    if (!o.classes.empty()) {
        std::vector<int> ids;
        for (const auto& t : split(o.classes, ',')) {
            try {
                ids.push_back(std::stoi(t));
            } catch (const std::exception&) {
                throw UsageError("invalid class id '" + t + "'");
            }
        }
        cfg.classes = ids;
    }
    if (const char* env = std::getenv("CONTEXTVAL_THREADS"); env && *env) {
        try {
            cfg.threads = std::stoi(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("CONTEXTVAL_THREADS must be a positive integer, got '") + env + "'");
        }
        if (cfg.threads < 1) throw UsageError("CONTEXTVAL_THREADS must be a positive integer");
    }
    return cfg;
}

struct PlotRequest {
    PlotKind kind;
    std::string path;
};

std::vector<PlotRequest> parse_plot_requests(const std::vector<std::string>& specs, PlotKind allowed) {
    std::vector<PlotRequest> out;
    for (const auto& s : specs) {
        const auto colon = s.find(':');
        if (colon == std::string::npos || colon + 1 == s.size())
            throw UsageError("--plot-csv expects <kind>:<path>, got '" + s + "'");
        PlotKind k{};
        try {
            k = parse_plot_kind(s.substr(0, colon));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (k != allowed)
            throw UsageError(std::string("plot kind ") + to_string(k) + " is not produced by this command (expected " +
                             to_string(allowed) + ")");
        out.push_back({k, s.substr(colon + 1)});
    }
    return out;
}

Provenance provenance(const CommonOptions& o, bool with_b) {
    Provenance p;
    if (!o.no_timestamp) p.generated_at = utc_timestamp();
    p.inputs["a"] = {o.set_a, content_hash(o.set_a)};
    if (with_b) p.inputs["b"] = {o.set_b, content_hash(o.set_b)};
    return p;
}

json datasets_json(const Dataset& a, const Dataset& b) {
    return {{"a", {{"name", a.name}, {"summary", summary_to_json(dataset_summary(a))}}},
            {"b", {{"name", b.name}, {"summary", summary_to_json(dataset_summary(b))}}}};
}

void emit(const ReportDocument& doc, const std::string& out) {
    if (out.empty() || out == "-") std::cout << canonical_json(doc) << std::flush;
    else write_report(doc, out);
}

int cmd_compare(const CommonOptions& o) {
    if (o.direction != "a2b" && o.direction != "b2a" && o.direction != "both")
        throw UsageError("--direction must be a2b, b2a or both");
    const CompareConfig cfg = to_config(o);
    const auto plots = parse_plot_requests(o.plot_csv, PlotKind::diff_vs_overlap);
    const Dataset a = load_dataset(o.set_a);
    const Dataset b = load_dataset(o.set_b);

    json results = json::object();
    std::vector<DirectedReport> directed;
    if (o.direction != "b2a") {
        auto r = compare(a, b, cfg);
        results["a2b"] = compare_to_json(r, a, b);
        directed.push_back({"a2b", std::move(r)});
    }
    if (o.direction != "a2b") {
        auto r = compare(b, a, cfg);
        results["b2a"] = compare_to_json(r, b, a);
        directed.push_back({"b2a", std::move(r)});
    }
    emit(make_document("compare", config_to_json(cfg), datasets_json(a, b), results, provenance(o, true)), o.out);
    for (const auto& p : plots) emit_plot_csv(directed, p.kind, p.path);
    return kExitOk;
}

int cmd_sweep(const CommonOptions& o, SweepKind kind, const std::string& values) {
    const CompareConfig cfg = to_config(o);
    const auto plots =
        parse_plot_requests(o.plot_csv, kind == SweepKind::theta ? PlotKind::theta_sweep : PlotKind::patch_sweep);
    SweepTable t;
    const Dataset a = load_dataset(o.set_a);
    const Dataset b = load_dataset(o.set_b);
    if (kind == SweepKind::theta) {
        std::vector<double> thetas;
        for (const auto& s : split(values, ',')) {
            try {
                thetas.push_back(std::stod(s));
            } catch (const std::exception&) {
                throw UsageError("invalid threshold '" + s + "'");
            }
            if (!(thetas.back() >= 0.0 && thetas.back() <= 1.0)) throw UsageError("thresholds must be in [0,1]");
        }
        if (!std::is_sorted(thetas.begin(), thetas.end())) throw UsageError("thresholds must be ascending");
        t = sweep_theta(a, b, cfg, thetas);
    } else {
        std::vector<PatchSpec> specs;
        for (const auto& s : split(values, ',')) specs.push_back(parse_patch(s));
        t = sweep_patch(a, b, cfg, specs);
    }
    const std::string name = kind == SweepKind::theta ? "sweep-theta" : "sweep-patch";
    emit(make_document(name, config_to_json(cfg), datasets_json(a, b), sweep_to_json(t), provenance(o, true)), o.out);
    for (const auto& p : plots) emit_plot_csv(t, p.kind, p.path);
    return kExitOk;
}

int cmd_pointwise(const CommonOptions& o) {
    const CompareConfig cfg = to_config(o);
    const auto plots = parse_plot_requests(o.plot_csv, PlotKind::pointwise_vs_distribution);
    const Dataset a = load_dataset(o.set_a);
    const Dataset b = load_dataset(o.set_b);
    const PointwiseReport r = pointwise_compare(a, b, cfg);
    emit(make_document("pointwise", config_to_json(cfg), datasets_json(a, b), pointwise_to_json(r),
                       provenance(o, true)),
         o.out);
    for (const auto& p : plots) emit_plot_csv(r, p.kind, p.path);
    return kExitOk;
}

struct GenOptions {
    std::string out;
    std::uint64_t seed = 42;
    ScenarioConfig sc;
    std::string placement = "uniform";
};

int cmd_gen(GenOptions g) {
    g.sc.placement = g.placement == "clustered" ? Placement::clustered : Placement::uniform;
    GeneratedDataset gd = generate_dataset(g.sc, g.seed);
    if (gd.skipped_objects > 0)
        std::cerr << "warning: " << gd.skipped_objects << " object(s) could not be placed and were skipped\n";
    write_dataset(gd.dataset, g.out);
    return kExitOk;
}

struct CorruptOptions {
    std::string in;
    std::string out;
    std::uint64_t seed = 0;
    CorruptionModel cm;
    std::vector<std::string> class_miss;
};

int cmd_corrupt(CorruptOptions c) {
    for (const auto& s : c.class_miss) {
        const auto colon = s.find(':');
        try {
            if (colon == std::string::npos) throw std::invalid_argument(s);
            c.cm.miss_probability[std::stoi(s.substr(0, colon))] = std::stod(s.substr(colon + 1));
        } catch (const std::exception&) {
            throw UsageError("--miss-class expects <class>:<probability>, got '" + s + "'");
        }
    }
    const Dataset d = load_dataset(c.in);
    write_dataset(synthesize_predictions(d, c.cm, c.seed), c.out);
    return kExitOk;
}

int cmd_summary(const std::string& in, const std::string& out) {
    const Dataset d = load_dataset(in);
    json j = summary_to_json(dataset_summary(d));
    j["name"] = d.name;
    if (out.empty() || out == "-") std::cout << canonical_json(j) << std::flush;
    else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + out);
        f << canonical_json(j);
    }
    return kExitOk;
}

int cmd_validate(const std::string& in) {
    const Dataset d = load_dataset(in, DatasetFormat::yolo_dir, false);
    const auto violations = validate_dataset(d);
    std::cout << canonical_json({{"valid", violations.empty()}, {"violations", violations}}) << std::flush;
    return violations.empty() ? kExitOk : kExitData;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"contextval: context-batched comparison of detector performance between labeled datasets"};
    app.require_subcommand(1);

    CommonOptions compare_opts;
    auto* compare_cmd = app.add_subcommand("compare", "Compare performance distributions over similar contexts");
    add_compare_options(compare_cmd, compare_opts);
    compare_cmd->add_option("--direction", compare_opts.direction, "a2b, b2a or both")
        ->check(CLI::IsMember({"a2b", "b2a", "both"}));

    CommonOptions theta_opts;
    std::string thetas = "0.5,0.6,0.7,0.8,0.9";
    auto* theta_cmd = app.add_subcommand("sweep-theta", "Sweep the similarity threshold");
    add_compare_options(theta_cmd, theta_opts);
    theta_cmd->add_option("--thetas", thetas, "Ascending comma-separated thresholds");

    CommonOptions patch_opts;
    std::string patches = "80x80,100x100,120x120,140x140,160x160,180x180";
    auto* patch_cmd = app.add_subcommand("sweep-patch", "Sweep the patch size");
    add_compare_options(patch_cmd, patch_opts);
    patch_cmd->add_option("--patches", patches, "Comma-separated HxW sizes");

    CommonOptions pw_opts;
    auto* pw_cmd = app.add_subcommand("pointwise", "Paired point-wise vs distribution comparison");
    add_compare_options(pw_cmd, pw_opts);
    pw_cmd->add_option("--pair-radius", pw_opts.pair_radius, "Max center distance for object pairing (px)")
        ->check(CLI::NonNegativeNumber);

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic ground-truth dataset");
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();
    gen_cmd->add_option("--seed", gen.seed, "Random seed");
    gen_cmd->add_option("--images", gen.sc.images, "Image count");
    gen_cmd->add_option("--name", gen.sc.name, "Dataset name");
    gen_cmd->add_option("--width", gen.sc.image_width, "Image width (px)")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--height", gen.sc.image_height, "Image height (px)")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--objects-min", gen.sc.objects_min, "Minimum objects per image")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--objects-max", gen.sc.objects_max, "Maximum objects per image")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--box-min", gen.sc.box_height_min, "Minimum box height (px)")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--box-max", gen.sc.box_height_max, "Maximum box height (px)")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--aspect", gen.sc.aspect, "Box width / height")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--min-sep", gen.sc.min_separation, "Minimum gap between boxes (px)")
        ->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--placement", gen.placement, "uniform or clustered")
        ->check(CLI::IsMember({"uniform", "clustered"}));
    gen_cmd->add_option("--cluster-radius", gen.sc.cluster_radius, "Cluster radius (px)")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--clusters", gen.sc.clusters_per_image, "Clusters per image")->check(CLI::PositiveNumber);

    CorruptOptions cor;
    auto* cor_cmd = app.add_subcommand("corrupt", "Synthesize predictions from ground truth");
    cor_cmd->add_option("--set-a", cor.in, "Input dataset")->required();
    cor_cmd->add_option("--out", cor.out, "Output directory")->required();
    cor_cmd->add_option("--seed", cor.seed, "Random seed");
    cor_cmd->add_option("--miss", cor.cm.default_miss, "Miss probability")->check(CLI::Range(0.0, 1.0));
    cor_cmd->add_option("--miss-class", cor.class_miss, "Per-class miss probability <class>:<p>");
    cor_cmd->add_option("--jitter", cor.cm.center_jitter_px, "Center jitter stddev (px)")->check(CLI::NonNegativeNumber);
    cor_cmd->add_option("--size-jitter", cor.cm.size_jitter, "Multiplicative size jitter stddev")
        ->check(CLI::NonNegativeNumber);
    cor_cmd->add_option("--fp-rate", cor.cm.false_positive_rate, "False positives per image")
        ->check(CLI::NonNegativeNumber);
    cor_cmd->add_option("--conf-min", cor.cm.confidence_min, "Minimum confidence")->check(CLI::Range(0.0, 1.0));
    cor_cmd->add_option("--conf-max", cor.cm.confidence_max, "Maximum confidence")->check(CLI::Range(0.0, 1.0));
    cor_cmd->add_option("--confusion", cor.cm.class_confusion, "Class confusion probability")
        ->check(CLI::Range(0.0, 1.0));

    std::string perturb_in;
    std::string perturb_out;
    std::uint64_t perturb_seed = 0;
    double pos_stddev = 2.0;
    double size_stddev = 0.0;
    auto* perturb_cmd = app.add_subcommand("perturb", "Jitter a layout into a paired twin");
    perturb_cmd->add_option("--set-a", perturb_in, "Input dataset")->required();
    perturb_cmd->add_option("--out", perturb_out, "Output directory")->required();
    perturb_cmd->add_option("--seed", perturb_seed, "Random seed");
    perturb_cmd->add_option("--pos-stddev", pos_stddev, "Center stddev (px)")->check(CLI::NonNegativeNumber);
    perturb_cmd->add_option("--size-stddev", size_stddev, "Multiplicative size stddev")->check(CLI::NonNegativeNumber);

    std::string summary_in;
    std::string summary_out;
    auto* summary_cmd = app.add_subcommand("summary", "Print dataset statistics");
    summary_cmd->add_option("--set-a", summary_in, "Dataset")->required();
    summary_cmd->add_option("--out", summary_out, "Output path (stdout when omitted)");

    std::string validate_in;
    auto* validate_cmd = app.add_subcommand("validate", "List dataset invariant violations");
    validate_cmd->add_option("--set-a", validate_in, "Dataset")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, std::cerr, std::cerr);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*compare_cmd) return cmd_compare(compare_opts);
        if (*theta_cmd) return cmd_sweep(theta_opts, SweepKind::theta, thetas);
        if (*patch_cmd) return cmd_sweep(patch_opts, SweepKind::patch, patches);
        if (*pw_cmd) return cmd_pointwise(pw_opts);
        if (*gen_cmd) return cmd_gen(gen);
        if (*cor_cmd) return cmd_corrupt(cor);
        if (*perturb_cmd) {
            write_dataset(perturb_layout(load_dataset(perturb_in), pos_stddev, size_stddev, perturb_seed), perturb_out);
            return kExitOk;
        }
        if (*summary_cmd) return cmd_summary(summary_in, summary_out);
        if (*validate_cmd) return cmd_validate(validate_in);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"contextval"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ctxval
