#include "ctxval/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace ctxval {

namespace fs = std::filesystem;
using nlohmann::json;

std::string content_hash(const fs::path& root) {
    std::vector<fs::path> files;
    if (fs::exists(root / "manifest.json")) files.emplace_back("manifest.json");
    for (const char* sub : {"labels", "predictions"}) {
        if (!fs::is_directory(root / sub)) continue;
        for (const auto& e : fs::directory_iterator(root / sub))
            if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& x, const fs::path& y) { return x.generic_string() < y.generic_string(); });

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 unavailable");
    for (const auto& rel : files) {
        std::ifstream in(root / rel, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        const std::string body = ss.str();
        const std::string head = rel.generic_string() + '\0' + std::to_string(body.size()) + '\0';
        EVP_DigestUpdate(ctx.get(), head.data(), head.size());
        EVP_DigestUpdate(ctx.get(), body.data(), body.size());
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json labels(const Dataset& d, const std::vector<ObjectId>& ids) {
    json a = json::array();
    for (const auto& id : ids) a.push_back(d.object_label(id));
    return a;
}

std::string patch_string(const PatchSpec& p) { return std::to_string(p.h) + "x" + std::to_string(p.w); }

}  // namespace

json config_to_json(const CompareConfig& cfg) {
    json c;
    c["theta"] = cfg.theta;
    c["patch"] = patch_string(cfg.patch);
    c["patch_h"] = cfg.patch.h;
    c["patch_w"] = cfg.patch.w;
    c["confidence_floor"] = cfg.confidence_floor;
    c["min_batch_size"] = cfg.min_batch_size;
    c["classes"] = cfg.classes ? json(*cfg.classes) : json(nullptr);
    c["reduction"] = to_string(cfg.reduction);
    c["pair_radius"] = cfg.pair_radius;
    return c;
}

json summary_to_json(const DatasetSummary& s) {
    json j;
    j["image_count"] = s.image_count;
    j["object_count"] = s.object_count;
    j["prediction_count"] = s.prediction_count;
    json per_class = json::object();
    for (const auto& [cls, n] : s.objects_per_class) per_class[std::to_string(cls)] = n;
    j["objects_per_class"] = per_class;
    if (s.box_height) {
        j["box_height"] = {{"min", s.box_height->min},       {"q25", s.box_height->q25},
                           {"median", s.box_height->median}, {"q75", s.box_height->q75},
                           {"max", s.box_height->max}};
    } else {
        j["box_height"] = nullptr;
    }
    return j;
}

json compare_to_json(const CompareReport& r, const Dataset& reference, const Dataset& other) {
    json classes = json::array();
    for (const auto& c : r.classes) {
        json batches = json::array();
        for (const auto& b : c.batches)
            batches.push_back({{"reference", reference.object_label(b.reference)},
                               {"members_a", labels(reference, b.members_a)},
                               {"members_b", labels(other, b.members_b)},
                               {"size_a", b.size_a()},
                               {"size_b", b.size_b()},
                               {"w1", b.w1},
                               {"m_diff", b.m_diff}});
        json jc;
        jc["class_id"] = c.class_id;
        jc["class_name"] = c.class_name;
        jc["n_a"] = c.n_a;
        jc["n_b"] = c.n_b;
        jc["n_batches"] = c.batches.size();
        jc["no_overlap"] = c.no_overlap();
        jc["w1"] = opt(c.w1);
        jc["m_diff"] = opt(c.m_diff);
        jc["overlap_fraction_a"] = opt(c.overlap_fraction_a);
        jc["overlap_fraction_b"] = opt(c.overlap_fraction_b);
        jc["mean_batch_size_a"] = opt(c.mean_batch_size_a);
        jc["mean_batch_size_b"] = opt(c.mean_batch_size_b);
        jc["overlap_a"] = labels(reference, c.overlap_a);
        jc["no_overlap_a"] = labels(reference, c.no_overlap_a);
        jc["overlap_b"] = labels(other, c.overlap_b);
        jc["no_overlap_b"] = labels(other, c.no_overlap_b);
        jc["batches"] = std::move(batches);
        classes.push_back(std::move(jc));
    }
    return {{"reduction", to_string(r.config.reduction)}, {"classes", std::move(classes)}};
}

json sweep_to_json(const SweepTable& t) {
    json points = json::array();
    for (const auto& p : t.points) {
        json classes = json::array();
        for (const auto& c : p.classes)
            classes.push_back({{"class_id", c.class_id},
                               {"n_batches", c.n_batches},
                               {"w1", opt(c.w1)},
                               {"m_diff", opt(c.m_diff)},
                               {"overlap_fraction_a", opt(c.overlap_fraction_a)},
                               {"overlap_fraction_b", opt(c.overlap_fraction_b)},
                               {"mean_batch_size_a", opt(c.mean_batch_size_a)},
                               {"mean_batch_size_b", opt(c.mean_batch_size_b)}});
        points.push_back({{"theta", p.theta}, {"patch", patch_string(p.patch)}, {"classes", std::move(classes)}});
    }
    return {{"sweep", t.kind == SweepKind::theta ? "theta" : "patch"}, {"points", std::move(points)}};
}

json pointwise_to_json(const PointwiseReport& r) {
    json classes = json::array();
    for (const auto& c : r.classes)
        classes.push_back({{"class_id", c.class_id},
                           {"n_pairs", c.n_pairs},
                           {"pointwise_mean_diff", opt(c.pointwise_mean_diff)},
                           {"w1", opt(c.w1)}});
    return {{"classes", std::move(classes)}};
}

ReportDocument make_document(const std::string& kind, json config, json datasets, json results,
                             const Provenance& provenance) {
    json prov;
    prov["generated_at"] = provenance.generated_at ? json(*provenance.generated_at) : json(nullptr);
    json inputs = json::object();
    for (const auto& [key, info] : provenance.inputs) inputs[key] = {{"path", info.path}, {"sha256", info.sha256}};
    prov["inputs"] = std::move(inputs);
    return {{"schema_version", kReportSchemaVersion},
            {"kind", kind},
            {"config", std::move(config)},
            {"datasets", std::move(datasets)},
            {"results", std::move(results)},
            {"provenance", std::move(prov)}};
}

namespace {

std::string format_real(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("report contains a non-finite number");
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    std::string s = buf;
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

void dump(const json& j, std::string& out) {
    switch (j.type()) {
        case json::value_t::null: out += "null"; break;
        case json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
        case json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
        case json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
        case json::value_t::number_float: out += format_real(j.get<double>()); break;
        case json::value_t::string: out += j.dump(); break;
        case json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += ',';
                first = false;
                dump(e, out);
            }
            out += ']';
            break;
        }
        case json::value_t::object: {
            // nlohmann's default object is a std::map, so iteration is sorted.
            out += '{';
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) out += ',';
                first = false;
                out += json(k).dump();
                out += ':';
                dump(v, out);
            }
            out += '}';
            break;
        }
        default: throw std::invalid_argument("report contains an unsupported JSON value");
    }
}

std::string csv_real(const std::optional<double>& v) {
    if (!v) return {};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", *v == 0.0 ? 0.0 : *v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

void csv_row(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
    }
    out += "\r\n";
}

void sweep_rows(std::string& out, const SweepTable& t, bool with_patch) {
    std::vector<std::string> header;
    if (with_patch) header = {"patch_h", "patch_w"};
    else header = {"theta"};
    for (const char* h : {"class", "w1", "m_diff", "overlap_fraction_a", "overlap_fraction_b", "mean_batch_size_a",
                          "mean_batch_size_b", "n_batches"})
        header.emplace_back(h);
    csv_row(out, header);
    for (const auto& p : t.points)
        for (const auto& c : p.classes) {
            std::vector<std::string> row;
            if (with_patch) row = {std::to_string(p.patch.h), std::to_string(p.patch.w)};
            else row = {csv_real(p.theta)};
            row.push_back(std::to_string(c.class_id));
            for (const auto& v : {c.w1, c.m_diff, c.overlap_fraction_a, c.overlap_fraction_b, c.mean_batch_size_a,
                                  c.mean_batch_size_b})
                row.push_back(csv_real(v));
            row.push_back(std::to_string(c.n_batches));
            csv_row(out, row);
        }
}

}  // namespace

std::string canonical_json(const json& doc) {
    std::string out;
    dump(doc, out);
    out += '\n';
    return out;
}

void write_report(const ReportDocument& doc, const fs::path& path) {
    if (!doc.is_object() || !doc.contains("schema_version"))
        throw std::invalid_argument("report document lacks schema_version");
    const std::string text = canonical_json(doc);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

ReportDocument read_report(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return json::parse(in);
}

PlotKind parse_plot_kind(const std::string& s) {
    if (s == "diff_vs_overlap") return PlotKind::diff_vs_overlap;
    if (s == "theta_sweep") return PlotKind::theta_sweep;
    if (s == "patch_sweep") return PlotKind::patch_sweep;
    if (s == "pointwise_vs_distribution") return PlotKind::pointwise_vs_distribution;
    throw std::invalid_argument("unknown plot kind '" + s + "'");
}

const char* to_string(PlotKind k) {
    switch (k) {
        case PlotKind::diff_vs_overlap: return "diff_vs_overlap";
        case PlotKind::theta_sweep: return "theta_sweep";
        case PlotKind::patch_sweep: return "patch_sweep";
        case PlotKind::pointwise_vs_distribution: return "pointwise_vs_distribution";
    }
    return "";
}

std::string plot_csv(const PlotSource& source, PlotKind kind) {
    std::string out;
    const auto mismatch = [&] {
        return PlotKindMismatch(std::string("plot kind ") + to_string(kind) + " does not match its data source");
    };
    switch (kind) {
        case PlotKind::diff_vs_overlap: {
            const auto* reports = std::get_if<std::vector<DirectedReport>>(&source);
            if (!reports) throw mismatch();
            csv_row(out, {"direction", "class", "overlap_fraction_a", "overlap_fraction_b", "w1", "m_diff", "n_batches"});
            for (const auto& dr : *reports)
                for (const auto& c : dr.report.classes) {
                    if (c.batches.empty()) continue;
                    csv_row(out, {dr.direction, std::to_string(c.class_id), csv_real(c.overlap_fraction_a),
                                  csv_real(c.overlap_fraction_b), csv_real(c.w1), csv_real(c.m_diff),
                                  std::to_string(c.batches.size())});
                }
            break;
        }
        case PlotKind::theta_sweep:
        case PlotKind::patch_sweep: {
            const auto* t = std::get_if<SweepTable>(&source);
            const SweepKind want = kind == PlotKind::theta_sweep ? SweepKind::theta : SweepKind::patch;
            if (!t || t->kind != want) throw mismatch();
            sweep_rows(out, *t, kind == PlotKind::patch_sweep);
            break;
        }
        case PlotKind::pointwise_vs_distribution: {
            const auto* r = std::get_if<PointwiseReport>(&source);
            if (!r) throw mismatch();
            csv_row(out, {"class", "n_pairs", "pointwise_mean_diff", "w1"});
            for (const auto& c : r->classes)
                csv_row(out, {std::to_string(c.class_id), std::to_string(c.n_pairs), csv_real(c.pointwise_mean_diff),
                              csv_real(c.w1)});
            break;
        }
    }
    return out;
}

void emit_plot_csv(const PlotSource& source, PlotKind kind, const fs::path& path) {
    const std::string text = plot_csv(source, kind);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace ctxval
