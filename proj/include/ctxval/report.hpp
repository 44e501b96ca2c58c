// Canonical JSON reports and plot-ready CSV.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxval/dataset.hpp"
#include "ctxval/pipeline.hpp"

namespace ctxval {

inline constexpr int kReportSchemaVersion = 1;

/// Report documents are plain JSON trees; write_report() enforces the
/// canonical form.
using ReportDocument = nlohmann::json;

struct InputInfo {
    std::string path;
    std::string sha256;
};

struct Provenance {
    /// ISO-8601 UTC; serialized as null when absent.
    std::optional<std::string> generated_at;
    std::map<std::string, InputInfo> inputs;
};

/// SHA-256 over manifest.json, labels/* and predictions/* (sorted by relative
/// path, each entry as path NUL size NUL bytes).
std::string content_hash(const std::filesystem::path& dataset_root);
std::string utc_timestamp();

nlohmann::json config_to_json(const CompareConfig& cfg);
nlohmann::json summary_to_json(const DatasetSummary& s);

/// One comparison direction. `reference` is the dataset whose objects drive
/// the loop (set A of `r`), `other` is set B.
nlohmann::json compare_to_json(const CompareReport& r, const Dataset& reference, const Dataset& other);
nlohmann::json sweep_to_json(const SweepTable& t);
nlohmann::json pointwise_to_json(const PointwiseReport& r);

/// {"schema_version", "kind", "config", "datasets", "results", "provenance"}.
ReportDocument make_document(const std::string& kind, nlohmann::json config, nlohmann::json datasets,
                             nlohmann::json results, const Provenance& provenance);

/// Sorted keys, no whitespace, reals with 9 significant digits (always
/// carrying a '.' or exponent), trailing newline. Throws std::invalid_argument
/// on non-finite numbers.
std::string canonical_json(const nlohmann::json& doc);

/// Throws std::invalid_argument when the schema version is missing and
/// std::runtime_error when the path cannot be written.
void write_report(const ReportDocument& doc, const std::filesystem::path& path);
ReportDocument read_report(const std::filesystem::path& path);

enum class PlotKind { diff_vs_overlap, theta_sweep, patch_sweep, pointwise_vs_distribution };

PlotKind parse_plot_kind(const std::string& s);
const char* to_string(PlotKind k);

struct DirectedReport {
    std::string direction;
    CompareReport report;
};

using PlotSource = std::variant<std::vector<DirectedReport>, SweepTable, PointwiseReport>;

class PlotKindMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Header row plus one row per point, CRLF-terminated, RFC 4180 quoting.
/// Columns:
///   diff_vs_overlap            direction,class,overlap_fraction_a,overlap_fraction_b,w1,m_diff,n_batches
///                              (one row per class that has batches)
///   theta_sweep                theta,class,w1,m_diff,overlap_fraction_a,overlap_fraction_b,
///                              mean_batch_size_a,mean_batch_size_b,n_batches
///   patch_sweep                patch_h,patch_w,class,... as theta_sweep
///   pointwise_vs_distribution  class,n_pairs,pointwise_mean_diff,w1
/// `w1` and `m_diff` carry the configured reduction; absent values are empty.
std::string plot_csv(const PlotSource& source, PlotKind kind);
void emit_plot_csv(const PlotSource& source, PlotKind kind, const std::filesystem::path& path);

}  // namespace ctxval
