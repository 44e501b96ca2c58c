// Context-batched comparison of detector performance between two datasets.
//
// For every reference object c of set A (per class), the batches A^c and B^c
// hold the objects whose patch context is at least theta-similar to c. When
// B^c is non-empty the per-object IOU distributions of the two batches are
// compared with W1 and the absolute difference of their means, and both
// batches join the overlap sets. Everything else in A and B is reported as
// "no overlap".
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxval/context.hpp"
#include "ctxval/dataset.hpp"
#include "ctxval/detection.hpp"

namespace ctxval {

enum class Reduction { mean, median, max };

const char* to_string(Reduction r);
Reduction parse_reduction(const std::string& s);

struct CompareConfig {
    double theta = 0.8;
    PatchSpec patch{120, 120};
    double confidence_floor = 0.0;
    std::size_t min_batch_size = 1;
    /// Restrict to these class ids; all classes of the shared table otherwise.
    std::optional<std::vector<int>> classes;
    Reduction reduction = Reduction::mean;
    /// Worker cap for the parallel kernels; 0 uses the OpenMP default.
    int threads = 0;
    /// Maximum center distance (px) for pairing objects in pointwise_compare.
    double pair_radius = 20.0;

    /// Throws std::invalid_argument describing the first bad field.
    void validate() const;
};

struct BatchRecord {
    ObjectId reference;
    std::vector<ObjectId> members_a;
    std::vector<ObjectId> members_b;
    double w1 = 0.0;
    double m_diff = 0.0;

    std::size_t size_a() const { return members_a.size(); }
    std::size_t size_b() const { return members_b.size(); }
    friend bool operator==(const BatchRecord&, const BatchRecord&) = default;
};

struct ClassResult {
    int class_id = 0;
    std::string class_name;
    /// Sorted by reference object id.
    std::vector<BatchRecord> batches;
    /// Reduction of the per-batch W1 / mean-difference lists; absent when no
    /// batch exists.
    std::optional<double> w1;
    std::optional<double> m_diff;
    std::vector<ObjectId> overlap_a;
    std::vector<ObjectId> no_overlap_a;
    std::vector<ObjectId> overlap_b;
    std::vector<ObjectId> no_overlap_b;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    /// |overlap| / |all|; absent for a class with no objects on that side.
    std::optional<double> overlap_fraction_a;
    std::optional<double> overlap_fraction_b;
    /// Mean |A^c| and |B^c| over every reference c of the class, batch or not.
    std::optional<double> mean_batch_size_a;
    std::optional<double> mean_batch_size_b;

    bool no_overlap() const { return batches.empty(); }
    friend bool operator==(const ClassResult&, const ClassResult&) = default;
};

struct CompareReport {
    CompareConfig config;
    std::vector<ClassResult> classes;
    DatasetSummary summary_a;
    DatasetSummary summary_b;
};

class CompareError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Class ids both datasets are compared over. Throws CompareError when the
/// class tables differ or the filter names an unknown class.
std::vector<int> comparison_classes(const Dataset& a, const Dataset& b, const CompareConfig& cfg);

/// OpenMP-parallel comparison. Results are independent of the worker count.
CompareReport compare(const Dataset& a, const Dataset& b, const CompareConfig& cfg);
CompareReport compare(const Dataset& a, const Dataset& b, const PerformanceTable& perf_a,
                      const PerformanceTable& perf_b, const CompareConfig& cfg);

/// Single-threaded reference implementation, kept for cross-checking and
/// benchmarking the parallel path.
CompareReport compare_serial(const Dataset& a, const Dataset& b, const CompareConfig& cfg);
CompareReport compare_serial(const Dataset& a, const Dataset& b, const PerformanceTable& perf_a,
                             const PerformanceTable& perf_b, const CompareConfig& cfg);

struct SweepClassPoint {
    int class_id = 0;
    std::size_t n_batches = 0;
    std::optional<double> w1;
    std::optional<double> m_diff;
    std::optional<double> overlap_fraction_a;
    std::optional<double> overlap_fraction_b;
    std::optional<double> mean_batch_size_a;
    std::optional<double> mean_batch_size_b;

    friend bool operator==(const SweepClassPoint&, const SweepClassPoint&) = default;
};

struct SweepPoint {
    double theta = 0.0;
    PatchSpec patch;
    std::vector<SweepClassPoint> classes;
};

enum class SweepKind { theta, patch };

struct SweepTable {
    SweepKind kind = SweepKind::theta;
    CompareConfig base;
    std::vector<SweepPoint> points;
};

/// One comparison per theta; `thetas` must be ascending.
SweepTable sweep_theta(const Dataset& a, const Dataset& b, const CompareConfig& cfg,
                       const std::vector<double>& thetas);
SweepTable sweep_patch(const Dataset& a, const Dataset& b, const CompareConfig& cfg,
                       const std::vector<PatchSpec>& specs);

struct PointwiseClassResult {
    int class_id = 0;
    std::size_t n_pairs = 0;
    /// Mean |IOU_a - IOU_b| over paired objects; absent without pairs.
    std::optional<double> pointwise_mean_diff;
    /// W1 between the two per-class IOU sets of the paired objects.
    std::optional<double> w1;
};

struct PointwiseReport {
    CompareConfig config;
    std::vector<PointwiseClassResult> classes;
};

struct ObjectPair {
    ObjectId a;
    ObjectId b;
};

/// Pairs images by pair_key, then same-class objects by nearest box center
/// within cfg.pair_radius. Throws CompareError on an unpaired image, unequal
/// per-class counts, a missing partner, or an ambiguous pairing.
std::vector<ObjectPair> pair_objects(const Dataset& a, const Dataset& b, double radius);

PointwiseReport pointwise_compare(const Dataset& a, const Dataset& b, const CompareConfig& cfg);
PointwiseReport pointwise_compare(const Dataset& a, const Dataset& b, const PerformanceTable& perf_a,
                                  const PerformanceTable& perf_b, const CompareConfig& cfg);

}  // namespace ctxval
