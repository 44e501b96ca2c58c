// Pieces shared by the parallel and serial comparison paths.
#pragma once

#include <vector>

#include "ctxval/pipeline.hpp"

namespace ctxval::detail {

/// All objects of one class in one dataset, in dataset order, with their
/// patch masks and performance values.
struct ClassContexts {
    std::vector<ObjectId> ids;
    std::vector<PatchMask> masks;
    std::vector<double> perf;
};

/// `threads` <= 1 extracts serially.
ClassContexts gather_contexts(const Dataset& d, int class_id, const PerformanceTable& perf,
                              PatchSpec spec, int threads);

int resolve_threads(int requested);

double reduce(Reduction r, const std::vector<double>& values);

/// Fills reductions, fractions and mean batch sizes from the already filled
/// batch list, overlap sets and per-reference batch sizes.
void finish_class_result(ClassResult& out, Reduction reduction,
                         const std::vector<std::size_t>& all_sizes_a,
                         const std::vector<std::size_t>& all_sizes_b);

std::string class_name(const Dataset& d, int class_id);

}  // namespace ctxval::detail
