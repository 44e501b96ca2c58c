// Comparisons between empirical performance distributions.
#pragma once

#include <span>
#include <utility>
#include <vector>

namespace ctxval {

/// Non-empty, unweighted sample of performance values in [0, 1].
class SampleSet {
public:
    /// Throws std::invalid_argument if empty or any value is outside [0, 1].
    explicit SampleSet(std::vector<double> values);

    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double mean() const;

private:
    std::vector<double> values_;
};

/// Exact 1-Wasserstein distance between two empirical distributions with
/// uniform weights: the integral over (0, 1) of |F_a^-1(t) - F_b^-1(t)|,
/// evaluated on the merged breakpoints {i/|a|} ∪ {j/|b|}.
double wasserstein1(const SampleSet& a, const SampleSet& b);

/// |mean(a) - mean(b)|.
double mean_abs_diff_of_means(const SampleSet& a, const SampleSet& b);

/// Mean of |a_i - b_i| over aligned pairs. Throws on an empty list.
double pointwise_mean_diff(std::span<const std::pair<double, double>> pairs);

/// Reductions over a list of per-batch values.
double mean_of(std::span<const double> v);
double median_of(std::span<const double> v);
double max_of(std::span<const double> v);

}  // namespace ctxval
