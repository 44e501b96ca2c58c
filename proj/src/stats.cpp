#include "ctxval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ctxval {

SampleSet::SampleSet(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("SampleSet: empty sample");
    for (double v : values_)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("SampleSet: value outside [0,1]");
}

double SampleSet::mean() const { return mean_of(values_); }

double wasserstein1(const SampleSet& a, const SampleSet& b) {
    std::vector<double> sa(a.values().begin(), a.values().end());
    std::vector<double> sb(b.values().begin(), b.values().end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    // Breakpoints i/n and j/m are compared on the common denominator n*m,
    // so segment boundaries are exact integers.
    const auto n = static_cast<std::uint64_t>(sa.size());
    const auto m = static_cast<std::uint64_t>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    std::uint64_t pos = 0;
    double total = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const std::uint64_t next_a = (i + 1) * m;
        const std::uint64_t next_b = (j + 1) * n;
        const std::uint64_t next = std::min(next_a, next_b);
        total += std::abs(sa[i] - sb[j]) * static_cast<double>(next - pos);
        pos = next;
        if (next_a == next) ++i;
        if (next_b == next) ++j;
    }
    return total / static_cast<double>(n * m);
}

double mean_abs_diff_of_means(const SampleSet& a, const SampleSet& b) {
    return std::abs(a.mean() - b.mean());
}

double pointwise_mean_diff(std::span<const std::pair<double, double>> pairs) {
    if (pairs.empty()) throw std::invalid_argument("pointwise_mean_diff: no pairs");
    double s = 0.0;
    for (const auto& [x, y] : pairs) s += std::abs(x - y);
    return s / static_cast<double>(pairs.size());
}

double mean_of(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean_of: empty input");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double median_of(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("median_of: empty input");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const std::size_t mid = s.size() / 2;
    return s.size() % 2 ? s[mid] : 0.5 * (s[mid - 1] + s[mid]);
}

double max_of(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("max_of: empty input");
    return *std::max_element(v.begin(), v.end());
}

}  // namespace ctxval
