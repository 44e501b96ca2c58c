#include "ctxval/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <omp.h>

#include "ctxval/stats.hpp"
#include "pipeline_detail.hpp"

namespace ctxval {

const char* to_string(Reduction r) {
    switch (r) {
        case Reduction::mean: return "mean";
        case Reduction::median: return "median";
        case Reduction::max: return "max";
    }
    return "mean";
}

Reduction parse_reduction(const std::string& s) {
    if (s == "mean") return Reduction::mean;
    if (s == "median") return Reduction::median;
    if (s == "max") return Reduction::max;
    throw std::invalid_argument("unknown reduction '" + s + "'");
}

void CompareConfig::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must be in [0,1]");
    if (!patch.is_valid()) throw std::invalid_argument("patch size must be within 1..4096");
    if (!std::isfinite(confidence_floor)) throw std::invalid_argument("confidence floor must be finite");
    if (min_batch_size < 1) throw std::invalid_argument("min batch size must be >= 1");
    if (threads < 0) throw std::invalid_argument("thread count must be >= 0");
    if (!(pair_radius >= 0.0)) throw std::invalid_argument("pair radius must be >= 0");
}

std::vector<int> comparison_classes(const Dataset& a, const Dataset& b, const CompareConfig& cfg) {
    std::set<int> ids_a;
    std::set<int> ids_b;
    for (const auto& c : a.class_table) ids_a.insert(c.id);
    for (const auto& c : b.class_table) ids_b.insert(c.id);
    if (ids_a != ids_b) throw CompareError("datasets '" + a.name + "' and '" + b.name + "' have different class tables");
    if (!cfg.classes) return {ids_a.begin(), ids_a.end()};
    std::set<int> chosen;
    for (int c : *cfg.classes) {
        if (!ids_a.contains(c)) throw CompareError("class filter names unknown class " + std::to_string(c));
        chosen.insert(c);
    }
    return {chosen.begin(), chosen.end()};
}

namespace detail {

int resolve_threads(int requested) {
    return requested > 0 ? requested : omp_get_max_threads();
}

ClassContexts gather_contexts(const Dataset& d, int class_id, const PerformanceTable& perf,
                              PatchSpec spec, int threads) {
    std::vector<std::pair<const ImageRecord*, const GroundTruthObject*>> objs;
    ClassContexts cc;
    for (const auto& img : d.images)
        for (const auto& g : img.ground_truth)
            if (g.class_id == class_id) {
                objs.emplace_back(&img, &g);
                cc.ids.push_back(g.object_id);
                auto it = perf.find(g.object_id);
                if (it == perf.end())
                    throw CompareError("performance table lacks object " + d.object_label(g.object_id));
                if (!(it->second >= 0.0 && it->second <= 1.0))
                    throw CompareError("performance of " + d.object_label(g.object_id) + " outside [0,1]");
                cc.perf.push_back(it->second);
            }
    cc.masks.resize(objs.size());
    const auto n = static_cast<long>(objs.size());
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1)) if (threads > 1)
    for (long i = 0; i < n; ++i)
        cc.masks[static_cast<std::size_t>(i)] = extract_patch_mask(*objs[i].first, *objs[i].second, spec);
    return cc;
}

double reduce(Reduction r, const std::vector<double>& values) {
    switch (r) {
        case Reduction::mean: return mean_of(values);
        case Reduction::median: return median_of(values);
        case Reduction::max: return max_of(values);
    }
    return mean_of(values);
}

void finish_class_result(ClassResult& out, Reduction reduction,
                         const std::vector<std::size_t>& all_sizes_a,
                         const std::vector<std::size_t>& all_sizes_b) {
    if (!out.batches.empty()) {
        std::vector<double> w1;
        std::vector<double> md;
        for (const auto& b : out.batches) {
            w1.push_back(b.w1);
            md.push_back(b.m_diff);
        }
        out.w1 = reduce(reduction, w1);
        out.m_diff = reduce(reduction, md);
    }
    if (out.n_a > 0)
        out.overlap_fraction_a = static_cast<double>(out.overlap_a.size()) / static_cast<double>(out.n_a);
    if (out.n_b > 0)
        out.overlap_fraction_b = static_cast<double>(out.overlap_b.size()) / static_cast<double>(out.n_b);
    auto mean_size = [](const std::vector<std::size_t>& s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        std::size_t total = 0;
        for (auto v : s) total += v;
        return static_cast<double>(total) / static_cast<double>(s.size());
    };
    out.mean_batch_size_a = mean_size(all_sizes_a);
    out.mean_batch_size_b = mean_size(all_sizes_b);
}

std::string class_name(const Dataset& d, int class_id) {
    for (const auto& c : d.class_table)
        if (c.id == class_id) return c.name;
    return {};
}

}  // namespace detail

namespace {

using detail::ClassContexts;

struct ReferenceOutcome {
    std::vector<std::uint32_t> members_a;
    std::vector<std::uint32_t> members_b;
    bool accepted = false;
    double w1 = 0.0;
    double m_diff = 0.0;
};

ClassResult compare_class(const ClassContexts& ca, const ClassContexts& cb, const CompareConfig& cfg,
                          int threads) {
    const double cut = cfg.theta - kThetaSlack;
    const auto n = static_cast<long>(ca.ids.size());
    std::vector<ReferenceOutcome> outcomes(ca.ids.size());

#pragma omp parallel for schedule(dynamic, 8) num_threads(threads) if (threads > 1)
    for (long i = 0; i < n; ++i) {
        auto& out = outcomes[static_cast<std::size_t>(i)];
        const PatchMask& ref = ca.masks[static_cast<std::size_t>(i)];
        for (std::size_t s = 0; s < ca.masks.size(); ++s)
            if (similarity(ref, ca.masks[s]) >= cut) out.members_a.push_back(static_cast<std::uint32_t>(s));
        for (std::size_t s = 0; s < cb.masks.size(); ++s)
            if (similarity(ref, cb.masks[s]) >= cut) out.members_b.push_back(static_cast<std::uint32_t>(s));
        if (out.members_b.empty() || out.members_a.size() < cfg.min_batch_size ||
            out.members_b.size() < cfg.min_batch_size)
            continue;
        std::vector<double> va;
        std::vector<double> vb;
        for (auto s : out.members_a) va.push_back(ca.perf[s]);
        for (auto s : out.members_b) vb.push_back(cb.perf[s]);
        const SampleSet sa(std::move(va));
        const SampleSet sb(std::move(vb));
        out.accepted = true;
        out.w1 = wasserstein1(sa, sb);
        out.m_diff = mean_abs_diff_of_means(sa, sb);
    }

    // Merge in reference order.
    ClassResult r;
    r.n_a = ca.ids.size();
    r.n_b = cb.ids.size();
    std::vector<char> in_a(ca.ids.size(), 0);
    std::vector<char> in_b(cb.ids.size(), 0);
    std::vector<std::size_t> sizes_a;
    std::vector<std::size_t> sizes_b;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        sizes_a.push_back(o.members_a.size());
        sizes_b.push_back(o.members_b.size());
        if (!o.accepted) continue;
        BatchRecord rec;
        rec.reference = ca.ids[i];
        for (auto s : o.members_a) {
            rec.members_a.push_back(ca.ids[s]);
            in_a[s] = 1;
        }
        for (auto s : o.members_b) {
            rec.members_b.push_back(cb.ids[s]);
            in_b[s] = 1;
        }
        rec.w1 = o.w1;
        rec.m_diff = o.m_diff;
        r.batches.push_back(std::move(rec));
    }
    for (std::size_t s = 0; s < ca.ids.size(); ++s) (in_a[s] ? r.overlap_a : r.no_overlap_a).push_back(ca.ids[s]);
    for (std::size_t s = 0; s < cb.ids.size(); ++s) (in_b[s] ? r.overlap_b : r.no_overlap_b).push_back(cb.ids[s]);
    detail::finish_class_result(r, cfg.reduction, sizes_a, sizes_b);
    return r;
}

}  // namespace

CompareReport compare(const Dataset& a, const Dataset& b, const PerformanceTable& perf_a,
                      const PerformanceTable& perf_b, const CompareConfig& cfg) {
    cfg.validate();
    const int threads = detail::resolve_threads(cfg.threads);
    CompareReport report;
    report.config = cfg;
    report.summary_a = dataset_summary(a);
    report.summary_b = dataset_summary(b);
    for (int cls : comparison_classes(a, b, cfg)) {
        const auto ca = detail::gather_contexts(a, cls, perf_a, cfg.patch, threads);
        const auto cb = detail::gather_contexts(b, cls, perf_b, cfg.patch, threads);
        ClassResult r = compare_class(ca, cb, cfg, threads);
        r.class_id = cls;
        r.class_name = detail::class_name(a, cls);
        report.classes.push_back(std::move(r));
    }
    return report;
}

namespace {

void require_valid(const Dataset& d) {
    if (auto v = validate_dataset(d); !v.empty())
        throw CompareError("dataset '" + d.name + "' is invalid: " + v.front());
}

}  // namespace

CompareReport compare(const Dataset& a, const Dataset& b, const CompareConfig& cfg) {
    cfg.validate();
    require_valid(a);
    require_valid(b);
    return compare(a, b, object_performance(a, cfg.confidence_floor),
                   object_performance(b, cfg.confidence_floor), cfg);
}

namespace {

SweepPoint to_sweep_point(const CompareReport& r) {
    SweepPoint p;
    p.theta = r.config.theta;
    p.patch = r.config.patch;
    for (const auto& c : r.classes)
        p.classes.push_back({c.class_id, c.batches.size(), c.w1, c.m_diff, c.overlap_fraction_a,
                             c.overlap_fraction_b, c.mean_batch_size_a, c.mean_batch_size_b});
    return p;
}

}  // namespace

SweepTable sweep_theta(const Dataset& a, const Dataset& b, const CompareConfig& cfg,
                       const std::vector<double>& thetas) {
    if (!std::is_sorted(thetas.begin(), thetas.end()))
        throw std::invalid_argument("sweep_theta: thresholds must be ascending");
    cfg.validate();
    require_valid(a);
    require_valid(b);
    const auto perf_a = object_performance(a, cfg.confidence_floor);
    const auto perf_b = object_performance(b, cfg.confidence_floor);
    SweepTable t{SweepKind::theta, cfg, {}};
    for (double theta : thetas) {
        CompareConfig c = cfg;
        c.theta = theta;
        t.points.push_back(to_sweep_point(compare(a, b, perf_a, perf_b, c)));
    }
    return t;
}

SweepTable sweep_patch(const Dataset& a, const Dataset& b, const CompareConfig& cfg,
                       const std::vector<PatchSpec>& specs) {
    for (const auto& s : specs)
        if (!s.is_valid()) throw std::invalid_argument("sweep_patch: invalid patch size");
    cfg.validate();
    require_valid(a);
    require_valid(b);
    const auto perf_a = object_performance(a, cfg.confidence_floor);
    const auto perf_b = object_performance(b, cfg.confidence_floor);
    SweepTable t{SweepKind::patch, cfg, {}};
    for (const auto& spec : specs) {
        CompareConfig c = cfg;
        c.patch = spec;
        t.points.push_back(to_sweep_point(compare(a, b, perf_a, perf_b, c)));
    }
    return t;
}

std::vector<ObjectPair> pair_objects(const Dataset& a, const Dataset& b, double radius) {
    constexpr double kTieTolerance = 1e-6;
    std::map<std::string, const ImageRecord*> by_key;
    for (const auto& img : b.images)
        if (img.pair_key) by_key.emplace(*img.pair_key, &img);

    std::vector<ObjectPair> pairs;
    for (const auto& ia : a.images) {
        if (!ia.pair_key) throw CompareError("image " + ia.image_id + " has no pair_key");
        auto it = by_key.find(*ia.pair_key);
        if (it == by_key.end())
            throw CompareError("image " + ia.image_id + ": no partner with pair_key '" + *ia.pair_key + "'");
        const ImageRecord& ib = *it->second;

        std::map<int, std::size_t> count_a;
        std::map<int, std::size_t> count_b;
        for (const auto& g : ia.ground_truth) ++count_a[g.class_id];
        for (const auto& g : ib.ground_truth) ++count_b[g.class_id];
        if (count_a != count_b)
            throw CompareError("paired images " + ia.image_id + " / " + ib.image_id +
                               " differ in per-class object counts");

        std::vector<char> taken(ib.ground_truth.size(), 0);
        for (const auto& ga : ia.ground_truth) {
            double best = std::numeric_limits<double>::infinity();
            double second = best;
            std::size_t best_k = 0;
            for (std::size_t k = 0; k < ib.ground_truth.size(); ++k) {
                const auto& gb = ib.ground_truth[k];
                if (gb.class_id != ga.class_id) continue;
                const double dist = std::hypot(ga.box.center_x() - gb.box.center_x(),
                                               ga.box.center_y() - gb.box.center_y());
                if (dist < best) {
                    second = best;
                    best = dist;
                    best_k = k;
                } else if (dist < second) {
                    second = dist;
                }
            }
            const std::string who = "object " + a.object_label(ga.object_id);
            if (best > radius) throw CompareError(who + ": no partner within " + std::to_string(radius) + " px");
            if (second - best <= kTieTolerance) throw CompareError(who + ": ambiguous pairing (equidistant partners)");
            if (taken[best_k]) throw CompareError(who + ": ambiguous pairing (partner already claimed)");
            taken[best_k] = 1;
            pairs.push_back({ga.object_id, ib.ground_truth[best_k].object_id});
        }
    }
    return pairs;
}

PointwiseReport pointwise_compare(const Dataset& a, const Dataset& b, const PerformanceTable& perf_a,
                                  const PerformanceTable& perf_b, const CompareConfig& cfg) {
    cfg.validate();
    const auto classes = comparison_classes(a, b, cfg);
    const auto pairs = pair_objects(a, b, cfg.pair_radius);

    std::map<int, std::vector<std::pair<double, double>>> by_class;
    for (int c : classes) by_class[c];
    for (const auto& p : pairs) {
        const int cls = a.find_object(p.a)->class_id;
        auto it = by_class.find(cls);
        if (it == by_class.end()) continue;
        auto fa = perf_a.find(p.a);
        auto fb = perf_b.find(p.b);
        if (fa == perf_a.end() || fb == perf_b.end()) throw CompareError("performance table lacks a paired object");
        it->second.emplace_back(fa->second, fb->second);
    }

    PointwiseReport r;
    r.config = cfg;
    for (const auto& [cls, values] : by_class) {
        PointwiseClassResult pc;
        pc.class_id = cls;
        pc.n_pairs = values.size();
        if (!values.empty()) {
            std::vector<double> left;
            std::vector<double> right;
            for (const auto& [x, y] : values) {
                left.push_back(x);
                right.push_back(y);
            }
            pc.pointwise_mean_diff = pointwise_mean_diff(values);
            pc.w1 = wasserstein1(SampleSet(std::move(left)), SampleSet(std::move(right)));
        }
        r.classes.push_back(pc);
    }
    return r;
}

PointwiseReport pointwise_compare(const Dataset& a, const Dataset& b, const CompareConfig& cfg) {
    cfg.validate();
    require_valid(a);
    require_valid(b);
    return pointwise_compare(a, b, object_performance(a, cfg.confidence_floor),
                             object_performance(b, cfg.confidence_floor), cfg);
}

}  // namespace ctxval
