// Serial reference comparison: the reference loop written out directly with
// ordered sets for the overlap unions.
#include <set>

#include "ctxval/pipeline.hpp"
#include "ctxval/stats.hpp"
#include "pipeline_detail.hpp"

namespace ctxval {

CompareReport compare_serial(const Dataset& a, const Dataset& b, const PerformanceTable& perf_a,
                             const PerformanceTable& perf_b, const CompareConfig& cfg) {
    cfg.validate();
    CompareReport report;
    report.config = cfg;
    report.summary_a = dataset_summary(a);
    report.summary_b = dataset_summary(b);

    for (int cls : comparison_classes(a, b, cfg)) {
        const auto ca = detail::gather_contexts(a, cls, perf_a, cfg.patch, 1);
        const auto cb = detail::gather_contexts(b, cls, perf_b, cfg.patch, 1);

        ClassResult r;
        r.class_id = cls;
        r.class_name = detail::class_name(a, cls);
        r.n_a = ca.ids.size();
        r.n_b = cb.ids.size();
        std::set<ObjectId> overlap_a;
        std::set<ObjectId> overlap_b;
        std::vector<std::size_t> sizes_a;
        std::vector<std::size_t> sizes_b;

        for (std::size_t c = 0; c < ca.ids.size(); ++c) {
            BatchRecord rec;
            rec.reference = ca.ids[c];
            std::vector<double> iou_a;
            std::vector<double> iou_b;
            for (std::size_t s = 0; s < ca.ids.size(); ++s)
                if (similarity(ca.masks[c], ca.masks[s]) >= cfg.theta - kThetaSlack) {
                    rec.members_a.push_back(ca.ids[s]);
                    iou_a.push_back(ca.perf[s]);
                }
            for (std::size_t s = 0; s < cb.ids.size(); ++s)
                if (similarity(ca.masks[c], cb.masks[s]) >= cfg.theta - kThetaSlack) {
                    rec.members_b.push_back(cb.ids[s]);
                    iou_b.push_back(cb.perf[s]);
                }
            sizes_a.push_back(rec.members_a.size());
            sizes_b.push_back(rec.members_b.size());
            if (rec.members_b.empty()) continue;
            if (rec.size_a() < cfg.min_batch_size || rec.size_b() < cfg.min_batch_size) continue;

            overlap_a.insert(rec.members_a.begin(), rec.members_a.end());
            overlap_b.insert(rec.members_b.begin(), rec.members_b.end());
            const SampleSet sa(std::move(iou_a));
            const SampleSet sb(std::move(iou_b));
            rec.w1 = wasserstein1(sa, sb);
            rec.m_diff = mean_abs_diff_of_means(sa, sb);
            r.batches.push_back(std::move(rec));
        }

        for (const auto& id : ca.ids) (overlap_a.contains(id) ? r.overlap_a : r.no_overlap_a).push_back(id);
        for (const auto& id : cb.ids) (overlap_b.contains(id) ? r.overlap_b : r.no_overlap_b).push_back(id);
        detail::finish_class_result(r, cfg.reduction, sizes_a, sizes_b);
        report.classes.push_back(std::move(r));
    }
    return report;
}

CompareReport compare_serial(const Dataset& a, const Dataset& b, const CompareConfig& cfg) {
    cfg.validate();
    for (const Dataset* d : {&a, &b})
        if (auto v = validate_dataset(*d); !v.empty())
            throw CompareError("dataset '" + d->name + "' is invalid: " + v.front());
    return compare_serial(a, b, object_performance(a, cfg.confidence_floor),
                          object_performance(b, cfg.confidence_floor), cfg);
}

}  // namespace ctxval
