#include "ctxval/context.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace ctxval {

PatchMask::PatchMask(ObjectId owner, PatchSpec spec)
    : owner_(owner),
      spec_(spec),
      words_per_row_((static_cast<std::size_t>(spec.w) + 63) / 64),
      words_(words_per_row_ * static_cast<std::size_t>(spec.h), 0) {
    if (!spec.is_valid()) throw std::invalid_argument("invalid patch spec");
}

bool PatchMask::at(int row, int col) const {
    const std::size_t i = static_cast<std::size_t>(row) * words_per_row_ + static_cast<std::size_t>(col) / 64;
    return (words_[i] >> (col % 64)) & 1U;
}

void PatchMask::set(int row, int col) {
    const std::size_t i = static_cast<std::size_t>(row) * words_per_row_ + static_cast<std::size_t>(col) / 64;
    words_[i] |= std::uint64_t{1} << (col % 64);
}

void PatchMask::set_span(int row, int col_begin, int col_end) {
    std::uint64_t* r = words_.data() + static_cast<std::size_t>(row) * words_per_row_;
    while (col_begin < col_end) {
        const int word = col_begin / 64;
        const int bit = col_begin % 64;
        const int n = std::min(64 - bit, col_end - col_begin);
        const std::uint64_t bits = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
        r[word] |= bits << bit;
        col_begin += n;
    }
}

std::size_t PatchMask::count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

PatchOrigin patch_origin(const BoundingBox& owner_box, PatchSpec spec) {
    const auto px = static_cast<long>(std::floor(owner_box.center_x()));
    const auto py = static_cast<long>(std::floor(owner_box.center_y()));
    return {px - spec.w / 2, py - spec.h / 2};
}

namespace {

// First integer pixel index i whose center i + 0.5 is >= edge.
long first_center_at_or_after(double edge) {
    auto i = static_cast<long>(std::ceil(edge - 0.5));
    while (static_cast<double>(i - 1) + 0.5 >= edge) --i;
    while (static_cast<double>(i) + 0.5 < edge) ++i;
    return i;
}

}  // namespace

PatchMask extract_patch_mask(const ImageRecord& img, const GroundTruthObject& owner, PatchSpec spec) {
    PatchMask mask(owner.object_id, spec);
    const PatchOrigin o = patch_origin(owner.box, spec);
    for (const auto& g : img.ground_truth) {
        if (g.class_id != owner.class_id) continue;
        // Image-pixel index ranges whose centers fall inside the box, the
        // image and the patch window.
        const long x0 = std::max({first_center_at_or_after(g.box.x_min), 0L, o.x});
        const long x1 = std::min({first_center_at_or_after(g.box.x_max), long{img.width}, o.x + spec.w});
        const long y0 = std::max({first_center_at_or_after(g.box.y_min), 0L, o.y});
        const long y1 = std::min({first_center_at_or_after(g.box.y_max), long{img.height}, o.y + spec.h});
        if (x0 >= x1 || y0 >= y1) continue;
        for (long y = y0; y < y1; ++y)
            mask.set_span(static_cast<int>(y - o.y), static_cast<int>(x0 - o.x), static_cast<int>(x1 - o.x));
    }
    return mask;
}

PatchMask extract_patch_mask(const Dataset& d, ObjectId object_id, PatchSpec spec) {
    const GroundTruthObject* obj = d.find_object(object_id);
    if (!obj) throw std::out_of_range("unknown object " + d.object_label(object_id));
    return extract_patch_mask(d.image_of(object_id), *obj, spec);
}

OverlapCounts overlap_counts(const PatchMask& p, const PatchMask& q) {
    if (!(p.spec() == q.spec())) throw std::invalid_argument("similarity: patch specs differ");
    const auto a = p.words();
    const auto b = q.words();
    OverlapCounts c;
    for (std::size_t i = 0; i < a.size(); ++i) {
        c.intersection += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
        c.union_ += static_cast<std::size_t>(std::popcount(a[i] | b[i]));
    }
    return c;
}

double similarity(const PatchMask& p, const PatchMask& q) {
    const OverlapCounts c = overlap_counts(p, q);
    if (c.union_ == 0) return 1.0;
    return static_cast<double>(c.intersection) / static_cast<double>(c.union_);
}

std::vector<ObjectId> build_batch(const Dataset& reference_set, ObjectId reference,
                                  const Dataset& pool, double theta, PatchSpec spec) {
    const GroundTruthObject* ref = reference_set.find_object(reference);
    if (!ref) throw std::out_of_range("unknown reference " + reference_set.object_label(reference));
    const PatchMask ref_mask = extract_patch_mask(reference_set.image_of(reference), *ref, spec);
    std::vector<ObjectId> batch;
    for (const auto& img : pool.images)
        for (const auto& g : img.ground_truth)
            if (g.class_id == ref->class_id &&
                similarity(ref_mask, extract_patch_mask(img, g, spec)) >= theta - kThetaSlack)
                batch.push_back(g.object_id);
    return batch;
}

}  // namespace ctxval
