// Object-centered ground-truth patch masks and the patch similarity factor.
//
// A patch of h x w pixels is laid over the owner's image so that the pixel
// containing the owner's box center sits at patch cell (h/2, w/2). Patch cell
// (r, c) covers image pixel (origin_y + r, origin_x + c) and is occupied when
// its pixel center lies inside some same-class ground-truth box and inside
// the image. Boxes are half-open: x_min <= x < x_max.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ctxval/dataset.hpp"

namespace ctxval {

struct PatchSpec {
    int h = 120;
    int w = 120;

    static constexpr int kMaxSide = 4096;
    bool is_valid() const { return h >= 1 && w >= 1 && h <= kMaxSide && w <= kMaxSide; }

    friend bool operator==(const PatchSpec&, const PatchSpec&) = default;
};

/// Binary occupancy grid, rows packed into 64-bit words.
class PatchMask {
public:
    PatchMask() = default;
    PatchMask(ObjectId owner, PatchSpec spec);

    ObjectId owner() const { return owner_; }
    const PatchSpec& spec() const { return spec_; }

    bool at(int row, int col) const;
    void set(int row, int col);
    /// Sets cells [col_begin, col_end) of `row`.
    void set_span(int row, int col_begin, int col_end);
    std::size_t count() const;

    std::span<const std::uint64_t> words() const { return words_; }
    std::size_t words_per_row() const { return words_per_row_; }

    friend bool operator==(const PatchMask&, const PatchMask&) = default;

private:
    ObjectId owner_;
    PatchSpec spec_{0, 0};
    std::size_t words_per_row_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Image-pixel offset of patch cell (0, 0) for a box.
struct PatchOrigin {
    long x = 0;
    long y = 0;
};
PatchOrigin patch_origin(const BoundingBox& owner_box, PatchSpec spec);

/// Mask for `owner` built from the same-class boxes of `img`.
PatchMask extract_patch_mask(const ImageRecord& img, const GroundTruthObject& owner, PatchSpec spec);

/// Throws std::out_of_range for an unknown object id.
PatchMask extract_patch_mask(const Dataset& d, ObjectId object_id, PatchSpec spec);

/// |p ∧ q| / |p ∨ q|. Two empty masks are identical and score 1.
/// Throws std::invalid_argument when the specs differ.
double similarity(const PatchMask& p, const PatchMask& q);

/// Raw intersection/union cell counts behind similarity().
struct OverlapCounts {
    std::size_t intersection = 0;
    std::size_t union_ = 0;
};
OverlapCounts overlap_counts(const PatchMask& p, const PatchMask& q);

/// Threshold comparisons use theta minus this slack.
inline constexpr double kThetaSlack = 1e-9;

/// All same-class objects of `pool` whose context similarity to `reference`
/// (an object of `reference_set`) is at least theta, in pool object order.
std::vector<ObjectId> build_batch(const Dataset& reference_set, ObjectId reference,
                                  const Dataset& pool, double theta, PatchSpec spec);

}  // namespace ctxval
