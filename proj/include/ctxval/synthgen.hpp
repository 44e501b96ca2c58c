// Seeded synthetic scenes and a synthetic "judge" that turns ground truth
// into corrupted predictions.
//
// All randomness comes from Rng: the 64-bit Mersenne Twister (std::mt19937_64,
// whose output sequence is fixed by the C++ standard) with the transforms
// below written out here rather than taken from <random>, whose distributions
// differ between standard libraries.
//
//   uniform()        (engine() >> 11) * 2^-53, in [0, 1)
//   uniform_int(a,b) a + floor(uniform() * (b - a + 1))
//   normal()         Box-Muller on two uniform() draws: sqrt(-2 ln(1-u1)) cos(2 pi u2)
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ctxval/dataset.hpp"

namespace ctxval {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();
    long uniform_int(long lo, long hi);
    double normal();

private:
    std::mt19937_64 engine_;
};

enum class Placement { uniform, clustered };

struct ClassMix {
    int id = 0;
    std::string name;
    double weight = 1.0;
};

struct ScenarioConfig {
    std::string name = "synthetic";
    std::size_t images = 100;
    int image_width = 1280;
    int image_height = 720;
    int objects_min = 12;
    int objects_max = 16;
    std::vector<ClassMix> classes{{0, "red_cone", 1.0}, {1, "green_cone", 1.0}};
    int box_height_min = 20;
    int box_height_max = 60;
    /// Box width = max(1, round(height * aspect)).
    double aspect = 0.75;
    /// Boxes keep at least this gap (px) on one axis from every other box.
    double min_separation = 4.0;
    Placement placement = Placement::uniform;
    double cluster_radius = 100.0;
    int clusters_per_image = 2;

    void validate() const;
};

struct GeneratedDataset {
    Dataset dataset;
    /// Objects dropped after 10,000 failed placement attempts.
    std::size_t skipped_objects = 0;
};

/// Ground truth only; every image gets pair_key == image_id.
///
/// Draw order per image: object count; for clustered placement the cluster
/// centers (x then y); then per object the class, followed by attempts of
/// (height, x, y) for uniform placement or (height, cluster, radius, angle)
/// for clustered placement until the box fits.
GeneratedDataset generate_dataset(const ScenarioConfig& sc, std::uint64_t seed);

struct CorruptionModel {
    /// Per-class miss probability; classes not listed use default_miss.
    std::map<int, double> miss_probability;
    double default_miss = 0.0;
    double center_jitter_px = 0.0;
    /// Multiplicative size noise: side * (1 + size_jitter * normal()).
    double size_jitter = 0.0;
    /// Expected false positives per image.
    double false_positive_rate = 0.0;
    double confidence_min = 1.0;
    double confidence_max = 1.0;
    double class_confusion = 0.0;

    double miss_for(int class_id) const;
    void validate() const;
};

/// Replaces all predictions. Per ground-truth object, in order, the draws are:
/// miss u, confusion u, confused-class u, center x/y normals, width/height
/// normals, confidence u; they are consumed whether or not the object is
/// missed. Per image afterwards: one u for the false-positive count, then per
/// false positive: class u, height, x, y, confidence u.
Dataset synthesize_predictions(const Dataset& d, const CorruptionModel& cm, std::uint64_t seed);

/// Jitters every ground-truth box (center normals x/y, then one size normal
/// shared by both sides) and drops predictions. Image ids and pair keys are
/// kept so the result pairs with `d`.
Dataset perturb_layout(const Dataset& d, double pos_stddev_px, double size_stddev, std::uint64_t seed);

/// Box clipped to the image; keeps at least 1 px on each side.
BoundingBox clip_to_image(const BoundingBox& b, int width, int height);

}  // namespace ctxval
