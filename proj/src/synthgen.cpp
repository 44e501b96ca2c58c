#include "ctxval/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace ctxval {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

long Rng::uniform_int(long lo, long hi) {
    const double span = static_cast<double>(hi - lo + 1);
    return lo + static_cast<long>(std::floor(uniform() * span));
}

double Rng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void ScenarioConfig::validate() const {
    if (image_width <= 0 || image_height <= 0) throw std::invalid_argument("scenario: image size must be positive");
    if (objects_min < 0 || objects_max < objects_min) throw std::invalid_argument("scenario: bad objects-per-image range");
    if (classes.empty()) throw std::invalid_argument("scenario: no classes");
    double total = 0.0;
    for (const auto& c : classes) {
        if (c.id < 0 || !(c.weight >= 0.0)) throw std::invalid_argument("scenario: bad class mix");
        total += c.weight;
    }
    if (!(total > 0.0)) throw std::invalid_argument("scenario: class weights sum to zero");
    if (box_height_min < 1 || box_height_max < box_height_min) throw std::invalid_argument("scenario: bad box height range");
    if (!(aspect > 0.0)) throw std::invalid_argument("scenario: aspect must be positive");
    if (!(min_separation >= 0.0)) throw std::invalid_argument("scenario: separation must be >= 0");
    if (placement == Placement::clustered && (clusters_per_image < 1 || !(cluster_radius >= 0.0)))
        throw std::invalid_argument("scenario: bad cluster parameters");
}

namespace {

constexpr int kMaxAttempts = 10000;

int pick_class(const std::vector<ClassMix>& classes, double u) {
    double total = 0.0;
    for (const auto& c : classes) total += c.weight;
    double acc = 0.0;
    for (const auto& c : classes) {
        acc += c.weight / total;
        if (u < acc) return c.id;
    }
    return classes.back().id;
}

bool separated(const BoundingBox& a, const BoundingBox& b, double sep) {
    const double gap_x = std::max(a.x_min - b.x_max, b.x_min - a.x_max);
    const double gap_y = std::max(a.y_min - b.y_max, b.y_min - a.y_max);
    return gap_x >= sep || gap_y >= sep;
}

std::string image_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "img_%05zu", i);
    return buf;
}

}  // namespace

GeneratedDataset generate_dataset(const ScenarioConfig& sc, std::uint64_t seed) {
    sc.validate();
    Rng rng(seed);
    GeneratedDataset out;
    Dataset& d = out.dataset;
    d.name = sc.name;
    for (const auto& c : sc.classes) d.class_table.push_back({c.id, c.name});

    std::size_t requested = 0;
    std::size_t placed = 0;
    for (std::size_t i = 0; i < sc.images; ++i) {
        ImageRecord img;
        img.image_id = image_name(i);
        img.pair_key = img.image_id;
        img.width = sc.image_width;
        img.height = sc.image_height;

        const long n = rng.uniform_int(sc.objects_min, sc.objects_max);
        std::vector<std::pair<double, double>> clusters;
        if (sc.placement == Placement::clustered)
            for (int k = 0; k < sc.clusters_per_image; ++k) {
                const auto cx = static_cast<double>(rng.uniform_int(0, sc.image_width - 1));
                const auto cy = static_cast<double>(rng.uniform_int(0, sc.image_height - 1));
                clusters.emplace_back(cx, cy);
            }

        for (long k = 0; k < n; ++k) {
            ++requested;
            const int cls = pick_class(sc.classes, rng.uniform());
            bool ok = false;
            for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
                const long h = rng.uniform_int(sc.box_height_min, sc.box_height_max);
                const long w = std::max(1L, std::lround(static_cast<double>(h) * sc.aspect));
                long x0 = 0;
                long y0 = 0;
                if (sc.placement == Placement::uniform) {
                    x0 = rng.uniform_int(0, sc.image_width - w);
                    y0 = rng.uniform_int(0, sc.image_height - h);
                } else {
                    const auto& [cx, cy] = clusters[static_cast<std::size_t>(
                        rng.uniform_int(0, sc.clusters_per_image - 1))];
                    const double r = sc.cluster_radius * std::sqrt(rng.uniform());
                    const double a = 2.0 * std::numbers::pi * rng.uniform();
                    x0 = std::lround(cx + r * std::cos(a) - 0.5 * static_cast<double>(w));
                    y0 = std::lround(cy + r * std::sin(a) - 0.5 * static_cast<double>(h));
                }
                if (x0 < 0 || y0 < 0 || x0 + w > sc.image_width || y0 + h > sc.image_height) continue;
                const BoundingBox box{static_cast<double>(x0), static_cast<double>(y0),
                                      static_cast<double>(x0 + w), static_cast<double>(y0 + h)};
                ok = std::all_of(img.ground_truth.begin(), img.ground_truth.end(),
                                 [&](const GroundTruthObject& g) { return separated(g.box, box, sc.min_separation); });
                if (ok) img.ground_truth.push_back({{}, cls, box});
            }
            if (ok) ++placed;
            else ++out.skipped_objects;
        }
        d.images.push_back(std::move(img));
    }
    if (requested > 0 && placed == 0)
        throw std::invalid_argument("scenario: no object could be placed under the given constraints");
    renumber_objects(d);
    return out;
}

double CorruptionModel::miss_for(int class_id) const {
    auto it = miss_probability.find(class_id);
    return it == miss_probability.end() ? default_miss : it->second;
}

void CorruptionModel::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    for (const auto& [cls, p] : miss_probability)
        if (!prob(p)) throw std::invalid_argument("corruption: miss probability outside [0,1]");
    if (!prob(default_miss) || !prob(class_confusion)) throw std::invalid_argument("corruption: probability outside [0,1]");
    if (!(center_jitter_px >= 0.0) || !(size_jitter >= 0.0)) throw std::invalid_argument("corruption: stddev must be >= 0");
    if (!(false_positive_rate >= 0.0)) throw std::invalid_argument("corruption: false-positive rate must be >= 0");
    if (!prob(confidence_min) || !prob(confidence_max) || confidence_max < confidence_min)
        throw std::invalid_argument("corruption: bad confidence range");
}

BoundingBox clip_to_image(const BoundingBox& b, int width, int height) {
    const auto W = static_cast<double>(width);
    const auto H = static_cast<double>(height);
    auto clip_axis = [](double lo, double hi, double limit) {
        lo = std::clamp(lo, 0.0, limit);
        hi = std::clamp(hi, 0.0, limit);
        if (hi - lo < 1.0) {
            const double mid = std::clamp(0.5 * (lo + hi), 0.5, limit - 0.5);
            lo = mid - 0.5;
            hi = mid + 0.5;
        }
        return std::pair{lo, hi};
    };
    const auto [x0, x1] = clip_axis(b.x_min, b.x_max, W);
    const auto [y0, y1] = clip_axis(b.y_min, b.y_max, H);
    return {x0, y0, x1, y1};
}

Dataset synthesize_predictions(const Dataset& d, const CorruptionModel& cm, std::uint64_t seed) {
    cm.validate();
    Rng rng(seed);
    Dataset out = d;
    std::vector<int> class_ids;
    for (const auto& c : d.class_table) class_ids.push_back(c.id);

    for (auto& img : out.images) {
        img.predictions.clear();
        for (const auto& g : img.ground_truth) {
            const double u_miss = rng.uniform();
            const double u_confuse = rng.uniform();
            const double u_class = rng.uniform();
            const double n_cx = rng.normal();
            const double n_cy = rng.normal();
            const double n_w = rng.normal();
            const double n_h = rng.normal();
            const double u_conf = rng.uniform();
            if (u_miss < cm.miss_for(g.class_id)) continue;

            int cls = g.class_id;
            if (u_confuse < cm.class_confusion && class_ids.size() > 1) {
                std::vector<int> others;
                for (int c : class_ids)
                    if (c != g.class_id) others.push_back(c);
                cls = others[std::min(others.size() - 1, static_cast<std::size_t>(u_class * static_cast<double>(others.size())))];
            }
            const double w = std::max(1.0, g.box.width() * (1.0 + cm.size_jitter * n_w));
            const double h = std::max(1.0, g.box.height() * (1.0 + cm.size_jitter * n_h));
            const BoundingBox box = BoundingBox::from_center(g.box.center_x() + cm.center_jitter_px * n_cx,
                                                             g.box.center_y() + cm.center_jitter_px * n_cy, w, h);
            const double conf = cm.confidence_min + u_conf * (cm.confidence_max - cm.confidence_min);
            img.predictions.push_back({cls, clip_to_image(box, img.width, img.height), conf});
        }

        const double u_fp = rng.uniform();
        const double whole = std::floor(cm.false_positive_rate);
        const auto n_fp = static_cast<long>(whole) + (u_fp < cm.false_positive_rate - whole ? 1 : 0);
        for (long k = 0; k < n_fp; ++k) {
            const int cls = class_ids[std::min(class_ids.size() - 1,
                                               static_cast<std::size_t>(rng.uniform() * static_cast<double>(class_ids.size())))];
            const long h = rng.uniform_int(8, std::max(8, img.height / 8));
            const long w = std::max(1L, std::lround(0.75 * static_cast<double>(h)));
            const long x0 = rng.uniform_int(0, std::max(0L, img.width - w));
            const long y0 = rng.uniform_int(0, std::max(0L, img.height - h));
            const double conf = cm.confidence_min + rng.uniform() * (cm.confidence_max - cm.confidence_min);
            const BoundingBox box{static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x0 + w),
                                  static_cast<double>(y0 + h)};
            img.predictions.push_back({cls, clip_to_image(box, img.width, img.height), conf});
        }
    }
    return out;
}

Dataset perturb_layout(const Dataset& d, double pos_stddev_px, double size_stddev, std::uint64_t seed) {
    if (!(pos_stddev_px >= 0.0) || !(size_stddev >= 0.0)) throw std::invalid_argument("perturb: stddev must be >= 0");
    Rng rng(seed);
    Dataset out = d;
    out.name = d.name + "_perturbed";
    for (auto& img : out.images) {
        img.predictions.clear();
        for (auto& g : img.ground_truth) {
            const double dx = rng.normal();
            const double dy = rng.normal();
            const double ds = rng.normal();
            if (pos_stddev_px == 0.0 && size_stddev == 0.0) continue;
            const double scale = std::max(0.05, 1.0 + size_stddev * ds);
            const BoundingBox moved = BoundingBox::from_center(g.box.center_x() + pos_stddev_px * dx,
                                                               g.box.center_y() + pos_stddev_px * dy,
                                                               g.box.width() * scale, g.box.height() * scale);
            g.box = clip_to_image(moved, img.width, img.height);
        }
    }
    return out;
}

}  // namespace ctxval
