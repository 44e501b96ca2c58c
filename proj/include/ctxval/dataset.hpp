// Labeled detection datasets: geometry types, yolo_dir loading/writing,
// validation, and summaries.
#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctxval {

/// Axis-aligned box in continuous pixel coordinates (origin top-left, y down).
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x_min + x_max); }
    double center_y() const { return 0.5 * (y_min + y_max); }

    /// Finite coordinates and strictly positive extent on both axes.
    bool is_valid() const;

    static BoundingBox from_center(double cx, double cy, double w, double h);

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct ClassId {
    int id = 0;
    std::string name;

    friend bool operator==(const ClassId&, const ClassId&) = default;
};

/// Identifies a ground-truth object by its image slot and its line order
/// within that image. Ordering is (image, index).
struct ObjectId {
    std::uint32_t image = 0;
    std::uint32_t index = 0;

    friend auto operator<=>(const ObjectId&, const ObjectId&) = default;
};

struct GroundTruthObject {
    ObjectId object_id;
    int class_id = 0;
    BoundingBox box;
};

struct Prediction {
    int class_id = 0;
    BoundingBox box;
    double confidence = 1.0;
};

struct ImageRecord {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<GroundTruthObject> ground_truth;
    std::vector<Prediction> predictions;
    std::optional<std::string> pair_key;
};

struct Dataset {
    std::string name;
    std::vector<ClassId> class_table;
    std::vector<ImageRecord> images;

    const GroundTruthObject* find_object(ObjectId id) const;
    const ImageRecord& image_of(ObjectId id) const;
    std::size_t object_count() const;
    bool has_class(int class_id) const;
    /// "<image_id>#<index>", the form used in reports.
    std::string object_label(ObjectId id) const;
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DatasetFormat { yolo_dir };

/// Reads `<root>/manifest.json`, `<root>/labels/<image_id>.txt` and the
/// optional `<root>/predictions/<image_id>.txt`. Throws DatasetError on any
/// malformed input. With `check` set (the default) the result also passes
/// validate_dataset(); otherwise invariant violations are left for the caller.
Dataset load_dataset(const std::filesystem::path& root,
                     DatasetFormat format = DatasetFormat::yolo_dir, bool check = true);

/// Writes `d` in yolo_dir layout. Normalized values carry 10 decimals, so a
/// reload reproduces pixel coordinates to well under 1e-6 px.
void write_dataset(const Dataset& d, const std::filesystem::path& root);

/// Reassigns object ids to (image slot, position) order.
void renumber_objects(Dataset& d);

std::vector<std::string> validate_dataset(const Dataset& d);

struct HeightQuantiles {
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

struct DatasetSummary {
    std::size_t image_count = 0;
    std::size_t object_count = 0;
    std::size_t prediction_count = 0;
    std::map<int, std::size_t> objects_per_class;
    std::optional<HeightQuantiles> box_height;
};

DatasetSummary dataset_summary(const Dataset& d);

}  // namespace ctxval
