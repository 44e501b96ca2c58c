#include "ctxval/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ctxval {

namespace fs = std::filesystem;
using nlohmann::json;

bool BoundingBox::is_valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_min < x_max && y_min < y_max;
}

BoundingBox BoundingBox::from_center(double cx, double cy, double w, double h) {
    return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

const GroundTruthObject* Dataset::find_object(ObjectId id) const {
    // Fast path: ids normally follow slot order.
    if (id.image < images.size()) {
        const auto& gt = images[id.image].ground_truth;
        if (id.index < gt.size() && gt[id.index].object_id == id) return &gt[id.index];
    }
    for (const auto& img : images)
        for (const auto& obj : img.ground_truth)
            if (obj.object_id == id) return &obj;
    return nullptr;
}

const ImageRecord& Dataset::image_of(ObjectId id) const {
    if (id.image < images.size()) {
        for (const auto& obj : images[id.image].ground_truth)
            if (obj.object_id == id) return images[id.image];
    }
    for (const auto& img : images)
        for (const auto& obj : img.ground_truth)
            if (obj.object_id == id) return img;
    throw std::out_of_range("unknown object id " + std::to_string(id.image) + "#" +
                            std::to_string(id.index));
}

std::size_t Dataset::object_count() const {
    std::size_t n = 0;
    for (const auto& img : images) n += img.ground_truth.size();
    return n;
}

bool Dataset::has_class(int class_id) const {
    return std::any_of(class_table.begin(), class_table.end(),
                       [&](const ClassId& c) { return c.id == class_id; });
}

std::string Dataset::object_label(ObjectId id) const {
    const std::string image = id.image < images.size() ? images[id.image].image_id
                                                       : std::to_string(id.image);
    return image + "#" + std::to_string(id.index);
}

void renumber_objects(Dataset& d) {
    for (std::size_t i = 0; i < d.images.size(); ++i) {
        auto& gt = d.images[i].ground_truth;
        for (std::size_t k = 0; k < gt.size(); ++k)
            gt[k].object_id = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k)};
    }
}

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DatasetError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double parse_double(std::string_view tok, const std::string& where) {
    double v = 0.0;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v))
        throw DatasetError(where + ": not a number '" + std::string(tok) + "'");
    return v;
}

int parse_class(std::string_view tok, const std::string& where) {
    int v = 0;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc{} || ptr != end || v < 0)
        throw DatasetError(where + ": bad class id '" + std::string(tok) + "'");
    return v;
}

struct LabelLine {
    int class_id;
    BoundingBox box;
    double confidence;
};

// Lines: "class cx cy w h" (labels) or "class cx cy w h conf" (predictions),
// normalized to [0,1]. '#' starts a comment.
std::vector<LabelLine> parse_label_file(const fs::path& p, const ImageRecord& img,
                                        bool with_confidence) {
    std::vector<LabelLine> out;
    std::istringstream in(read_file(p));
    std::string line;
    int line_no = 0;
    const std::size_t expected = with_confidence ? 6 : 5;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::vector<std::string> tok;
        std::istringstream ls(line);
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        const std::string where = p.string() + ":" + std::to_string(line_no);
        if (tok.size() != expected)
            throw DatasetError(where + ": expected " + std::to_string(expected) +
                               " fields, got " + std::to_string(tok.size()));
        LabelLine ll{};
        ll.class_id = parse_class(tok[0], where);
        double v[5];
        for (std::size_t i = 1; i < expected; ++i) {
            v[i - 1] = parse_double(tok[i], where);
            if (v[i - 1] < 0.0 || v[i - 1] > 1.0)
                throw DatasetError(where + ": value out of [0,1]: " + tok[i]);
        }
        if (v[2] <= 0.0 || v[3] <= 0.0) throw DatasetError(where + ": zero-area box");
        ll.box = BoundingBox::from_center(v[0] * img.width, v[1] * img.height, v[2] * img.width,
                                          v[3] * img.height);
        ll.confidence = with_confidence ? v[4] : 1.0;
        out.push_back(ll);
    }
    return out;
}

}  // namespace

Dataset load_dataset(const fs::path& root, DatasetFormat format, bool check) {
    if (format != DatasetFormat::yolo_dir) throw DatasetError("unsupported dataset format");
    const fs::path manifest_path = root / "manifest.json";
    if (!fs::exists(manifest_path)) throw DatasetError("missing manifest: " + manifest_path.string());

    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw DatasetError(manifest_path.string() + ": " + e.what());
    }

    Dataset d;
    try {
        d.name = manifest.value("name", root.filename().string());
        for (const auto& c : manifest.at("classes"))
            d.class_table.push_back({c.at("id").get<int>(), c.value("name", std::string{})});
        std::set<std::string> pair_keys;
        for (const auto& m : manifest.at("images")) {
            ImageRecord img;
            img.image_id = m.at("image_id").get<std::string>();
            img.width = m.at("width").get<int>();
            img.height = m.at("height").get<int>();
            if (m.contains("pair_key") && !m.at("pair_key").is_null()) {
                img.pair_key = m.at("pair_key").get<std::string>();
                if (check && !pair_keys.insert(*img.pair_key).second)
                    throw DatasetError("duplicate pair_key '" + *img.pair_key + "'");
            }
            if (img.image_id.empty() || img.image_id.find_first_of("/\\") != std::string::npos)
                throw DatasetError("invalid image_id '" + img.image_id + "'");
            if (img.width <= 0 || img.height <= 0)
                throw DatasetError("image " + img.image_id + ": non-positive size");
            d.images.push_back(std::move(img));
        }
    } catch (const json::exception& e) {
        throw DatasetError(manifest_path.string() + ": " + e.what());
    }

    for (std::size_t i = 0; i < d.images.size(); ++i) {
        auto& img = d.images[i];
        const fs::path label_path = root / "labels" / (img.image_id + ".txt");
        if (!fs::exists(label_path)) throw DatasetError("missing label file " + label_path.string());
        for (const auto& ll : parse_label_file(label_path, img, false)) {
            if (!d.has_class(ll.class_id))
                throw DatasetError(label_path.string() + ": unknown class id " +
                                   std::to_string(ll.class_id));
            img.ground_truth.push_back(
                {{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(img.ground_truth.size())},
                 ll.class_id,
                 ll.box});
        }
        const fs::path pred_path = root / "predictions" / (img.image_id + ".txt");
        if (!fs::exists(pred_path)) continue;
        for (const auto& ll : parse_label_file(pred_path, img, true)) {
            if (!d.has_class(ll.class_id))
                throw DatasetError(pred_path.string() + ": unknown class id " +
                                   std::to_string(ll.class_id));
            img.predictions.push_back({ll.class_id, ll.box, ll.confidence});
        }
    }

    if (!check) return d;
    if (auto violations = validate_dataset(d); !violations.empty())
        throw DatasetError(root.string() + ": " + violations.front());
    return d;
}

namespace {

void write_box_line(std::FILE* f, int class_id, const BoundingBox& b, const ImageRecord& img) {
    std::fprintf(f, "%d %.10f %.10f %.10f %.10f", class_id, b.center_x() / img.width,
                 b.center_y() / img.height, b.width() / img.width, b.height() / img.height);
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

std::unique_ptr<std::FILE, FileCloser> open_for_write(const fs::path& p) {
    std::unique_ptr<std::FILE, FileCloser> f(std::fopen(p.c_str(), "wb"));
    if (!f) throw DatasetError("cannot write " + p.string());
    return f;
}

}  // namespace

void write_dataset(const Dataset& d, const fs::path& root) {
    std::error_code ec;
    fs::create_directories(root / "labels", ec);
    fs::create_directories(root / "predictions", ec);
    if (ec) throw DatasetError("cannot create " + root.string() + ": " + ec.message());

    json manifest;
    manifest["name"] = d.name;
    manifest["classes"] = json::array();
    for (const auto& c : d.class_table) manifest["classes"].push_back({{"id", c.id}, {"name", c.name}});
    manifest["images"] = json::array();
    for (const auto& img : d.images) {
        json m = {{"image_id", img.image_id}, {"width", img.width}, {"height", img.height}};
        if (img.pair_key) m["pair_key"] = *img.pair_key;
        manifest["images"].push_back(std::move(m));

        auto labels = open_for_write(root / "labels" / (img.image_id + ".txt"));
        for (const auto& gt : img.ground_truth) {
            write_box_line(labels.get(), gt.class_id, gt.box, img);
            std::fputc('\n', labels.get());
        }
        auto preds = open_for_write(root / "predictions" / (img.image_id + ".txt"));
        for (const auto& p : img.predictions) {
            write_box_line(preds.get(), p.class_id, p.box, img);
            std::fprintf(preds.get(), " %.10f\n", p.confidence);
        }
    }
    std::ofstream out(root / "manifest.json", std::ios::binary);
    if (!out) throw DatasetError("cannot write manifest in " + root.string());
    out << manifest.dump(2) << '\n';
}

std::vector<std::string> validate_dataset(const Dataset& d) {
    std::vector<std::string> v;
    std::set<int> class_ids;
    for (const auto& c : d.class_table) {
        if (c.id < 0) v.push_back("class table: negative class id " + std::to_string(c.id));
        if (!class_ids.insert(c.id).second)
            v.push_back("class table: duplicate class id " + std::to_string(c.id));
    }

    std::set<ObjectId> ids;
    std::set<std::string> pair_keys;
    for (const auto& img : d.images) {
        const std::string where = "image " + img.image_id;
        if (img.width <= 0 || img.height <= 0) v.push_back(where + ": width/height must be positive");
        if (img.pair_key && !pair_keys.insert(*img.pair_key).second)
            v.push_back(where + ": duplicate pair_key '" + *img.pair_key + "'");
        for (const auto& gt : img.ground_truth) {
            const std::string obj = where + ": object " + d.object_label(gt.object_id);
            if (!ids.insert(gt.object_id).second) v.push_back(obj + ": duplicate object_id");
            if (!class_ids.contains(gt.class_id))
                v.push_back(obj + ": class " + std::to_string(gt.class_id) + " not in class table");
            if (!gt.box.is_valid()) {
                v.push_back(obj + ": box must be finite with positive area");
            } else if (gt.box.x_max <= 0.0 || gt.box.y_max <= 0.0 || gt.box.x_min >= img.width ||
                       gt.box.y_min >= img.height) {
                v.push_back(obj + ": box lies entirely outside the image");
            }
        }
        for (std::size_t k = 0; k < img.predictions.size(); ++k) {
            const auto& p = img.predictions[k];
            const std::string pred = where + ": prediction " + std::to_string(k);
            if (!class_ids.contains(p.class_id))
                v.push_back(pred + ": class " + std::to_string(p.class_id) + " not in class table");
            if (!p.box.is_valid()) v.push_back(pred + ": box must be finite with positive area");
            if (!(p.confidence >= 0.0 && p.confidence <= 1.0))
                v.push_back(pred + ": confidence outside [0,1]");
        }
    }
    return v;
}

namespace {

// Linear interpolation between order statistics (R type 7).
double quantile_sorted(const std::vector<double>& s, double q) {
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

DatasetSummary dataset_summary(const Dataset& d) {
    DatasetSummary s;
    s.image_count = d.images.size();
    std::vector<double> heights;
    for (const auto& img : d.images) {
        s.prediction_count += img.predictions.size();
        for (const auto& gt : img.ground_truth) {
            ++s.objects_per_class[gt.class_id];
            heights.push_back(gt.box.height());
        }
    }
    s.object_count = heights.size();
    if (!heights.empty()) {
        std::sort(heights.begin(), heights.end());
        s.box_height = HeightQuantiles{heights.front(), quantile_sorted(heights, 0.25),
                                       quantile_sorted(heights, 0.5), quantile_sorted(heights, 0.75),
                                       heights.back()};
    }
    return s;
}

}  // namespace ctxval
