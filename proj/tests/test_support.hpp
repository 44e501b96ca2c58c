// Builders for small in-memory datasets used across the unit tests.
#pragma once

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>

#include "ctxval/dataset.hpp"

namespace testutil {

struct Box {
    int cls;
    double x0, y0, x1, y1;
};

struct Pred {
    int cls;
    double x0, y0, x1, y1;
    double conf;
};

inline ctxval::ImageRecord image(const std::string& id, int w, int h, std::initializer_list<Box> gt,
                                 std::initializer_list<Pred> preds = {}) {
    ctxval::ImageRecord img;
    img.image_id = id;
    img.width = w;
    img.height = h;
    for (const auto& b : gt) img.ground_truth.push_back({{}, b.cls, {b.x0, b.y0, b.x1, b.y1}});
    for (const auto& p : preds) img.predictions.push_back({p.cls, {p.x0, p.y0, p.x1, p.y1}, p.conf});
    return img;
}

inline ctxval::Dataset dataset(const std::string& name, std::vector<ctxval::ImageRecord> images,
                               std::vector<ctxval::ClassId> classes = {{0, "red"}, {1, "green"}}) {
    ctxval::Dataset d;
    d.name = name;
    d.class_table = std::move(classes);
    d.images = std::move(images);
    ctxval::renumber_objects(d);
    return d;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::mt19937_64 salt{std::random_device{}()};
    auto p = std::filesystem::temp_directory_path() / ("ctxval_" + tag + "_" + std::to_string(salt()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testutil
