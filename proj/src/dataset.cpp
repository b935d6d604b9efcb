// Copyright 2026 The ctxroute Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ctxroute/dataset.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "ctxroute/error.hpp"
#include "ctxroute/io.hpp"

namespace ctxroute {

using nlohmann::json;

namespace {

std::string describe(std::string_view array, std::size_t index, const json& record) {
    std::string text = std::string(array) + "[" + std::to_string(index) + "]";
    if (record.is_object() && record.contains("id") && record["id"].is_number_integer()) {
        text += " (id " + std::to_string(record["id"].get<std::int64_t>()) + ")";
    }
    return text;
}

const json& require_key(const json& record, const char* key, const std::string& where) {
    if (!record.is_object()) throw SchemaError(where + ": expected an object");
    auto it = record.find(key);
    if (it == record.end()) throw SchemaError(where + ": missing required key '" + key + "'");
    return *it;
}

std::int64_t require_integer(const json& record, const char* key, const std::string& where) {
    const json& value = require_key(record, key, where);
    if (!value.is_number_integer()) throw SchemaError(where + ": '" + key + "' must be an integer");
    return value.get<std::int64_t>();
}

const json& require_array(const json& doc, const char* key) {
    if (!doc.is_object()) throw SchemaError("annotation file: top level must be an object");
    auto it = doc.find(key);
    if (it == doc.end()) throw SchemaError("annotation file: missing required key '" + std::string(key) + "'");
    if (!it->is_array()) throw SchemaError("annotation file: '" + std::string(key) + "' must be an array");
    return *it;
}

std::array<double, 4> parse_bbox(const json& value, const std::string& where) {
    if (!value.is_array() || value.size() != 4) throw SchemaError(where + ": 'bbox' must be an array of 4 numbers");
    std::array<double, 4> bbox{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (!value[i].is_number()) throw SchemaError(where + ": 'bbox' must be an array of 4 numbers");
        bbox[i] = value[i].get<double>();
    }
    if (!(bbox[2] > 0.0) || !(bbox[3] > 0.0)) {
        throw SchemaError(where + ": bbox width and height must be positive");
    }
    return bbox;
}

}  // namespace

Dataset::Dataset(std::vector<Category> categories, std::vector<ImageRecord> images)
    : categories_(std::move(categories)), images_(std::move(images)) {
    std::stable_sort(categories_.begin(), categories_.end(),
                     [](const Category& a, const Category& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        if (!index_.emplace(categories_[i].id, i).second) {
            throw SchemaError("duplicate category id " + std::to_string(categories_[i].id));
        }
    }
    std::stable_sort(images_.begin(), images_.end(),
                     [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
    for (std::size_t i = 0; i < images_.size(); ++i) {
        if (i > 0 && images_[i].image_id == images_[i - 1].image_id) {
            throw SchemaError("duplicate image id " + std::to_string(images_[i].image_id));
        }
        for (const Instance& inst : images_[i].instances) {
            if (!index_.contains(inst.category_id)) {
                throw SchemaError("image " + std::to_string(images_[i].image_id) + ": unknown category_id " +
                                  std::to_string(inst.category_id));
            }
            if (!(inst.bbox[2] > 0.0) || !(inst.bbox[3] > 0.0)) {
                throw SchemaError("image " + std::to_string(images_[i].image_id) +
                                  ": bbox width and height must be positive");
            }
        }
    }
}

std::size_t Dataset::category_index(std::int64_t category_id) const {
    auto it = index_.find(category_id);
    if (it == index_.end()) throw SchemaError("unknown category_id " + std::to_string(category_id));
    return it->second;
}

std::optional<std::size_t> Dataset::find_category_index(std::int64_t category_id) const {
    auto it = index_.find(category_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> Dataset::find_category_by_name(std::string_view name) const {
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        if (categories_[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<std::string> Dataset::category_names() const {
    std::vector<std::string> names;
    names.reserve(categories_.size());
    for (const Category& c : categories_) names.push_back(c.name);
    return names;
}

Dataset parse_annotations(const json& doc) {
    const json& cats = require_array(doc, "categories");
    const json& imgs = require_array(doc, "images");
    const json& anns = require_array(doc, "annotations");

    std::vector<Category> categories;
    std::unordered_set<std::int64_t> category_ids;
    for (std::size_t i = 0; i < cats.size(); ++i) {
        const std::string where = describe("categories", i, cats[i]);
        Category c;
        c.id = require_integer(cats[i], "id", where);
        const json& name = require_key(cats[i], "name", where);
        if (!name.is_string()) throw SchemaError(where + ": 'name' must be a string");
        c.name = name.get<std::string>();
        if (!category_ids.insert(c.id).second) throw SchemaError(where + ": duplicate category id");
        categories.push_back(std::move(c));
    }

    std::map<std::int64_t, ImageRecord> by_id;
    for (std::size_t i = 0; i < imgs.size(); ++i) {
        const std::string where = describe("images", i, imgs[i]);
        const std::int64_t id = require_integer(imgs[i], "id", where);
        if (!by_id.emplace(id, ImageRecord{id, {}}).second) throw SchemaError(where + ": duplicate image id");
    }

    for (std::size_t i = 0; i < anns.size(); ++i) {
        const std::string where = describe("annotations", i, anns[i]);
        const std::int64_t image_id = require_integer(anns[i], "image_id", where);
        const std::int64_t category_id = require_integer(anns[i], "category_id", where);
        const auto bbox = parse_bbox(require_key(anns[i], "bbox", where), where);
        auto image = by_id.find(image_id);
        if (image == by_id.end()) {
            throw SchemaError(where + ": image_id " + std::to_string(image_id) + " is not listed in 'images'");
        }
        if (!category_ids.contains(category_id)) {
            throw SchemaError(where + ": unknown category_id " + std::to_string(category_id));
        }
        image->second.instances.push_back(Instance{category_id, bbox});
    }

    std::vector<ImageRecord> images;
    images.reserve(by_id.size());
    for (auto& [id, record] : by_id) images.push_back(std::move(record));
    return Dataset(std::move(categories), std::move(images));
}

Dataset load_annotations(const std::filesystem::path& path) { return parse_annotations(io::read_json(path)); }

json to_coco_json(const Dataset& dataset) {
    json categories = json::array();
    for (const Category& c : dataset.categories()) categories.push_back({{"id", c.id}, {"name", c.name}});
    json images = json::array();
    json annotations = json::array();
    std::int64_t next_id = 1;
    for (const ImageRecord& image : dataset.images()) {
        images.push_back({{"id", image.image_id}});
        for (const Instance& inst : image.instances) {
            annotations.push_back({{"id", next_id++},
                                   {"image_id", image.image_id},
                                   {"category_id", inst.category_id},
                                   {"bbox", inst.bbox}});
        }
    }
    return {{"categories", std::move(categories)}, {"images", std::move(images)}, {"annotations", std::move(annotations)}};
}

json to_snapshot_json(const Dataset& dataset) {
    json categories = json::array();
    for (const Category& c : dataset.categories()) categories.push_back({{"id", c.id}, {"name", c.name}});
    json images = json::array();
    for (const ImageRecord& image : dataset.images()) {
        json instances = json::array();
        for (const Instance& inst : image.instances) {
            instances.push_back({inst.category_id, inst.bbox[0], inst.bbox[1], inst.bbox[2], inst.bbox[3]});
        }
        images.push_back({{"id", image.image_id}, {"instances", std::move(instances)}});
    }
    return {{"format", kDatasetFormat},
            {"version", kDatasetFormatVersion},
            {"categories", std::move(categories)},
            {"images", std::move(images)}};
}

Dataset from_snapshot_json(const json& doc) {
    if (!doc.is_object() || doc.value("format", "") != kDatasetFormat) {
        throw SchemaError("not a dataset snapshot (format key missing or wrong)");
    }
    if (doc.value("version", 0) != kDatasetFormatVersion) {
        throw SchemaError("unsupported dataset snapshot version " + doc.value("version", json(0)).dump());
    }
    std::vector<Category> categories;
    for (std::size_t i = 0; i < doc.at("categories").size(); ++i) {
        const json& c = doc["categories"][i];
        const std::string where = describe("categories", i, c);
        const json& name = require_key(c, "name", where);
        if (!name.is_string()) throw SchemaError(where + ": 'name' must be a string");
        categories.push_back({require_integer(c, "id", where), name.get<std::string>()});
    }
    std::vector<ImageRecord> images;
    for (std::size_t i = 0; i < doc.at("images").size(); ++i) {
        const json& img = doc["images"][i];
        const std::string where = describe("images", i, img);
        ImageRecord record{require_integer(img, "id", where), {}};
        for (const json& inst : require_key(img, "instances", where)) {
            if (!inst.is_array() || inst.size() != 5 || !inst[0].is_number_integer()) {
                throw SchemaError(where + ": instance must be [category_id, x, y, w, h]");
            }
            record.instances.push_back(
                Instance{inst[0].get<std::int64_t>(),
                         {inst[1].get<double>(), inst[2].get<double>(), inst[3].get<double>(), inst[4].get<double>()}});
        }
        images.push_back(std::move(record));
    }
    return Dataset(std::move(categories), std::move(images));
}

Dataset load_dataset(const std::filesystem::path& path) {
    const json doc = io::read_json(path);
    if (doc.is_object() && doc.contains("format")) return from_snapshot_json(doc);
    return parse_annotations(doc);
}

}  // namespace ctxroute
