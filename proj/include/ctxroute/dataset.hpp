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
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace ctxroute {

struct Category {
    std::int64_t id = 0;
    std::string name;

    friend bool operator==(const Category&, const Category&) = default;
};

struct Instance {
    std::int64_t category_id = 0;
    std::array<double, 4> bbox{};  // x, y, width, height in pixels

    friend bool operator==(const Instance&, const Instance&) = default;
};

struct ImageRecord {
    std::int64_t image_id = 0;
    std::vector<Instance> instances;

    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Normalized annotation set: categories sorted by id, images sorted by id,
/// every instance referring to a known category.
class Dataset {
public:
    Dataset() = default;

    /// Validates and normalizes; throws SchemaError on any violated invariant.
    Dataset(std::vector<Category> categories, std::vector<ImageRecord> images);

    const std::vector<Category>& categories() const { return categories_; }
    const std::vector<ImageRecord>& images() const { return images_; }

    std::size_t num_categories() const { return categories_.size(); }
    std::size_t num_images() const { return images_.size(); }

    /// Dense index of a category id; throws SchemaError for unknown ids.
    std::size_t category_index(std::int64_t category_id) const;
    std::optional<std::size_t> find_category_index(std::int64_t category_id) const;
    std::optional<std::size_t> find_category_by_name(std::string_view name) const;

    std::vector<std::string> category_names() const;

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.categories_ == b.categories_ && a.images_ == b.images_;
    }

private:
    std::vector<Category> categories_;
    std::vector<ImageRecord> images_;
    std::unordered_map<std::int64_t, std::size_t> index_;
};

/// Parses the COCO subset: categories[{id,name}], images[{id}],
/// annotations[{image_id,category_id,bbox}]. Everything else is ignored.
Dataset parse_annotations(const nlohmann::json& doc);
Dataset load_annotations(const std::filesystem::path& path);

/// Writes the dataset back in the same COCO subset (annotation ids are
/// assigned sequentially).
nlohmann::json to_coco_json(const Dataset& dataset);

// Versioned snapshot used as the ingest cache.
inline constexpr std::string_view kDatasetFormat = "ctxroute.dataset";
inline constexpr int kDatasetFormatVersion = 1;

nlohmann::json to_snapshot_json(const Dataset& dataset);
Dataset from_snapshot_json(const nlohmann::json& doc);

/// Loads either a snapshot or a raw COCO file, detected by the "format" key.
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace ctxroute
