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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ctxroute/clustering.hpp"

namespace ctxroute {

/// Where a layer's input channels come from. A layer with no declared inputs
/// reads the previous layer, or the backbone (width = in_channels) if it is
/// the first layer.
struct LayerInput {
    enum class Kind { backbone, layer };
    Kind kind = Kind::backbone;
    std::int64_t width = 0;   // backbone feed width
    std::size_t layer = 0;    // index of an earlier layer

    friend bool operator==(const LayerInput&, const LayerInput&) = default;
};

/// What a prediction layer emits per anchor.
enum class PredictionOutputs { classes_and_box, classes, box };

struct LayerSpec {
    std::string name;
    std::int64_t kernel = 1;
    std::int64_t in_channels = 1;
    std::int64_t out_channels = 1;
    std::int64_t spatial_elements = 0;  // H*W summed over the levels it runs at
    bool scale_in = false;
    bool scale_out = true;
    bool is_prediction = false;
    PredictionOutputs outputs = PredictionOutputs::classes_and_box;
    std::vector<LayerInput> inputs;
    std::vector<std::size_t> levels;  // template level indices, used by instantiate()

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct PyramidLevel {
    std::int64_t stride = 0;  // 0 if height/width are fixed
    std::int64_t height = 0;
    std::int64_t width = 0;

    friend bool operator==(const PyramidLevel&, const PyramidLevel&) = default;
};

/// Parameter/MAC totals of a fixed network part (backbone, controller).
struct FixedCost {
    std::int64_t params = 0;
    std::int64_t macs = 0;

    friend bool operator==(const FixedCost&, const FixedCost&) = default;
};

struct HeadTemplate {
    std::string name;
    std::int64_t native_classes = 0;
    std::int64_t anchors_per_cell = 1;
    std::int64_t box_fields = 5;
    std::vector<PyramidLevel> levels;
    std::vector<LayerSpec> layers;

    // Optional surroundings of the head, with MACs quoted at
    // reference_image_size.
    std::int64_t reference_image_size = 0;
    FixedCost backbone;
    FixedCost controller;

    /// Throws SchemaError if a channel chain or prediction width is inconsistent.
    void validate() const;
};

HeadTemplate template_from_json(const nlohmann::json& doc);
nlohmann::json template_to_json(const HeadTemplate& head);
HeadTemplate load_template(const std::filesystem::path& path);

/// Resolves level grids (ceil(image_size / stride)) and per-layer
/// spatial_elements for an input resolution. Backbone and controller MACs
/// scale with the pixel count relative to reference_image_size.
HeadTemplate instantiate(const HeadTemplate& head, std::int64_t image_size);

/// served / total, kept as an exact fraction so channel rounding never
/// depends on binary floating point.
struct CompressionFactor {
    std::int64_t served = 1;
    std::int64_t total = 1;

    double value() const { return static_cast<double>(served) / static_cast<double>(total); }
    /// ceil(value() * channels), at least 1.
    std::int64_t scale(std::int64_t channels) const;
};

/// Throws ParameterError unless 0 < branch_classes <= total_classes.
CompressionFactor compression_factor(std::int64_t branch_classes, std::int64_t total_classes);

struct BranchPlan {
    std::size_t branch_id = 0;
    std::vector<std::size_t> classes;  // category indices served by the branch
    double factor = 1.0;
    std::int64_t num_classes = 0;
    std::vector<LayerSpec> layers;
    std::int64_t params = 0;
    std::int64_t macs = 0;
};

/// Same layer count; scaled channel widths; prediction layers sized from
/// num_classes; inputs re-derived from the compressed producers.
/// Throws ParameterError for num_classes < 1.
BranchPlan compress_template(const HeadTemplate& head, const CompressionFactor& factor,
                             std::int64_t num_classes);

/// Real-valued factor in (0, 1]; rounding uses a 1e-9 grid. Throws
/// ParameterError outside (0, 1].
BranchPlan compress_template(const HeadTemplate& head, double factor, std::int64_t num_classes);

/// Sum of kernel^2 * in * out + out (weights plus bias).
std::int64_t count_params(std::span<const LayerSpec> layers);

/// Sum of kernel^2 * in * out * spatial_elements; biases excluded.
std::int64_t count_macs(std::span<const LayerSpec> layers);

/// One branch per cluster, factor = |served| / n_categories.
std::vector<BranchPlan> plan_branches(const ClusterAssignment& assignment, const HeadTemplate& head);

/// Layer inputs are written as {"layer": <index>} or {"backbone": <width>}.
nlohmann::json layer_to_json(const LayerSpec& layer);

/// Accepts {"layer": <index or name of an earlier layer>}; `earlier` holds
/// the names of layers 0..index-1.
LayerSpec layer_from_json(const nlohmann::json& doc, std::size_t index, const std::vector<std::string>& earlier);

}  // namespace ctxroute
