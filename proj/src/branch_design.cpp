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

#include "ctxroute/branch_design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctxroute/error.hpp"
#include "ctxroute/io.hpp"

namespace ctxroute {

using nlohmann::json;

namespace {

std::string_view outputs_name(PredictionOutputs outputs) {
    switch (outputs) {
        case PredictionOutputs::classes_and_box: return "classes_and_box";
        case PredictionOutputs::classes: return "classes";
        case PredictionOutputs::box: return "box";
    }
    return "classes_and_box";
}

PredictionOutputs parse_outputs(const std::string& text, const std::string& where) {
    if (text == "classes_and_box") return PredictionOutputs::classes_and_box;
    if (text == "classes") return PredictionOutputs::classes;
    if (text == "box") return PredictionOutputs::box;
    throw SchemaError(where + ": unknown prediction outputs '" + text + "'");
}

std::int64_t prediction_width(PredictionOutputs outputs, std::int64_t anchors, std::int64_t classes,
                              std::int64_t box_fields) {
    switch (outputs) {
        case PredictionOutputs::classes_and_box: return anchors * (classes + box_fields);
        case PredictionOutputs::classes: return anchors * classes;
        case PredictionOutputs::box: return anchors * box_fields;
    }
    return 0;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::string layer_where(const HeadTemplate& head, std::size_t i) {
    return "template '" + head.name + "' layer " + std::to_string(i) + " ('" + head.layers[i].name + "')";
}

}  // namespace

void HeadTemplate::validate() const {
    if (native_classes < 1) throw SchemaError("template '" + name + "': native_classes must be >= 1");
    if (anchors_per_cell < 1) throw SchemaError("template '" + name + "': anchors_per_cell must be >= 1");
    if (box_fields < 0) throw SchemaError("template '" + name + "': box_fields must be >= 0");
    if (layers.empty()) throw SchemaError("template '" + name + "': no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& layer = layers[i];
        const std::string where = layer_where(*this, i);
        if (layer.kernel < 1 || layer.in_channels < 1 || layer.out_channels < 1) {
            throw SchemaError(where + ": kernel and channel counts must be >= 1");
        }
        if (layer.spatial_elements < 0) throw SchemaError(where + ": spatial_elements must be >= 0");
        if (layer.is_prediction) {
            if (layer.scale_out) throw SchemaError(where + ": a prediction layer cannot scale its output");
            const auto expected = prediction_width(layer.outputs, anchors_per_cell, native_classes, box_fields);
            if (layer.out_channels != expected) {
                throw SchemaError(where + ": prediction width " + std::to_string(layer.out_channels) +
                                  " != anchors * outputs = " + std::to_string(expected));
            }
        }
        std::int64_t fed = 0;
        if (layer.inputs.empty()) {
            fed = i == 0 ? layer.in_channels : layers[i - 1].out_channels;
        } else {
            for (const LayerInput& input : layer.inputs) {
                if (input.kind == LayerInput::Kind::layer) {
                    if (input.layer >= i) throw SchemaError(where + ": input must refer to an earlier layer");
                    fed += layers[input.layer].out_channels;
                } else {
                    if (input.width < 1) throw SchemaError(where + ": backbone feed width must be >= 1");
                    fed += input.width;
                }
            }
        }
        if (fed != layer.in_channels) {
            throw SchemaError(where + ": in_channels " + std::to_string(layer.in_channels) +
                              " does not match its inputs (" + std::to_string(fed) + ")");
        }
        for (std::size_t level : layer.levels) {
            if (level >= levels.size()) throw SchemaError(where + ": level index out of range");
        }
    }
}

json layer_to_json(const LayerSpec& layer) {
    json doc = {{"name", layer.name},
                {"kernel", layer.kernel},
                {"in_channels", layer.in_channels},
                {"out_channels", layer.out_channels},
                {"spatial_elements", layer.spatial_elements},
                {"scale_in", layer.scale_in},
                {"scale_out", layer.scale_out},
                {"is_prediction", layer.is_prediction}};
    if (layer.is_prediction) doc["outputs"] = outputs_name(layer.outputs);
    if (!layer.inputs.empty()) {
        json inputs = json::array();
        for (const LayerInput& input : layer.inputs) {
            if (input.kind == LayerInput::Kind::layer) {
                inputs.push_back({{"layer", input.layer}});
            } else {
                inputs.push_back({{"backbone", input.width}});
            }
        }
        doc["inputs"] = std::move(inputs);
    }
    if (!layer.levels.empty()) doc["levels"] = layer.levels;
    return doc;
}

LayerSpec layer_from_json(const json& doc, std::size_t index, const std::vector<std::string>& earlier) {
    const std::string where = "layers[" + std::to_string(index) + "]";
    if (!doc.is_object()) throw SchemaError(where + ": expected an object");
    LayerSpec layer;
    try {
        layer.name = doc.value("name", "layer" + std::to_string(index));
        layer.kernel = doc.at("kernel").get<std::int64_t>();
        layer.in_channels = doc.at("in_channels").get<std::int64_t>();
        layer.out_channels = doc.at("out_channels").get<std::int64_t>();
        layer.spatial_elements = doc.value("spatial_elements", std::int64_t{0});
        layer.scale_in = doc.value("scale_in", false);
        layer.is_prediction = doc.value("is_prediction", false);
        layer.scale_out = doc.value("scale_out", !layer.is_prediction);
        if (layer.is_prediction) layer.outputs = parse_outputs(doc.value("outputs", "classes_and_box"), where);
        if (doc.contains("levels")) layer.levels = doc["levels"].get<std::vector<std::size_t>>();
        if (doc.contains("inputs")) {
            for (const json& input : doc["inputs"]) {
                LayerInput parsed;
                if (input.contains("backbone")) {
                    parsed.kind = LayerInput::Kind::backbone;
                    parsed.width = input["backbone"].get<std::int64_t>();
                } else if (input.contains("layer") && input["layer"].is_string()) {
                    const auto name = input["layer"].get<std::string>();
                    auto it = std::find(earlier.begin(), earlier.end(), name);
                    if (it == earlier.end()) throw SchemaError(where + ": input layer '" + name + "' is not an earlier layer");
                    parsed.kind = LayerInput::Kind::layer;
                    parsed.layer = static_cast<std::size_t>(it - earlier.begin());
                } else if (input.contains("layer")) {
                    parsed.kind = LayerInput::Kind::layer;
                    parsed.layer = input["layer"].get<std::size_t>();
                } else {
                    throw SchemaError(where + ": input must have a 'layer' or 'backbone' key");
                }
                layer.inputs.push_back(parsed);
            }
        }
    } catch (const json::exception& e) {
        throw SchemaError(where + ": " + e.what());
    }
    return layer;
}

HeadTemplate template_from_json(const json& doc) {
    if (!doc.is_object()) throw SchemaError("template: top level must be an object");
    HeadTemplate head;
    try {
        head.name = doc.value("name", "template");
        head.native_classes = doc.at("native_classes").get<std::int64_t>();
        head.anchors_per_cell = doc.at("anchors_per_cell").get<std::int64_t>();
        head.box_fields = doc.at("box_fields").get<std::int64_t>();
        head.reference_image_size = doc.value("reference_image_size", std::int64_t{0});
        if (doc.contains("backbone")) {
            head.backbone = {doc["backbone"].at("params").get<std::int64_t>(), doc["backbone"].at("macs").get<std::int64_t>()};
        }
        if (doc.contains("controller")) {
            head.controller = {doc["controller"].at("params").get<std::int64_t>(),
                               doc["controller"].at("macs").get<std::int64_t>()};
        }
        for (const json& level : doc.value("levels", json::array())) {
            head.levels.push_back({level.value("stride", std::int64_t{0}), level.value("height", std::int64_t{0}),
                                   level.value("width", std::int64_t{0})});
        }
        std::vector<std::string> names;
        const json& layers = doc.at("layers");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            head.layers.push_back(layer_from_json(layers[i], i, names));
            names.push_back(head.layers.back().name);
        }
    } catch (const json::exception& e) {
        throw SchemaError("template: " + std::string(e.what()));
    }
    head.validate();
    return head;
}

json template_to_json(const HeadTemplate& head) {
    json levels = json::array();
    for (const PyramidLevel& level : head.levels) {
        json l = json::object();
        if (level.stride > 0) l["stride"] = level.stride;
        if (level.height > 0) l["height"] = level.height;
        if (level.width > 0) l["width"] = level.width;
        levels.push_back(std::move(l));
    }
    json layers = json::array();
    for (const LayerSpec& layer : head.layers) layers.push_back(layer_to_json(layer));
    return {{"name", head.name},
            {"native_classes", head.native_classes},
            {"anchors_per_cell", head.anchors_per_cell},
            {"box_fields", head.box_fields},
            {"reference_image_size", head.reference_image_size},
            {"backbone", {{"params", head.backbone.params}, {"macs", head.backbone.macs}}},
            {"controller", {{"params", head.controller.params}, {"macs", head.controller.macs}}},
            {"levels", std::move(levels)},
            {"layers", std::move(layers)}};
}

HeadTemplate load_template(const std::filesystem::path& path) { return template_from_json(io::read_json(path)); }

HeadTemplate instantiate(const HeadTemplate& head, std::int64_t image_size) {
    if (image_size < 1) throw ParameterError("image size must be >= 1");
    HeadTemplate out = head;
    for (PyramidLevel& level : out.levels) {
        if (level.stride > 0) {
            level.height = level.width = ceil_div(image_size, level.stride);
        }
    }
    for (LayerSpec& layer : out.layers) {
        if (layer.levels.empty()) continue;
        std::int64_t spatial = 0;
        for (std::size_t l : layer.levels) spatial += out.levels.at(l).height * out.levels.at(l).width;
        layer.spatial_elements = spatial;
    }
    if (head.reference_image_size > 0 && image_size != head.reference_image_size) {
        const double scale = static_cast<double>(image_size) * static_cast<double>(image_size) /
                             (static_cast<double>(head.reference_image_size) * head.reference_image_size);
        out.backbone.macs = std::llround(static_cast<double>(head.backbone.macs) * scale);
        out.controller.macs = std::llround(static_cast<double>(head.controller.macs) * scale);
    }
    out.reference_image_size = image_size;
    return out;
}

std::int64_t CompressionFactor::scale(std::int64_t channels) const {
    return std::max<std::int64_t>(1, ceil_div(served * channels, total));
}

CompressionFactor compression_factor(std::int64_t branch_classes, std::int64_t total_classes) {
    if (branch_classes <= 0 || total_classes <= 0) throw ParameterError("class counts must be positive");
    if (branch_classes > total_classes) throw ParameterError("branch serves more classes than exist");
    return {branch_classes, total_classes};
}

BranchPlan compress_template(const HeadTemplate& head, const CompressionFactor& factor, std::int64_t num_classes) {
    if (factor.served <= 0 || factor.total <= 0 || factor.served > factor.total) {
        throw ParameterError("compression factor must lie in (0, 1]");
    }
    if (num_classes < 1) throw ParameterError("num_classes must be >= 1");

    BranchPlan plan;
    plan.factor = factor.value();
    plan.num_classes = num_classes;
    plan.layers = head.layers;
    auto& layers = plan.layers;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        LayerSpec& layer = layers[i];
        const LayerSpec& original = head.layers[i];
        if (original.is_prediction) {
            layer.out_channels = prediction_width(original.outputs, head.anchors_per_cell, num_classes, head.box_fields);
        } else if (original.scale_out) {
            layer.out_channels = factor.scale(original.out_channels);
        }
        if (original.inputs.empty()) {
            if (i == 0) {
                layer.in_channels = original.scale_in ? factor.scale(original.in_channels) : original.in_channels;
            } else {
                layer.in_channels = layers[i - 1].out_channels;
            }
        } else {
            std::int64_t fed = 0;
            for (const LayerInput& input : original.inputs) {
                if (input.kind == LayerInput::Kind::layer) {
                    fed += layers[input.layer].out_channels;
                } else {
                    fed += original.scale_in ? factor.scale(input.width) : input.width;
                }
            }
            layer.in_channels = fed;
            // Keep the declared backbone widths in step with the new in_channels.
            for (LayerInput& input : layer.inputs) {
                if (input.kind == LayerInput::Kind::backbone && original.scale_in) input.width = factor.scale(input.width);
            }
        }
    }
    plan.params = count_params(plan.layers);
    plan.macs = count_macs(plan.layers);
    return plan;
}

BranchPlan compress_template(const HeadTemplate& head, double factor, std::int64_t num_classes) {
    if (!(factor > 0.0 && factor <= 1.0)) throw ParameterError("compression factor must lie in (0, 1]");
    constexpr std::int64_t kGrid = 1'000'000'000;
    std::int64_t served = std::max<std::int64_t>(1, std::llround(factor * static_cast<double>(kGrid)));
    const std::int64_t g = std::gcd(served, kGrid);
    BranchPlan plan = compress_template(head, CompressionFactor{served / g, kGrid / g}, num_classes);
    plan.factor = factor;
    return plan;
}

std::int64_t count_params(std::span<const LayerSpec> layers) {
    std::int64_t total = 0;
    for (const LayerSpec& l : layers) total += l.kernel * l.kernel * l.in_channels * l.out_channels + l.out_channels;
    return total;
}

std::int64_t count_macs(std::span<const LayerSpec> layers) {
    std::int64_t total = 0;
    for (const LayerSpec& l : layers) total += l.kernel * l.kernel * l.in_channels * l.out_channels * l.spatial_elements;
    return total;
}

std::vector<BranchPlan> plan_branches(const ClusterAssignment& assignment, const HeadTemplate& head) {
    assignment.validate();
    const auto total = static_cast<std::int64_t>(assignment.n_categories);
    std::vector<BranchPlan> plans;
    plans.reserve(assignment.k);
    for (std::size_t cl = 0; cl < assignment.k; ++cl) {
        const auto& served = assignment.served_classes[cl];
        const auto count = static_cast<std::int64_t>(served.size());
        BranchPlan plan = compress_template(head, compression_factor(count, total), count);
        plan.branch_id = cl;
        plan.classes = served;
        plans.push_back(std::move(plan));
    }
    return plans;
}

}  // namespace ctxroute
