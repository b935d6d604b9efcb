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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ctxroute/branch_design.hpp"
#include "ctxroute/clustering.hpp"
#include "ctxroute/dataset.hpp"

namespace ctxroute {

/// Backbone + controller + branch pool of an adaptive detector.
struct ModelPlan {
    std::string name;
    std::int64_t image_size = 0;
    FixedCost backbone;
    FixedCost controller;
    FixedCost static_head;  // the uncompressed template head, for the static baseline
    std::vector<BranchPlan> branches;

    /// Static parameter count: backbone + controller + every branch.
    std::int64_t static_params() const;
    std::int64_t all_branch_macs() const;
};

ModelPlan make_model_plan(const HeadTemplate& instantiated_head, std::vector<BranchPlan> branches);

nlohmann::json model_plan_to_json(const ModelPlan& plan, const std::vector<std::string>& category_names);
ModelPlan model_plan_from_json(const nlohmann::json& doc, const std::vector<std::string>& category_names);

enum class RoutingMode { single, multi };

struct RoutingPolicy {
    RoutingMode mode = RoutingMode::single;
    double threshold = 0.5;  // multi only

    std::string label() const;  // "single" or "multi0.3"
};

RoutingMode parse_routing_mode(std::string_view text);

struct ControllerModel {
    enum class Kind { oracle, noisy };
    Kind kind = Kind::oracle;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> target_accuracy;

    static ControllerModel oracle() { return {}; }
    static ControllerModel noisy(double sigma, std::uint64_t seed) {
        return {Kind::noisy, sigma, seed, std::nullopt};
    }

    /// Throws ParameterError for negative sigma or an oracle with noise.
    void validate() const;
};

ControllerModel::Kind parse_controller_kind(std::string_view text);

/// Affine per-inference cost in GMACs.
struct CostModel {
    double latency_ms_per_gmac = 0.0;
    double latency_ms_offset = 0.0;
    double energy_mj_per_gmac = 0.0;
    double energy_mj_offset = 0.0;
    double latency_r2 = 1.0;
    double energy_r2 = 1.0;

    double latency_ms(double gmacs) const { return latency_ms_per_gmac * gmacs + latency_ms_offset; }
    double energy_mj(double gmacs) const { return energy_mj_per_gmac * gmacs + energy_mj_offset; }

    /// Throws ParameterError for negative coefficients.
    void validate() const;
};

nlohmann::json cost_model_to_json(const CostModel& model);
CostModel cost_model_from_json(const nlohmann::json& doc);

struct Sample {
    double x = 0.0;
    double y = 0.0;
};

struct AffineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y = slope * x + intercept. R^2 is 1 when y is
/// constant and fitted exactly. Throws ParameterError for < 2 samples or
/// zero x variance.
AffineFit fit_affine(const std::vector<Sample>& samples);

/// Least-squares fits of latency (ms) and energy (mJ) against GMACs.
CostModel calibrate_cost_model(const std::vector<Sample>& latency, const std::vector<Sample>& energy);

/// Cluster with the most non-common instances over the whole dataset,
/// lowest id on ties. Used for images without non-common instances.
std::size_t fallback_context(const Dataset& dataset, const ClusterAssignment& assignment);

/// Plurality cluster of the image's non-common instances, lowest id on ties.
std::size_t dominant_context(const Dataset& dataset, const ImageRecord& image,
                             const ClusterAssignment& assignment, std::size_t fallback);

/// Share of the image's non-common instances per cluster. Images with none
/// get the indicator vector of `fallback`.
std::vector<double> context_fractions(const Dataset& dataset, const ImageRecord& image,
                                      const ClusterAssignment& assignment, std::size_t fallback);

/// Oracle: the fractions. Noisy: clamp(fraction + sigma * z, 0, 1) where z is
/// standard normal drawn from a stream keyed by (seed, image_id).
std::vector<double> controller_scores(const std::vector<double>& fractions, const ControllerModel& model,
                                      std::int64_t image_id);

/// Index of the largest score, lowest index on ties.
std::size_t argmax(const std::vector<double>& scores);

/// Single: {argmax}. Multi: {k : score_k >= threshold}, or {argmax} if empty,
/// so threshold 0 runs every branch.
std::vector<std::size_t> route(const std::vector<double>& scores, const RoutingPolicy& policy);

struct Coverage {
    std::int64_t covered = 0;
    std::int64_t total = 0;
};

/// Instances whose category is served by one of the executed branches.
Coverage coverage(const Dataset& dataset, const ImageRecord& image,
                  const std::vector<std::size_t>& executed, const std::vector<BranchPlan>& plans);

struct ImageSimResult {
    std::int64_t image_id = 0;
    std::size_t true_dominant = 0;
    std::vector<double> scores;
    std::vector<std::size_t> executed;
    std::int64_t covered_instances = 0;
    std::int64_t total_instances = 0;
    std::int64_t dynamic_params = 0;
    std::int64_t dynamic_macs = 0;
    double latency_ms = 0.0;
    double energy_mj = 0.0;

    /// covered / total, 1 for images without instances.
    double coverage_fraction() const;
};

struct SimulationAggregates {
    double mean_coverage = 0.0;
    double controller_accuracy = 0.0;
    double mean_dynamic_macs = 0.0;
    double mean_dynamic_params = 0.0;
    double mean_latency_ms = 0.0;
    double mean_energy_mj = 0.0;
    double mean_branches_executed = 0.0;

    friend bool operator==(const SimulationAggregates&, const SimulationAggregates&) = default;
};

struct SimulationReport {
    RoutingPolicy policy;
    ControllerModel controller;
    std::int64_t static_params = 0;
    std::vector<ImageSimResult> images;  // ascending image id
    SimulationAggregates aggregates;
};

/// Recomputes the aggregates from per-image rows in image order.
SimulationAggregates aggregate(const std::vector<ImageSimResult>& images);

/// Runs the routing simulation over every image. Throws ConsistencyError if
/// the plan's branch count differs from the assignment's k or the category
/// universes differ.
SimulationReport simulate(const Dataset& dataset, const ClusterAssignment& assignment, const ModelPlan& plan,
                          const ControllerModel& controller, const RoutingPolicy& policy,
                          const CostModel& cost);

/// Top-1 agreement of controller argmax with the dominant context.
double controller_accuracy(const Dataset& dataset, const ClusterAssignment& assignment,
                           const ControllerModel& controller);

struct SigmaCalibration {
    double sigma = 0.0;
    double accuracy = 0.0;
    int iterations = 0;
};

/// Bisects noise_sigma until the measured top-1 accuracy is within
/// `tolerance` (absolute, fraction) of `target`. Throws ParameterError if the
/// target is above the oracle accuracy or unreachable within [0, max_sigma].
SigmaCalibration calibrate_controller_sigma(const Dataset& dataset, const ClusterAssignment& assignment,
                                            double target, std::uint64_t seed, double tolerance = 0.005,
                                            double max_sigma = 4.0, int max_iterations = 60);

nlohmann::json simulation_to_json(const SimulationReport& report, bool per_image);

}  // namespace ctxroute
