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

#include "ctxroute/runtime_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ctxroute/error.hpp"
#include "ctxroute/io.hpp"
#include "ctxroute/rng.hpp"

namespace ctxroute {

using nlohmann::json;

std::int64_t ModelPlan::static_params() const {
    std::int64_t total = backbone.params + controller.params;
    for (const BranchPlan& b : branches) total += b.params;
    return total;
}

std::int64_t ModelPlan::all_branch_macs() const {
    std::int64_t total = 0;
    for (const BranchPlan& b : branches) total += b.macs;
    return total;
}

ModelPlan make_model_plan(const HeadTemplate& instantiated_head, std::vector<BranchPlan> branches) {
    ModelPlan plan;
    plan.name = instantiated_head.name;
    plan.image_size = instantiated_head.reference_image_size;
    plan.backbone = instantiated_head.backbone;
    plan.controller = instantiated_head.controller;
    plan.static_head = {count_params(instantiated_head.layers), count_macs(instantiated_head.layers)};
    plan.branches = std::move(branches);
    return plan;
}

namespace {

json cost_json(const FixedCost& cost) { return {{"params", cost.params}, {"macs", cost.macs}}; }

FixedCost cost_from(const json& doc) { return {doc.at("params").get<std::int64_t>(), doc.at("macs").get<std::int64_t>()}; }

}  // namespace

json model_plan_to_json(const ModelPlan& plan, const std::vector<std::string>& category_names) {
    json branches = json::array();
    for (const BranchPlan& b : plan.branches) {
        std::vector<std::string> classes;
        for (std::size_t c : b.classes) classes.push_back(category_names.at(c));
        json layers = json::array();
        for (const LayerSpec& l : b.layers) layers.push_back(layer_to_json(l));
        branches.push_back({{"id", b.branch_id},
                            {"classes", std::move(classes)},
                            {"factor", b.factor},
                            {"num_classes", b.num_classes},
                            {"params", b.params},
                            {"macs", b.macs},
                            {"layers", std::move(layers)}});
    }
    return {{"format", "ctxroute.plan"},
            {"version", 1},
            {"name", plan.name},
            {"image_size", plan.image_size},
            {"categories", category_names},
            {"backbone", cost_json(plan.backbone)},
            {"controller", cost_json(plan.controller)},
            {"static_head", cost_json(plan.static_head)},
            {"static_params", plan.static_params()},
            {"branches", std::move(branches)}};
}

ModelPlan model_plan_from_json(const json& doc, const std::vector<std::string>& category_names) {
    if (!doc.is_object() || doc.value("format", "") != "ctxroute.plan") {
        throw SchemaError("not a plan file (format key missing or wrong)");
    }
    ModelPlan plan;
    try {
        const auto file_names = doc.at("categories").get<std::vector<std::string>>();
        const auto& names = category_names.empty() ? file_names : category_names;
        if (file_names != names) throw ConsistencyError("plan file was built for a different category list");
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], i);

        plan.name = doc.value("name", "");
        plan.image_size = doc.value("image_size", std::int64_t{0});
        plan.backbone = cost_from(doc.at("backbone"));
        plan.controller = cost_from(doc.at("controller"));
        plan.static_head = cost_from(doc.at("static_head"));
        for (const json& b : doc.at("branches")) {
            BranchPlan branch;
            branch.branch_id = b.at("id").get<std::size_t>();
            branch.factor = b.at("factor").get<double>();
            branch.num_classes = b.at("num_classes").get<std::int64_t>();
            for (const auto& name : b.at("classes").get<std::vector<std::string>>()) {
                auto it = index.find(name);
                if (it == index.end()) throw SchemaError("plan file: unknown category '" + name + "'");
                branch.classes.push_back(it->second);
            }
            std::sort(branch.classes.begin(), branch.classes.end());
            std::vector<std::string> earlier;
            const json& layers = b.at("layers");
            for (std::size_t i = 0; i < layers.size(); ++i) {
                branch.layers.push_back(layer_from_json(layers[i], i, earlier));
                earlier.push_back(branch.layers.back().name);
            }
            branch.params = count_params(branch.layers);
            branch.macs = count_macs(branch.layers);
            if (branch.params != b.at("params").get<std::int64_t>() || branch.macs != b.at("macs").get<std::int64_t>()) {
                throw SchemaError("plan file: branch " + std::to_string(branch.branch_id) +
                                  " totals do not match its layers");
            }
            plan.branches.push_back(std::move(branch));
        }
    } catch (const json::exception& e) {
        throw SchemaError("plan file: " + std::string(e.what()));
    }
    std::sort(plan.branches.begin(), plan.branches.end(),
              [](const BranchPlan& a, const BranchPlan& b) { return a.branch_id < b.branch_id; });
    for (std::size_t i = 0; i < plan.branches.size(); ++i) {
        if (plan.branches[i].branch_id != i) throw SchemaError("plan file: branch ids must be 0..k-1");
    }
    return plan;
}

std::string RoutingPolicy::label() const {
    if (mode == RoutingMode::single) return "single";
    return "multi" + io::format_real(threshold);
}

RoutingMode parse_routing_mode(std::string_view text) {
    if (text == "single") return RoutingMode::single;
    if (text == "multi") return RoutingMode::multi;
    throw ParameterError("unknown routing mode '" + std::string(text) + "' (expected single|multi)");
}

void ControllerModel::validate() const {
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ParameterError("noise sigma must be >= 0");
    if (kind == Kind::oracle && noise_sigma != 0.0) throw ParameterError("an oracle controller has no noise");
}

ControllerModel::Kind parse_controller_kind(std::string_view text) {
    if (text == "oracle") return ControllerModel::Kind::oracle;
    if (text == "noisy") return ControllerModel::Kind::noisy;
    throw ParameterError("unknown controller '" + std::string(text) + "' (expected oracle|noisy)");
}

void CostModel::validate() const {
    for (double v : {latency_ms_per_gmac, latency_ms_offset, energy_mj_per_gmac, energy_mj_offset}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("cost model coefficients must be finite and >= 0");
    }
}

json cost_model_to_json(const CostModel& model) {
    return {{"format", "ctxroute.cost_model"},
            {"version", 1},
            {"latency_ms_per_gmac", model.latency_ms_per_gmac},
            {"latency_ms_offset", model.latency_ms_offset},
            {"energy_mj_per_gmac", model.energy_mj_per_gmac},
            {"energy_mj_offset", model.energy_mj_offset},
            {"latency_r2", model.latency_r2},
            {"energy_r2", model.energy_r2}};
}

CostModel cost_model_from_json(const json& doc) {
    CostModel model;
    try {
        model.latency_ms_per_gmac = doc.at("latency_ms_per_gmac").get<double>();
        model.latency_ms_offset = doc.at("latency_ms_offset").get<double>();
        model.energy_mj_per_gmac = doc.at("energy_mj_per_gmac").get<double>();
        model.energy_mj_offset = doc.at("energy_mj_offset").get<double>();
        model.latency_r2 = doc.value("latency_r2", 1.0);
        model.energy_r2 = doc.value("energy_r2", 1.0);
    } catch (const json::exception& e) {
        throw SchemaError("cost model: " + std::string(e.what()));
    }
    model.validate();
    return model;
}

AffineFit fit_affine(const std::vector<Sample>& samples) {
    if (samples.size() < 2) throw ParameterError("an affine fit needs at least 2 samples");
    const double n = static_cast<double>(samples.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (const Sample& s : samples) {
        mean_x += s.x;
        mean_y += s.y;
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const Sample& s : samples) {
        sxx += (s.x - mean_x) * (s.x - mean_x);
        sxy += (s.x - mean_x) * (s.y - mean_y);
        syy += (s.y - mean_y) * (s.y - mean_y);
    }
    if (sxx == 0.0) throw ParameterError("an affine fit needs at least two distinct x values");
    AffineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    double ss_res = 0.0;
    for (const Sample& s : samples) {
        const double r = s.y - (fit.slope * s.x + fit.intercept);
        ss_res += r * r;
    }
    fit.r2 = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return fit;
}

CostModel calibrate_cost_model(const std::vector<Sample>& latency, const std::vector<Sample>& energy) {
    const AffineFit lat = fit_affine(latency);
    const AffineFit en = fit_affine(energy);
    return {lat.slope, lat.intercept, en.slope, en.intercept, lat.r2, en.r2};
}

namespace {

std::vector<std::int64_t> context_counts(const Dataset& dataset, const ImageRecord& image,
                                         const ClusterAssignment& assignment) {
    std::vector<std::int64_t> counts(assignment.k, 0);
    for (const Instance& inst : image.instances) {
        const int cluster = assignment.assignment[dataset.category_index(inst.category_id)];
        if (cluster != ClusterAssignment::kCommon) ++counts[static_cast<std::size_t>(cluster)];
    }
    return counts;
}

std::size_t argmax_counts(const std::vector<std::int64_t>& counts) {
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

void check_universe(const Dataset& dataset, const ClusterAssignment& assignment) {
    if (assignment.n_categories != dataset.num_categories()) {
        throw ConsistencyError("cluster assignment covers " + std::to_string(assignment.n_categories) +
                               " categories but the dataset has " + std::to_string(dataset.num_categories()));
    }
}

}  // namespace

std::size_t fallback_context(const Dataset& dataset, const ClusterAssignment& assignment) {
    check_universe(dataset, assignment);
    std::vector<std::int64_t> totals(assignment.k, 0);
    for (const ImageRecord& image : dataset.images()) {
        const auto counts = context_counts(dataset, image, assignment);
        for (std::size_t c = 0; c < counts.size(); ++c) totals[c] += counts[c];
    }
    return argmax_counts(totals);
}

std::size_t dominant_context(const Dataset& dataset, const ImageRecord& image, const ClusterAssignment& assignment,
                             std::size_t fallback) {
    const auto counts = context_counts(dataset, image, assignment);
    if (std::all_of(counts.begin(), counts.end(), [](std::int64_t c) { return c == 0; })) return fallback;
    return argmax_counts(counts);
}

std::vector<double> context_fractions(const Dataset& dataset, const ImageRecord& image,
                                      const ClusterAssignment& assignment, std::size_t fallback) {
    const auto counts = context_counts(dataset, image, assignment);
    std::int64_t total = 0;
    for (std::int64_t c : counts) total += c;
    std::vector<double> fractions(assignment.k, 0.0);
    if (total == 0) {
        fractions.at(fallback) = 1.0;
        return fractions;
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        fractions[c] = static_cast<double>(counts[c]) / static_cast<double>(total);
    }
    return fractions;
}

std::vector<double> controller_scores(const std::vector<double>& fractions, const ControllerModel& model,
                                      std::int64_t image_id) {
    if (model.kind == ControllerModel::Kind::oracle || model.noise_sigma == 0.0) return fractions;
    Rng rng(derive_seed(model.seed, static_cast<std::uint64_t>(image_id)));
    std::vector<double> scores(fractions.size());
    for (std::size_t c = 0; c < fractions.size(); ++c) {
        scores[c] = std::clamp(fractions[c] + model.noise_sigma * rng.normal(), 0.0, 1.0);
    }
    return scores;
}

std::size_t argmax(const std::vector<double>& scores) {
    if (scores.empty()) throw ParameterError("argmax of an empty score vector");
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::vector<std::size_t> route(const std::vector<double>& scores, const RoutingPolicy& policy) {
    if (scores.empty()) throw ParameterError("routing needs at least one branch score");
    if (policy.mode == RoutingMode::multi) {
        std::vector<std::size_t> selected;
        for (std::size_t c = 0; c < scores.size(); ++c) {
            if (scores[c] >= policy.threshold) selected.push_back(c);
        }
        if (!selected.empty()) return selected;
    }
    return {argmax(scores)};
}

Coverage coverage(const Dataset& dataset, const ImageRecord& image, const std::vector<std::size_t>& executed,
                  const std::vector<BranchPlan>& plans) {
    if (executed.empty()) throw ParameterError("coverage needs at least one executed branch");
    std::vector<bool> served(dataset.num_categories(), false);
    for (std::size_t b : executed) {
        for (std::size_t c : plans.at(b).classes) served.at(c) = true;
    }
    Coverage result;
    result.total = static_cast<std::int64_t>(image.instances.size());
    for (const Instance& inst : image.instances) {
        if (served[dataset.category_index(inst.category_id)]) ++result.covered;
    }
    return result;
}

double ImageSimResult::coverage_fraction() const {
    if (total_instances == 0) return 1.0;
    return static_cast<double>(covered_instances) / static_cast<double>(total_instances);
}

SimulationAggregates aggregate(const std::vector<ImageSimResult>& images) {
    SimulationAggregates agg;
    if (images.empty()) return agg;
    std::size_t correct = 0;
    for (const ImageSimResult& r : images) {
        agg.mean_coverage += r.coverage_fraction();
        if (argmax(r.scores) == r.true_dominant) ++correct;
        agg.mean_dynamic_macs += static_cast<double>(r.dynamic_macs);
        agg.mean_dynamic_params += static_cast<double>(r.dynamic_params);
        agg.mean_latency_ms += r.latency_ms;
        agg.mean_energy_mj += r.energy_mj;
        agg.mean_branches_executed += static_cast<double>(r.executed.size());
    }
    const double n = static_cast<double>(images.size());
    agg.mean_coverage /= n;
    agg.controller_accuracy = static_cast<double>(correct) / n;
    agg.mean_dynamic_macs /= n;
    agg.mean_dynamic_params /= n;
    agg.mean_latency_ms /= n;
    agg.mean_energy_mj /= n;
    agg.mean_branches_executed /= n;
    return agg;
}

SimulationReport simulate(const Dataset& dataset, const ClusterAssignment& assignment, const ModelPlan& plan,
                          const ControllerModel& controller, const RoutingPolicy& policy, const CostModel& cost) {
    check_universe(dataset, assignment);
    controller.validate();
    cost.validate();
    if (plan.branches.size() != assignment.k) {
        throw ConsistencyError("plan has " + std::to_string(plan.branches.size()) + " branches but the assignment has k=" +
                               std::to_string(assignment.k));
    }
    for (std::size_t b = 0; b < plan.branches.size(); ++b) {
        if (plan.branches[b].classes != assignment.served_classes[b]) {
            throw ConsistencyError("branch " + std::to_string(b) + " does not serve the classes of cluster " +
                                   std::to_string(b));
        }
    }

    const std::size_t fallback = fallback_context(dataset, assignment);
    SimulationReport report;
    report.policy = policy;
    report.controller = controller;
    report.static_params = plan.static_params();
    report.images.reserve(dataset.num_images());
    for (const ImageRecord& image : dataset.images()) {
        ImageSimResult r;
        r.image_id = image.image_id;
        r.true_dominant = dominant_context(dataset, image, assignment, fallback);
        r.scores = controller_scores(context_fractions(dataset, image, assignment, fallback), controller, image.image_id);
        r.executed = route(r.scores, policy);
        const Coverage cov = coverage(dataset, image, r.executed, plan.branches);
        r.covered_instances = cov.covered;
        r.total_instances = cov.total;
        r.dynamic_params = plan.backbone.params + plan.controller.params;
        r.dynamic_macs = plan.backbone.macs + plan.controller.macs;
        for (std::size_t b : r.executed) {
            r.dynamic_params += plan.branches[b].params;
            r.dynamic_macs += plan.branches[b].macs;
        }
        const double gmacs = static_cast<double>(r.dynamic_macs) / 1e9;
        r.latency_ms = cost.latency_ms(gmacs);
        r.energy_mj = cost.energy_mj(gmacs);
        report.images.push_back(std::move(r));
    }
    report.aggregates = aggregate(report.images);
    return report;
}

double controller_accuracy(const Dataset& dataset, const ClusterAssignment& assignment,
                           const ControllerModel& controller) {
    check_universe(dataset, assignment);
    if (dataset.num_images() == 0) return 0.0;
    const std::size_t fallback = fallback_context(dataset, assignment);
    std::size_t correct = 0;
    for (const ImageRecord& image : dataset.images()) {
        const auto fractions = context_fractions(dataset, image, assignment, fallback);
        const auto scores = controller_scores(fractions, controller, image.image_id);
        if (argmax(scores) == dominant_context(dataset, image, assignment, fallback)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.num_images());
}

SigmaCalibration calibrate_controller_sigma(const Dataset& dataset, const ClusterAssignment& assignment, double target,
                                            std::uint64_t seed, double tolerance, double max_sigma,
                                            int max_iterations) {
    if (!(target > 0.0 && target <= 1.0)) throw ParameterError("target accuracy must lie in (0, 1]");
    auto measure = [&](double sigma) {
        return controller_accuracy(dataset, assignment, ControllerModel::noisy(sigma, seed));
    };
    SigmaCalibration result;
    const double at_zero = measure(0.0);
    if (std::abs(at_zero - target) <= tolerance) return {0.0, at_zero, 0};
    if (at_zero < target) throw ParameterError("target accuracy exceeds the noiseless controller accuracy");
    const double at_max = measure(max_sigma);
    if (at_max > target + tolerance) throw ParameterError("target accuracy not reachable within the sigma bracket");

    double lo = 0.0, hi = max_sigma;
    for (int it = 1; it <= max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double acc = measure(mid);
        result = {mid, acc, it};
        if (std::abs(acc - target) <= tolerance) return result;
        if (acc > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw NumericalError("sigma bisection did not reach the target accuracy within " +
                         std::to_string(max_iterations) + " iterations");
}

json simulation_to_json(const SimulationReport& report, bool per_image) {
    const auto& a = report.aggregates;
    json doc = {
        {"format", "ctxroute.simulation"},
        {"version", 1},
        {"policy", {{"mode", report.policy.mode == RoutingMode::single ? "single" : "multi"},
                    {"threshold", report.policy.threshold},
                    {"label", report.policy.label()}}},
        {"controller", {{"kind", report.controller.kind == ControllerModel::Kind::oracle ? "oracle" : "noisy"},
                        {"sigma", report.controller.noise_sigma},
                        {"seed", report.controller.seed}}},
        {"static_params", report.static_params},
        {"images", report.images.size()},
        {"aggregates", {{"mean_coverage", a.mean_coverage},
                        {"controller_accuracy", a.controller_accuracy},
                        {"mean_dynamic_macs", a.mean_dynamic_macs},
                        {"mean_dynamic_params", a.mean_dynamic_params},
                        {"mean_latency_ms", a.mean_latency_ms},
                        {"mean_energy_mj", a.mean_energy_mj},
                        {"mean_branches_executed", a.mean_branches_executed}}},
        {"notes", {"accuracy is instance coverage by the executed branches, an upper bound on recall, not AP",
                   "latency and energy come from an affine cost model in GMACs; memory traffic is not modeled"}}};
    if (per_image) {
        json rows = json::array();
        for (const ImageSimResult& r : report.images) {
            rows.push_back({{"image_id", r.image_id},
                            {"true_dominant", r.true_dominant},
                            {"scores", r.scores},
                            {"executed", r.executed},
                            {"covered_instances", r.covered_instances},
                            {"total_instances", r.total_instances},
                            {"dynamic_params", r.dynamic_params},
                            {"dynamic_macs", r.dynamic_macs},
                            {"latency_ms", r.latency_ms},
                            {"energy_mj", r.energy_mj}});
        }
        doc["per_image"] = std::move(rows);
    }
    return doc;
}

}  // namespace ctxroute
