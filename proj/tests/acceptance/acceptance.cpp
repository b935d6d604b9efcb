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

// Acceptance gate. Prints one [PASS]/[FAIL] line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"

#include "ctxroute/branch_design.hpp"
#include "ctxroute/cli.hpp"
#include "ctxroute/clustering.hpp"
#include "ctxroute/cooccurrence.hpp"
#include "ctxroute/io.hpp"
#include "ctxroute/layout.hpp"
#include "ctxroute/pareto.hpp"
#include "ctxroute/runtime_sim.hpp"
#include "ctxroute/synthetic.hpp"
#include "oracles.hpp"

using namespace ctxroute;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (detail.tellp() > 0) detail << "; ";
            detail << what;
        }
    }
};

int run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (code != 0) std::cerr << err.str();
    return code;
}

std::string src(const std::string& rel) { return testing::source_path(rel).string(); }

bool near(double got, double want, double tol) { return std::abs(got - want) <= tol; }

std::string num(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// Percent columns as printed in the published results table:
// accuracy, latency, energy, Dparam, MACs, efficiency.
struct PrintedRow {
    const char* baseline;
    const char* name;
    double pct[6];
};

const PrintedRow kPrinted[] = {
    {"RetinaNet", "2B-multi0.1", {-3.2, -19.9, -27.7, -7.1, -35.5, 67.2}},
    {"RetinaNet", "3B-multi0.1", {-5.6, -23.7, -34.9, -10.2, -48.9, 89.9}},
    {"RetinaNet-320", "2B-multi0.3", {-3.8, -19.6, -35.2, -7.1, -36.2, 84.8}},
    {"RetinaNet-320", "3B-multi0.5", {-6.5, -23.0, -42.5, -10.2, -49.8, 111.0}},
    {"RetinaNet-320", "4B-single", {-8.0, -27.0, -45.8, -11.4, -50.3, 132.3}},
    {"YOLOv3", "2B-multi0.1-y416", {0.3, -8.7, -8.9, -16.8, -14.1, 20.5}},
    {"YOLOv3", "3B-multi0.3-y416", {-2.5, -11.0, -13.6, -21.8, -17.9, 26.7}},
    {"YOLOv3", "5B-single-y416", {-7.9, -13.5, -16.7, -25.9, -20.9, 27.8}},
    {"YOLOv3-320", "2B-multi0.2-y320", {-0.7, -8.2, -13.4, -16.7, -14.1, 25.0}},
    {"YOLOv3-320", "3B-multi0.5-y320", {-4.4, -11.6, -16.9, -22.7, -18.5, 30.0}},
    {"YOLOv3-320", "4B-single-y320", {-6.8, -13.3, -16.9, -24.8, -20.1, 29.4}},
};

const char* kBaselines[] = {"RetinaNet", "RetinaNet-320", "YOLOv3", "YOLOv3-320"};

/// Rows of the CSV report keyed by name.
std::map<std::string, std::map<std::string, double>> report_rows(const std::string& baseline) {
    const auto points = load_points(src("data/reference_results/results_table.csv"));
    std::istringstream in(emit_report(points, baseline, CostAxis::energy, ReportFormat::csv));
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::istringstream h(line);
        std::string f;
        while (std::getline(h, f, ',')) header.push_back(f);
    }
    std::map<std::string, std::map<std::string, double>> rows;
    while (std::getline(in, line)) {
        std::istringstream r(line);
        std::string f, name;
        for (std::size_t c = 0; std::getline(r, f, ','); ++c) {
            if (c == 0) {
                name = f;
            } else if (c >= 2) {
                rows[name][header[c]] = std::stod(f);
            }
        }
    }
    return rows;
}

Outcome table_arithmetic() {
    Outcome o;
    const char* columns[] = {"d_accuracy_pct", "d_latency_pct", "d_energy_pct",
                             "d_dparam_pct",   "d_gmacs_pct",   "d_efficiency_pct"};
    int checked = 0;
    double worst = 0.0;
    for (const PrintedRow& row : kPrinted) {
        const auto rows = report_rows(row.baseline);
        auto it = rows.find(row.name);
        if (it == rows.end()) {
            o.require(false, std::string("row ") + row.name + " missing");
            continue;
        }
        for (int c = 0; c < 6; ++c) {
            const double got = it->second.at(columns[c]);
            worst = std::max(worst, std::abs(got - row.pct[c]));
            o.require(near(got, row.pct[c], 0.15),
                      std::string(row.name) + " " + columns[c] + " = " + num(got) + ", printed " + num(row.pct[c]));
            ++checked;
        }
    }
    if (o.pass) o.detail << checked << " percentages, worst deviation " << num(worst) << " pp";
    return o;
}

Outcome headline_reductions() {
    Outcome o;
    double min_energy = 0.0, min_latency = 0.0;
    std::string energy_row, latency_row;
    for (const char* baseline : kBaselines) {
        for (const auto& [name, values] : report_rows(baseline)) {
            if (values.at("d_energy_pct") < min_energy) {
                min_energy = values.at("d_energy_pct");
                energy_row = std::string(baseline) + "/" + name;
            }
            if (values.at("d_latency_pct") < min_latency) {
                min_latency = values.at("d_latency_pct");
                latency_row = std::string(baseline) + "/" + name;
            }
        }
    }
    o.require(near(min_energy, -45.8, 0.15), "max energy reduction " + num(min_energy));
    o.require(near(min_latency, -27.0, 0.15), "max latency reduction " + num(min_latency));
    o.require(energy_row == "RetinaNet-320/4B-single", "energy maximum on " + energy_row);
    o.detail << "energy " << num(min_energy) << "% (" << energy_row << "), latency " << num(min_latency) << "% ("
             << latency_row << ")";
    return o;
}

HeadTemplate toy_template(std::int64_t classes) {
    HeadTemplate head;
    head.name = "toy";
    head.native_classes = classes;
    head.anchors_per_cell = 3;
    head.box_fields = 5;
    head.levels = {{0, 5, 5}};
    head.layers = {
        {"a", 3, 4, 8, 25, false, true, false, PredictionOutputs::classes_and_box, {}, {}},
        {"b", 3, 8, 6, 25, false, true, false, PredictionOutputs::classes_and_box, {}, {}},
        {"p", 1, 6, 3 * (classes + 5), 25, false, false, true, PredictionOutputs::classes_and_box, {}, {}},
    };
    head.validate();
    return head;
}

Outcome compression_arithmetic() {
    Outcome o;
    o.require(compression_factor(18, 30).value() == 0.6, "18/30 != 0.6");
    o.require(compression_factor(12, 30).value() == 0.4, "12/30 != 0.4");
    std::vector<HeadTemplate> heads{toy_template(1), toy_template(7)};
    for (const char* t : {"data/templates/retinanet_head.json", "data/templates/yolov3_head.json"}) {
        const HeadTemplate head = load_template(src(t));
        for (std::int64_t size : {224, 320, 416, 608}) heads.push_back(instantiate(head, size));
    }
    for (const HeadTemplate& head : heads) {
        const BranchPlan plan = compress_template(head, 1.0, head.native_classes);
        o.require(plan.layers == head.layers, head.name + ": layers changed at factor 1.0");
        o.require(plan.params == count_params(head.layers), head.name + ": params changed at factor 1.0");
        o.require(plan.macs == count_macs(head.layers), head.name + ": MACs changed at factor 1.0");
    }
    if (o.pass) o.detail << "identity checked on " << heads.size() << " templates";
    return o;
}

Outcome param_mac_oracle() {
    Outcome o;
    const LayerSpec single{"x", 3, 4, 8, 1, false, true, false, PredictionOutputs::classes_and_box, {}, {}};
    o.require(count_params(std::vector<LayerSpec>{single}) == 296, "k=3 Cin=4 Cout=8 is not 296 params");
    // By hand, 2 classes, 3 anchors, 5x5 cells:
    //   a: 3*3*4*8 + 8 = 296       MACs 288 * 25 = 7200
    //   b: 3*3*8*6 + 6 = 438       MACs 432 * 25 = 10800
    //   p: 1*1*6*21 + 21 = 147     MACs 126 * 25 = 3150
    const HeadTemplate head = toy_template(2);
    const std::int64_t params = count_params(head.layers);
    const std::int64_t macs = count_macs(head.layers);
    o.require(params == 296 + 438 + 147, "toy params " + std::to_string(params));
    o.require(macs == 7200 + 10800 + 3150, "toy MACs " + std::to_string(macs));
    o.detail << "toy head: " << params << " params, " << macs << " MACs";
    return o;
}

Outcome planted_recovery() {
    Outcome o;
    const PlantedCorpus planted = generate_planted_corpus(default_planted_spec());
    const Dataset shipped = load_dataset(src("data/synthetic/planted_corpus.json"));
    o.require(shipped == planted.dataset, "shipped corpus differs from the generator output");
    const auto person = shipped.find_category_by_name("person");
    o.require(person.has_value(), "no person category");

    int recovered = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const PresenceMatrix presence = build_presence(shipped);
        const CorrelationMatrix rho = phi_correlation(build_cooccurrence(presence), presence.n_images());
        const CommonObjectSet common = extract_common_objects(rho);
        o.require(person && common.members == std::vector<std::size_t>{*person},
                  "common set is not exactly {person} (seed " + std::to_string(seed) + ")");
        LayoutParams params;
        const Layout layout = fr_layout(build_graph(rho, common), params, seed);
        const ClusterAssignment a =
            attach_common(agglomerative_cluster(layout, 2, shipped.num_categories(), Linkage::ward), common);
        if (testing::same_partition(a.assignment, planted.truth)) ++recovered;
    }
    o.require(recovered >= 4, "recovered on " + std::to_string(recovered) + " of 5 seeds");
    o.detail << "exact recovery on " << recovered << "/5 layout seeds; common = {person}";
    return o;
}

ClusterAssignment truth_assignment(const PlantedCorpus& corpus, std::size_t k) {
    ClusterAssignment a;
    a.k = k;
    a.n_categories = corpus.dataset.num_categories();
    a.assignment = corpus.truth;
    for (std::size_t c = 0; c < a.n_categories; ++c) {
        if (corpus.truth[c] < 0) a.common.members.push_back(c);
    }
    a.served_classes.assign(k, {});
    for (std::size_t c = 0; c < a.n_categories; ++c) {
        for (std::size_t cl = 0; cl < k; ++cl) {
            if (corpus.truth[c] == static_cast<int>(cl) || corpus.truth[c] < 0) a.served_classes[cl].push_back(c);
        }
    }
    a.validate();
    return a;
}

Outcome routing_invariants() {
    Outcome o;
    std::mt19937_64 gen(31337);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const HeadTemplate head = instantiate(load_template(src("data/templates/retinanet_head.json")), 320);
    int cases = 0;
    for (; cases < 1000 && o.pass; ++cases) {
        const std::size_t n = 4 + gen() % 6;
        const std::size_t k = 1 + gen() % (n - 2);
        const Dataset d = testing::random_dataset(gen(), 3 + gen() % 8, n, 0.2 + 0.5 * u(gen));
        ClusterAssignment a;
        a.k = k;
        a.n_categories = n;
        a.assignment.assign(n, 0);
        a.common.members = {n - 1};
        a.assignment[n - 1] = ClusterAssignment::kCommon;
        for (std::size_t c = 0; c + 1 < n; ++c) a.assignment[c] = c < k ? static_cast<int>(c) : static_cast<int>(gen() % k);
        a.served_classes.assign(k, {});
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t cl = 0; cl < k; ++cl)
                if (a.assignment[c] == static_cast<int>(cl) || a.assignment[c] < 0) a.served_classes[cl].push_back(c);
        const ModelPlan plan = make_model_plan(head, plan_branches(a, head));
        const ControllerModel controller =
            cases % 2 ? ControllerModel::oracle() : ControllerModel::noisy(u(gen), static_cast<std::uint64_t>(cases));
        const CostModel cost{12.32, 328.9, 59.1, 654.0, 1.0, 1.0};

        const auto single = simulate(d, a, plan, controller, {RoutingMode::single, 0.0}, cost);
        std::vector<SimulationReport> multi;
        for (double t : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9}) multi.push_back(simulate(d, a, plan, controller, {RoutingMode::multi, t}, cost));
        const std::int64_t all_macs = plan.backbone.macs + plan.controller.macs + plan.all_branch_macs();
        for (std::size_t i = 0; i < d.num_images(); ++i) {
            o.require(single.images[i].executed.size() == 1, "single mode ran " +
                                                                 std::to_string(single.images[i].executed.size()) + " branches");
            o.require(multi[0].images[i].coverage_fraction() == 1.0, "multi(0) coverage below 1");
            o.require(multi[0].images[i].dynamic_macs == all_macs, "multi(0) MACs differ from all branches");
            for (std::size_t t = 1; t < multi.size(); ++t) {
                const auto& prev = multi[t - 1].images[i].executed;
                const auto& cur = multi[t].images[i].executed;
                bool subset = true;
                for (std::size_t b : cur) subset = subset && std::find(prev.begin(), prev.end(), b) != prev.end();
                o.require(subset && cur.size() <= prev.size(), "executed set grew with the threshold");
            }
            for (const SimulationReport* r : std::initializer_list<const SimulationReport*>{&single, &multi[0], &multi[3], &multi[5]}) {
                o.require(r->images[i].dynamic_params <= plan.static_params(), "Dparam exceeds Sparam");
            }
        }
    }
    o.require(cases >= 1000, "only " + std::to_string(cases) + " cases");
    if (o.pass) o.detail << cases << " random dataset/assignment/controller cases";
    return o;
}

Outcome simulation_oracle() {
    Outcome o;
    testing::TempDir dir("accept_sim");
    const Dataset d = testing::random_dataset(2718, 50, 8, 0.3);
    io::write_json(dir / "ds.json", to_snapshot_json(d));
    ClusterAssignment a;
    a.k = 3;
    a.n_categories = 8;
    a.assignment = {0, 0, 1, 1, 2, 2, 0, ClusterAssignment::kCommon};
    a.common.members = {7};
    a.served_classes = {{0, 1, 6, 7}, {2, 3, 7}, {4, 5, 7}};
    a.validate();
    io::write_json(dir / "clusters.json", clusters_to_json(a, d.category_names()));

    if (run({"design", "--clusters", (dir / "clusters.json").string(), "--template",
             src("data/templates/yolov3_head.json"), "--out", (dir / "plan.json").string()}) != 0 ||
        run({"simulate", "--dataset", (dir / "ds.json").string(), "--clusters", (dir / "clusters.json").string(),
             "--plan", (dir / "plan.json").string(), "--cost-model", src("data/cost_models/retinanet_jetson_nano.json"),
             "--out", (dir / "sim.json").string(), "--sweep", "--thresholds", "0.1,0.3,0.5", "--per-image"}) != 0) {
        o.require(false, "CLI run failed");
        return o;
    }
    const ModelPlan plan = model_plan_from_json(io::read_json(dir / "plan.json"), d.category_names());
    const json sim = io::read_json(dir / "sim.json");
    const std::vector<std::pair<RoutingMode, double>> policies{
        {RoutingMode::single, 0.0}, {RoutingMode::multi, 0.1}, {RoutingMode::multi, 0.3}, {RoutingMode::multi, 0.5}};
    o.require(sim["runs"].size() == policies.size(), "expected 4 runs");
    std::size_t compared = 0;
    for (std::size_t p = 0; p < policies.size() && p < sim["runs"].size(); ++p) {
        const auto oracle = testing::brute_force_simulate(d, a, plan, policies[p].first, policies[p].second);
        const json& rows = sim["runs"][p]["per_image"];
        o.require(rows.size() == oracle.size(), "per-image row count");
        double mean_cov = 0.0;
        for (std::size_t i = 0; i < oracle.size() && i < rows.size(); ++i, ++compared) {
            const json& r = rows[i];
            const std::int64_t total = r["total_instances"].get<std::int64_t>();
            const double cov = total == 0 ? 1.0 : r["covered_instances"].get<double>() / static_cast<double>(total);
            mean_cov += oracle[i].coverage;
            o.require(r["executed"].get<std::vector<std::size_t>>() == oracle[i].executed,
                      "executed set differs on image " + std::to_string(i));
            o.require(cov == oracle[i].coverage, "coverage differs on image " + std::to_string(i));
            o.require(r["dynamic_params"].get<std::int64_t>() == oracle[i].dynamic_params, "Dparam differs");
            o.require(r["dynamic_macs"].get<std::int64_t>() == oracle[i].dynamic_macs, "MACs differ");
        }
        mean_cov /= static_cast<double>(oracle.size());
        o.require(std::abs(sim["runs"][p]["aggregates"]["mean_coverage"].get<double>() - mean_cov) < 1e-12,
                  "mean coverage differs");
    }
    if (o.pass) o.detail << compared << " image/policy pairs identical";
    return o;
}

Outcome controller_calibration() {
    Outcome o;
    auto spec = default_planted_spec();
    spec.n_images = 2000;
    spec.seed = 2;  // held apart from the shipped corpus
    const PlantedCorpus corpus = generate_planted_corpus(spec);
    const ClusterAssignment a = truth_assignment(corpus, 2);
    const SigmaCalibration cal = calibrate_controller_sigma(corpus.dataset, a, 0.953, 17);
    const HeadTemplate head = instantiate(load_template(src("data/templates/retinanet_head.json")), 416);
    const ModelPlan plan = make_model_plan(head, plan_branches(a, head));
    const auto report = simulate(corpus.dataset, a, plan, ControllerModel::noisy(cal.sigma, 17),
                                 {RoutingMode::single, 0.0}, CostModel{});
    const double measured = report.aggregates.controller_accuracy;
    o.require(near(measured, 0.953, 0.01), "measured accuracy " + num(100 * measured) + "%");
    o.detail << "sigma " << num(cal.sigma) << " after " << cal.iterations << " steps, top-1 " << num(100 * measured)
             << "% on " << corpus.dataset.num_images() << " images";
    return o;
}

Outcome cost_fit() {
    Outcome o;
    const auto points = load_points(src("data/reference_results/results_table.csv"));
    std::vector<Sample> retina;
    Sample base416{}, two_branch416{};
    for (const ConfigPoint& p : points) {
        if (p.group.rfind("RetinaNet", 0) != 0) continue;
        retina.push_back({p.gmacs, p.latency_ms});
        if (p.name == "RetinaNet") base416 = {p.gmacs, p.latency_ms};
        if (p.name == "2B-multi0.1") two_branch416 = {p.gmacs, p.latency_ms};
    }
    o.require(retina.size() == 7, "expected 7 RetinaNet rows, got " + std::to_string(retina.size()));
    const AffineFit all = fit_affine(retina);
    o.require(all.r2 >= 0.9, "R^2 " + num(all.r2));
    const AffineFit two = fit_affine({base416, two_branch416});
    o.require(std::abs(two.slope - 11.25) <= 0.01 * 11.25, "two-point slope " + num(two.slope));
    o.require(std::abs(two.intercept - 360.9) <= 0.01 * 360.9, "two-point intercept " + num(two.intercept));

    testing::TempDir dir("accept_fit");
    const std::string out = (dir / "fit.json").string();
    o.require(run({"report", "--points", src("data/reference_results/results_table.csv"), "--baseline", "RetinaNet",
                   "--fit-cost-model", out, "--fit-prefix", "RetinaNet", "--out", (dir / "r.txt").string()}) == 0,
              "report --fit-cost-model failed");
    if (fs::exists(out)) {
        const CostModel m = cost_model_from_json(io::read_json(out));
        o.require(std::abs(m.latency_r2 - all.r2) < 1e-12, "CLI fit differs");
    }
    o.detail << "7-row fit " << num(all.slope) << " ms/GMAC + " << num(all.intercept) << " ms, R^2 " << num(all.r2)
             << "; two-point " << num(two.slope) << " ms/GMAC + " << num(two.intercept) << " ms";
    return o;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string bytes = io::read_text(entry.path());
        const std::string rel = fs::relative(entry.path(), dir).string();
        if (rel.size() > 14 && rel.ends_with(".manifest.json")) {
            // Sidecars carry the wall-clock time of the run; everything else must match.
            json doc = json::parse(bytes);
            doc.erase("timestamp");
            bytes = doc.dump(2);
        }
        files[rel] = std::move(bytes);
    }
    return files;
}

Outcome determinism() {
    Outcome o;
    testing::TempDir dir("accept_det");
    auto p = [&](const std::string& name) { return (dir / name).string(); };
    const std::vector<std::vector<std::string>> stages{
        {"ingest", "--annotations", src("data/synthetic/planted_corpus.json"), "--out", p("ds.json")},
        {"cluster", "--dataset", p("ds.json"), "--out", p("clusters.json"), "--k-list", "2,3", "--layout-seed", "9",
         "--matrices-dir", p("matrices"), "--layout-out", p("layout.csv")},
        {"design", "--clusters", p("clusters_k2.json"), "--template", src("data/templates/retinanet_head.json"),
         "--image-size", "320", "--out", p("plan.json")},
        {"simulate", "--dataset", p("ds.json"), "--clusters", p("clusters_k2.json"), "--plan", p("plan.json"),
         "--cost-model", src("data/cost_models/retinanet_jetson_nano.json"), "--out", p("sim.json"), "--points-out",
         p("points.csv"), "--sweep", "--target-accuracy", "0.933", "--seed", "21", "--per-image"},
        {"report", "--points", p("points.csv"), "--baseline", "static", "--format", "json", "--out", p("report.json")},
        {"report", "--points", p("points.csv"), "--baseline", "static", "--out", p("report.txt")},
        {"pipeline", "--config", src("data/demo.toml"), "--out-dir", p("pipeline")},
    };
    std::map<std::string, std::string> first;
    for (int round = 0; round < 2; ++round) {
        for (const auto& args : stages) {
            if (run(args) != 0) o.require(false, args[0] + " failed");
        }
        if (round == 0) {
            first = snapshot(dir.path());
        }
    }
    const auto second = snapshot(dir.path());
    o.require(first.size() == second.size(), "file sets differ");
    for (const auto& [name, bytes] : first) {
        auto it = second.find(name);
        o.require(it != second.end() && it->second == bytes, name + " changed between runs");
    }
    o.require(first.size() >= 25, "only " + std::to_string(first.size()) + " files produced");
    if (o.pass) o.detail << first.size() << " files byte-identical across reruns of every stage";
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* title;
        std::function<Outcome()> check;
        double budget_s;
    };
    const std::vector<Criterion> criteria{
        {1, "results-table percentages reproduced", table_arithmetic, 1.0},
        {2, "headline energy and latency reductions", headline_reductions, 1.0},
        {3, "compression factor arithmetic", compression_arithmetic, 5.0},
        {4, "parameter and MAC counts vs hand oracle", param_mac_oracle, 1.0},
        {5, "planted-context recovery", planted_recovery, 30.0},
        {6, "routing invariants", routing_invariants, 60.0},
        {7, "simulation vs brute-force oracle", simulation_oracle, 10.0},
        {8, "controller sigma calibration", controller_calibration, 60.0},
        {9, "cost model fit", cost_fit, 1.0},
        {10, "byte-identical reruns", determinism, 60.0},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.check();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail << "exception: " << e.what();
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > c.budget_s) outcome.require(false, "took " + num(seconds) + " s, budget " + num(c.budget_s) + " s");
        if (!outcome.pass) ++failed;
        char timing[32];
        std::snprintf(timing, sizeof(timing), "%.2f s", seconds);
        std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.title << ": " << outcome.detail.str()
                  << " (" << timing << ")" << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " acceptance criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
