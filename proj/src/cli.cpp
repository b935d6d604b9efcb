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

#include "ctxroute/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"

#include "ctxroute/branch_design.hpp"
#include "ctxroute/clustering.hpp"
#include "ctxroute/cooccurrence.hpp"
#include "ctxroute/dataset.hpp"
#include "ctxroute/error.hpp"
#include "ctxroute/io.hpp"
#include "ctxroute/layout.hpp"
#include "ctxroute/pareto.hpp"
#include "ctxroute/runtime_sim.hpp"

namespace ctxroute {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Error raised by a stage; carries the stage name for the diagnostic.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message)
        : std::runtime_error(message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

template <typename F>
auto in_stage(const std::string& stage, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

/// Everything that determines an output. Output paths and the timestamp are
/// kept out of the embedded copy so reruns are byte-identical.
class Manifest {
public:
    explicit Manifest(std::string subcommand) : subcommand_(std::move(subcommand)) {}

    template <typename T>
    void param(const std::string& name, const T& value) {
        params_[name] = value;
    }
    void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
    void input(const std::string& role, const fs::path& path) {
        inputs_[role] = {{"file", path.filename().string()}, {"sha256", io::sha256_file(path)}};
    }
    void output(const fs::path& path) { outputs_.push_back(path.string()); }

    json embedded() const {
        return {{"tool", kToolName},
                {"version", kToolVersion},
                {"subcommand", subcommand_},
                {"parameters", params_},
                {"inputs", inputs_},
                {"seeds", seeds_}};
    }

    void write_sidecar(const fs::path& path, const std::vector<std::string>& argv) const {
        json doc = embedded();
        doc["argv"] = argv;
        doc["outputs"] = outputs_;
        doc["timestamp"] = utc_now();
        io::write_json(path, doc);
    }

private:
    static std::string utc_now() {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buffer[32];
        std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buffer;
    }

    std::string subcommand_;
    json params_ = json::object();
    json inputs_ = json::object();
    json seeds_ = json::object();
    std::vector<std::string> outputs_;
};

fs::path sidecar_path(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

void write_json_with_manifest(const fs::path& path, json doc, const Manifest& manifest) {
    doc["manifest"] = manifest.embedded();
    io::write_json(path, doc);
}

// ---------------------------------------------------------------------------
// Stage option blocks shared by the individual subcommands and `pipeline`.

struct ClusterOptions {
    double tau_common = kDefaultTauCommon;
    double quorum = kDefaultQuorum;
    int layout_iterations = 500;
    double layout_area = 1.0;
    std::uint64_t layout_seed = 0;
    std::size_t k = 2;
    std::vector<std::size_t> k_list;
    std::string linkage = "ward";
};

struct SimOptions {
    std::string mode = "single";
    double threshold = 0.5;
    std::string controller = "oracle";
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> target_accuracy;
    bool sweep = false;
    std::vector<double> thresholds{0.1, 0.2, 0.3, 0.4, 0.5};
    bool per_image = false;
};

void add_cluster_flags(CLI::App* app, ClusterOptions& o) {
    app->add_option("--tau-common", o.tau_common, "Correlation above which two categories count as co-occurring")
        ->capture_default_str();
    app->add_option("--quorum", o.quorum, "Fraction of other categories a common object must co-occur with")
        ->capture_default_str();
    app->add_option("--layout-iterations", o.layout_iterations, "Force-directed layout iterations")
        ->capture_default_str();
    app->add_option("--layout-seed", o.layout_seed, "Seed for the initial layout positions")->capture_default_str();
    app->add_option("--layout-area", o.layout_area, "Layout frame area")->capture_default_str();
    auto* k = app->add_option("--k", o.k, "Number of clusters")->capture_default_str();
    auto* k_list = app->add_option("--k-list", o.k_list, "Several cluster counts, e.g. 2,3,4,5")->delimiter(',');
    k->excludes(k_list);
    app->add_option("--linkage", o.linkage, "ward|single|complete|average")->capture_default_str();
}

void record_cluster_params(Manifest& m, const ClusterOptions& o) {
    m.param("tau_common", o.tau_common);
    m.param("quorum", o.quorum);
    m.param("layout_iterations", o.layout_iterations);
    m.param("layout_area", o.layout_area);
    m.param("linkage", o.linkage);
    if (o.k_list.empty()) {
        m.param("k", o.k);
    } else {
        m.param("k_list", o.k_list);
    }
    m.seed("layout_seed", o.layout_seed);
}

void add_sim_flags(CLI::App* app, SimOptions& o) {
    app->add_option("--mode", o.mode, "single|multi")->capture_default_str();
    app->add_option("--threshold", o.threshold, "Score threshold for multi-branch execution")->capture_default_str();
    app->add_option("--controller", o.controller, "oracle|noisy")->capture_default_str();
    app->add_option("--sigma", o.sigma, "Noise scale of the noisy controller")->capture_default_str();
    app->add_option("--seed", o.seed, "Controller noise seed")->capture_default_str();
    app->add_option("--target-accuracy", o.target_accuracy,
                    "Calibrate sigma by bisection to this controller top-1 accuracy (fraction)");
    app->add_flag("--sweep", o.sweep, "Simulate single mode and multi mode at every --thresholds value");
    app->add_option("--thresholds", o.thresholds, "Thresholds used by --sweep")->delimiter(',')->capture_default_str();
    app->add_flag("--per-image", o.per_image, "Include per-image rows in the report");
}

void record_sim_params(Manifest& m, const SimOptions& o) {
    m.param("mode", o.mode);
    m.param("threshold", o.threshold);
    m.param("controller", o.controller);
    m.param("sigma", o.sigma);
    if (o.target_accuracy) m.param("target_accuracy", *o.target_accuracy);
    m.param("sweep", o.sweep);
    m.param("thresholds", o.thresholds);
    m.param("per_image", o.per_image);
    m.seed("controller_seed", o.seed);
}

// ---------------------------------------------------------------------------
// Stage bodies.

struct ClusterResult {
    PresenceMatrix presence;
    CooccurrenceMatrix counts;
    CorrelationMatrix rho;
    CommonObjectSet common;
    ContextGraph graph;
    Layout layout;
    std::vector<ClusterAssignment> assignments;  // one per requested k
};

ClusterResult run_clustering(const Dataset& dataset, const ClusterOptions& o) {
    ClusterResult r;
    r.presence = build_presence(dataset);
    r.counts = build_cooccurrence(r.presence);
    r.rho = phi_correlation(r.counts, r.presence.n_images());
    r.common = extract_common_objects(r.rho, o.tau_common, o.quorum);
    r.graph = build_graph(r.rho, r.common);
    LayoutParams params;
    params.iterations = o.layout_iterations;
    params.area = o.layout_area;
    r.layout = fr_layout(r.graph, params, o.layout_seed);
    const Linkage linkage = parse_linkage(o.linkage);
    const auto ks = o.k_list.empty() ? std::vector<std::size_t>{o.k} : o.k_list;
    for (std::size_t k : ks) {
        const auto raw = agglomerative_cluster(r.layout, k, dataset.num_categories(), linkage);
        r.assignments.push_back(attach_common(raw, r.common));
    }
    return r;
}

std::string describe_plan(const ModelPlan& plan, const std::vector<std::string>& names) {
    std::ostringstream out;
    out << "template " << plan.name << " at " << plan.image_size << "x" << plan.image_size << ": head params "
        << plan.static_head.params << ", head MACs " << plan.static_head.macs << '\n';
    out << "branch  classes  factor    params        MACs  served\n";
    std::int64_t total_params = 0, total_macs = 0;
    for (const BranchPlan& b : plan.branches) {
        char line[128];
        std::snprintf(line, sizeof(line), "%6zu  %7lld  %6.4f  %8lld  %10lld  ", b.branch_id,
                      static_cast<long long>(b.num_classes), b.factor, static_cast<long long>(b.params),
                      static_cast<long long>(b.macs));
        out << line;
        for (std::size_t i = 0; i < b.classes.size(); ++i) out << (i ? ", " : "") << names.at(b.classes[i]);
        out << '\n';
        total_params += b.params;
        total_macs += b.macs;
    }
    out << "all branches: params " << total_params << ", MACs " << total_macs << "; static params (backbone + "
        << "controller + branches) " << plan.static_params() << '\n';
    return out.str();
}

ControllerModel resolve_controller(const Dataset& dataset, const ClusterAssignment& assignment, const SimOptions& o,
                                   std::optional<SigmaCalibration>& calibration) {
    ControllerModel controller;
    controller.seed = o.seed;
    controller.kind = parse_controller_kind(o.controller);
    controller.noise_sigma = o.sigma;
    if (o.target_accuracy) {
        calibration = calibrate_controller_sigma(dataset, assignment, *o.target_accuracy, o.seed);
        controller.kind = ControllerModel::Kind::noisy;
        controller.noise_sigma = calibration->sigma;
        controller.target_accuracy = o.target_accuracy;
    }
    controller.validate();
    return controller;
}

std::vector<RoutingPolicy> policies_for(const SimOptions& o) {
    if (!o.sweep) return {RoutingPolicy{parse_routing_mode(o.mode), o.threshold}};
    std::vector<RoutingPolicy> policies{RoutingPolicy{RoutingMode::single, 0.0}};
    for (double t : o.thresholds) policies.push_back({RoutingMode::multi, t});
    return policies;
}

ConfigPoint static_point(const ModelPlan& plan, const CostModel& cost, const std::string& group) {
    const std::int64_t params = plan.backbone.params + plan.static_head.params;
    const double gmacs = static_cast<double>(plan.backbone.macs + plan.static_head.macs) / 1e9;
    return {"static", group, 100.0, cost.latency_ms(gmacs), cost.energy_mj(gmacs),
            static_cast<double>(params) / 1e6, static_cast<double>(params) / 1e6, gmacs};
}

ConfigPoint adaptive_point(const SimulationReport& report, std::size_t k, const CostModel& cost,
                           const std::string& group) {
    const auto& a = report.aggregates;
    (void)cost;
    return {std::to_string(k) + "B-" + report.policy.label(),
            group,
            100.0 * a.mean_coverage,
            a.mean_latency_ms,
            a.mean_energy_mj,
            static_cast<double>(report.static_params) / 1e6,
            a.mean_dynamic_params / 1e6,
            a.mean_dynamic_macs / 1e9};
}

struct SimulationOutputs {
    json document;
    std::vector<ConfigPoint> points;
};

SimulationOutputs run_simulations(const Dataset& dataset, const ClusterAssignment& assignment, const ModelPlan& plan,
                                  const CostModel& cost, const SimOptions& o) {
    std::optional<SigmaCalibration> calibration;
    const ControllerModel controller = resolve_controller(dataset, assignment, o, calibration);
    const std::string group = plan.name + "-" + std::to_string(plan.image_size);
    SimulationOutputs out;
    out.points.push_back(static_point(plan, cost, group));
    json runs = json::array();
    for (const RoutingPolicy& policy : policies_for(o)) {
        const SimulationReport report = simulate(dataset, assignment, plan, controller, policy, cost);
        runs.push_back(simulation_to_json(report, o.per_image));
        out.points.push_back(adaptive_point(report, assignment.k, cost, group));
    }
    out.document = {{"format", "ctxroute.simulation_runs"}, {"version", 1}, {"k", assignment.k}, {"runs", std::move(runs)}};
    if (calibration) {
        out.document["calibration"] = {{"target_accuracy", *o.target_accuracy},
                                       {"sigma", calibration->sigma},
                                       {"measured_accuracy", calibration->accuracy},
                                       {"iterations", calibration->iterations}};
    }
    return out;
}

std::vector<std::string> cluster_names(const json& doc) { return cluster_file_categories(doc); }

// ---------------------------------------------------------------------------

struct CliState {
    // ingest
    std::string annotations;
    std::string out;
    // cluster / simulate
    std::string dataset;
    std::string matrices_dir;
    std::string layout_out;
    ClusterOptions cluster;
    // design
    std::string clusters;
    std::string template_path;
    std::int64_t image_size = 0;
    // simulate
    std::string plan;
    std::string cost_model;
    std::string points_out;
    SimOptions sim;
    // report
    std::string points;
    std::string baseline;
    std::string cost_axis = "energy";
    std::string format = "text";
    std::string fit_cost_model;
    std::string fit_prefix;
    // pipeline
    std::string out_dir;
    std::string config;
};

int do_ingest(const CliState& s, const std::vector<std::string>& argv, std::ostream& out) {
    Manifest m("ingest");
    const Dataset dataset = in_stage("ingest", [&] { return load_annotations(s.annotations); });
    in_stage("ingest", [&] {
        m.input("annotations", s.annotations);
        m.output(s.out);
        write_json_with_manifest(s.out, to_snapshot_json(dataset), m);
        m.write_sidecar(sidecar_path(s.out), argv);
    });
    out << "ingest: " << dataset.num_images() << " images, " << dataset.num_categories() << " categories -> " << s.out
        << '\n';
    return 0;
}

fs::path with_k_suffix(const fs::path& out, std::size_t k) {
    fs::path p = out;
    p.replace_filename(out.stem().string() + "_k" + std::to_string(k) + out.extension().string());
    return p;
}

int do_cluster(const CliState& s, const std::vector<std::string>& argv, std::ostream& out) {
    Manifest m("cluster");
    record_cluster_params(m, s.cluster);
    const Dataset dataset = in_stage("cluster", [&] { return load_dataset(s.dataset); });
    const ClusterResult r = in_stage("cluster", [&] { return run_clustering(dataset, s.cluster); });
    in_stage("cluster", [&] {
        m.input("dataset", s.dataset);
        const auto names = dataset.category_names();
        if (!s.matrices_dir.empty()) {
            const fs::path dir = s.matrices_dir;
            io::write_text(dir / "cooccurrence.csv", matrix_csv(r.counts, names));
            io::write_text(dir / "correlation.csv", matrix_csv(r.rho, names));
            m.output(dir / "cooccurrence.csv");
            m.output(dir / "correlation.csv");
        }
        if (!s.layout_out.empty()) {
            io::write_text(s.layout_out, layout_csv(r.layout, names));
            m.output(s.layout_out);
        }
        for (const ClusterAssignment& a : r.assignments) {
            const fs::path path = s.cluster.k_list.empty() ? fs::path(s.out) : with_k_suffix(s.out, a.k);
            m.output(path);
            write_json_with_manifest(path, clusters_to_json(a, names), m);
            out << "cluster: k=" << a.k << ", " << a.common.members.size() << " common -> " << path.string() << '\n';
        }
        m.write_sidecar(sidecar_path(s.out), argv);
    });
    return 0;
}

int do_design(const CliState& s, const std::vector<std::string>& argv, std::ostream& out) {
    Manifest m("design");
    const json clusters_doc = in_stage("design", [&] { return io::read_json(s.clusters); });
    const auto names = in_stage("design", [&] { return cluster_names(clusters_doc); });
    const ClusterAssignment assignment = in_stage("design", [&] { return clusters_from_json(clusters_doc, names); });
    const HeadTemplate head = in_stage("design", [&] { return load_template(s.template_path); });
    const std::int64_t size = s.image_size > 0 ? s.image_size
                              : head.reference_image_size > 0 ? head.reference_image_size
                                                               : 416;
    const ModelPlan plan = in_stage("design", [&] {
        const HeadTemplate sized = instantiate(head, size);
        return make_model_plan(sized, plan_branches(assignment, sized));
    });
    in_stage("design", [&] {
        m.param("image_size", size);
        m.input("clusters", s.clusters);
        m.input("template", s.template_path);
        m.output(s.out);
        write_json_with_manifest(s.out, model_plan_to_json(plan, names), m);
        m.write_sidecar(sidecar_path(s.out), argv);
    });
    out << describe_plan(plan, names);
    return 0;
}

int do_simulate(const CliState& s, const std::vector<std::string>& argv, std::ostream& out) {
    Manifest m("simulate");
    record_sim_params(m, s.sim);
    const Dataset dataset = in_stage("simulate", [&] { return load_dataset(s.dataset); });
    const auto names = dataset.category_names();
    const ClusterAssignment assignment =
        in_stage("simulate", [&] { return clusters_from_json(io::read_json(s.clusters), names); });
    const ModelPlan plan = in_stage("simulate", [&] { return model_plan_from_json(io::read_json(s.plan), names); });
    const CostModel cost = in_stage("simulate", [&] { return cost_model_from_json(io::read_json(s.cost_model)); });
    const SimulationOutputs result =
        in_stage("simulate", [&] { return run_simulations(dataset, assignment, plan, cost, s.sim); });
    in_stage("simulate", [&] {
        m.input("dataset", s.dataset);
        m.input("clusters", s.clusters);
        m.input("plan", s.plan);
        m.input("cost_model", s.cost_model);
        m.output(s.out);
        write_json_with_manifest(s.out, result.document, m);
        if (!s.points_out.empty()) {
            io::write_text(s.points_out, points_to_csv(result.points));
            m.output(s.points_out);
        }
        m.write_sidecar(sidecar_path(s.out), argv);
    });
    for (const ConfigPoint& p : result.points) {
        out << "simulate: " << p.name << " coverage " << io::format_real(p.accuracy) << "% GMACs "
            << io::format_real(p.gmacs) << '\n';
    }
    return 0;
}

int do_report(const CliState& s, const std::vector<std::string>& argv, std::ostream& out) {
    Manifest m("report");
    m.param("baseline", s.baseline);
    m.param("cost_axis", s.cost_axis);
    m.param("format", s.format);
    const auto points = in_stage("report", [&] { return load_points(s.points); });
    std::string text = in_stage("report", [&] {
        return emit_report(points, s.baseline, parse_cost_axis(s.cost_axis), parse_report_format(s.format));
    });
    in_stage("report", [&] {
        m.input("points", s.points);
        if (!s.fit_cost_model.empty()) {
            std::vector<Sample> latency, energy;
            for (const ConfigPoint& p : points) {
                if (!s.fit_prefix.empty() && p.group.rfind(s.fit_prefix, 0) != 0) continue;
                latency.push_back({p.gmacs, p.latency_ms});
                energy.push_back({p.gmacs, p.energy_mj});
            }
            m.param("fit_prefix", s.fit_prefix);
            m.output(s.fit_cost_model);
            write_json_with_manifest(s.fit_cost_model, cost_model_to_json(calibrate_cost_model(latency, energy)), m);
        }
        if (s.format == "json") {
            json doc = json::parse(text);
            doc["manifest"] = m.embedded();
            text = doc.dump(2) + "\n";
        }
        if (s.out.empty()) return;
        m.output(s.out);
        io::write_text(s.out, text);
        m.write_sidecar(sidecar_path(s.out), argv);
    });
    if (s.out.empty()) out << text;
    return 0;
}

int do_pipeline(const CliState& s, const std::vector<std::string>& argv, std::ostream& out) {
    const fs::path dir = s.out_dir;
    Manifest m("pipeline");
    if (!s.config.empty()) m.input("config", s.config);
    SimOptions sopts = s.sim;
    sopts.sweep = true;
    record_cluster_params(m, s.cluster);
    record_sim_params(m, sopts);

    const Dataset dataset = in_stage("ingest", [&] {
        Dataset d = load_dataset(s.annotations);
        m.input("annotations", s.annotations);
        io::write_json(dir / "dataset.json", to_snapshot_json(d));
        m.output(dir / "dataset.json");
        return d;
    });
    const auto names = dataset.category_names();

    ClusterOptions copts = s.cluster;
    copts.k_list.clear();
    const ClusterResult clustering = in_stage("cluster", [&] {
        ClusterResult r = run_clustering(dataset, copts);
        io::write_text(dir / "cooccurrence.csv", matrix_csv(r.counts, names));
        io::write_text(dir / "correlation.csv", matrix_csv(r.rho, names));
        io::write_text(dir / "layout.csv", layout_csv(r.layout, names));
        write_json_with_manifest(dir / "clusters.json", clusters_to_json(r.assignments.front(), names), m);
        for (const char* f : {"cooccurrence.csv", "correlation.csv", "layout.csv", "clusters.json"}) m.output(dir / f);
        return r;
    });
    const ClusterAssignment& assignment = clustering.assignments.front();

    const ModelPlan plan = in_stage("design", [&] {
        const HeadTemplate head = load_template(s.template_path);
        m.input("template", s.template_path);
        const std::int64_t size = s.image_size > 0 ? s.image_size
                                  : head.reference_image_size > 0 ? head.reference_image_size
                                                                   : 416;
        m.param("image_size", size);
        const HeadTemplate sized = instantiate(head, size);
        ModelPlan p = make_model_plan(sized, plan_branches(assignment, sized));
        write_json_with_manifest(dir / "plan.json", model_plan_to_json(p, names), m);
        io::write_text(dir / "plan.txt", describe_plan(p, names));
        m.output(dir / "plan.json");
        m.output(dir / "plan.txt");
        return p;
    });

    const SimulationOutputs sim = in_stage("simulate", [&] {
        const CostModel cost = cost_model_from_json(io::read_json(s.cost_model));
        m.input("cost_model", s.cost_model);
        SimulationOutputs r = run_simulations(dataset, assignment, plan, cost, sopts);
        write_json_with_manifest(dir / "simulation.json", r.document, m);
        io::write_text(dir / "points.csv", points_to_csv(r.points));
        m.output(dir / "simulation.json");
        m.output(dir / "points.csv");
        return r;
    });

    in_stage("report", [&] {
        const CostAxis axis = parse_cost_axis(s.cost_axis);
        io::write_text(dir / "report.txt", emit_report(sim.points, "static", axis, ReportFormat::text));
        io::write_text(dir / "report.csv", emit_report(sim.points, "static", axis, ReportFormat::csv));
        m.output(dir / "report.txt");
        m.output(dir / "report.csv");
        m.write_sidecar(dir / "run.manifest.json", argv);
    });
    out << "pipeline: " << dataset.num_images() << " images, k=" << assignment.k << ", "
        << assignment.common.members.size() << " common, " << sim.points.size() << " configurations -> "
        << dir.string() << '\n';
    return 0;
}

/// Splices the TOML file named by `--config` into the argument list of
/// `sub`. Keys map to long flags (`tau-common` or `tau_common`); anything
/// also given on the command line keeps the command-line value. Relative
/// paths in the file are taken relative to the file itself.
const std::set<std::string> kPathKeys{"annotations", "dataset", "template", "cost-model", "out-dir"};

std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& sub,
                                       std::string& config_path) {
    const auto at = std::find(args.begin(), args.end(), sub.get_name());
    if (at == args.end()) return args;
    std::vector<std::string> rest(at + 1, args.end());
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < rest.size(); ++i) {
        if (rest[i] == "--config" && i + 1 < rest.size()) {
            config_path = rest[++i];
        } else if (rest[i].rfind("--config=", 0) == 0) {
            config_path = rest[i].substr(9);
        } else {
            kept.push_back(rest[i]);
        }
    }
    if (config_path.empty()) return args;
    if (!fs::is_regular_file(config_path)) throw CLI::FileError::Missing(config_path);

    auto given = [&](const CLI::Option* opt) {
        for (const std::string& a : kept) {
            for (const std::string& name : opt->get_lnames()) {
                const std::string flag = "--" + name;
                if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
            }
        }
        return false;
    };

    std::vector<std::string> expanded(args.begin(), at + 1);
    for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_file(config_path)) {
        std::string key = item.name;
        std::replace(key.begin(), key.end(), '_', '-');
        const CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (opt == nullptr) throw CLI::ConfigError::NotConfigurable(item.fullname());
        if (given(opt)) continue;
        if (opt->get_type_size() == 0) {
            if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "1")) {
                expanded.push_back("--" + key);
            }
            continue;
        }
        std::string value;
        for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
        if (kPathKeys.count(key) != 0 && fs::path(value).is_relative()) {
            value = (fs::path(config_path).parent_path() / value).lexically_normal().string();
        }
        expanded.push_back("--" + key);
        expanded.push_back(value);
    }
    expanded.insert(expanded.end(), kept.begin(), kept.end());
    return expanded;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Context-aware branch planning and routing simulation toolkit", kToolName};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));
    CliState s;

    auto* ingest = app.add_subcommand("ingest", "Parse COCO-style annotations into a dataset snapshot");
    ingest->add_option("--annotations", s.annotations, "COCO annotation JSON")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", s.out, "Dataset snapshot path")->required();

    auto* cluster = app.add_subcommand("cluster", "Cluster categories into spatial contexts");
    cluster->add_option("--dataset,--annotations", s.dataset, "Dataset snapshot or COCO annotation file")
        ->required()
        ->check(CLI::ExistingFile);
    cluster->add_option("--out", s.out, "Cluster file (JSON)")->required();
    cluster->add_option("--matrices-dir", s.matrices_dir, "Write co-occurrence and correlation CSVs here");
    cluster->add_option("--layout-out", s.layout_out, "Write the layout as CSV (category,x,y)");
    add_cluster_flags(cluster, s.cluster);

    auto* design = app.add_subcommand("design", "Size compressed detection-head branches");
    design->add_option("--clusters", s.clusters, "Cluster file")->required()->check(CLI::ExistingFile);
    design->add_option("--template", s.template_path, "Head template JSON")->required()->check(CLI::ExistingFile);
    design->add_option("--image-size", s.image_size, "Input resolution (default: the template's reference size)");
    design->add_option("--out", s.out, "Plan file (JSON)")->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate adaptive routing over a dataset");
    simulate_cmd->add_option("--dataset", s.dataset, "Dataset snapshot or COCO annotation file")
        ->required()
        ->check(CLI::ExistingFile);
    simulate_cmd->add_option("--clusters", s.clusters, "Cluster file")->required()->check(CLI::ExistingFile);
    simulate_cmd->add_option("--plan", s.plan, "Plan file")->required()->check(CLI::ExistingFile);
    simulate_cmd->add_option("--cost-model", s.cost_model, "Cost model JSON")->required()->check(CLI::ExistingFile);
    simulate_cmd->add_option("--out", s.out, "Simulation report (JSON)")->required();
    simulate_cmd->add_option("--points-out", s.points_out, "Write configuration points (CSV) for `report`");
    add_sim_flags(simulate_cmd, s.sim);

    auto* report = app.add_subcommand("report", "Efficiency deltas and Pareto frontiers");
    report->add_option("--points", s.points, "Points file (CSV or JSON)")->required()->check(CLI::ExistingFile);
    report->add_option("--baseline", s.baseline, "Name of the baseline point")->required();
    report->add_option("--cost-axis", s.cost_axis, "energy|latency")->capture_default_str();
    report->add_option("--format", s.format, "text|csv|json")->capture_default_str();
    report->add_option("--out", s.out, "Write the report here instead of stdout");
    report->add_option("--fit-cost-model", s.fit_cost_model, "Fit an affine cost model to the points and write it");
    report->add_option("--fit-prefix", s.fit_prefix, "Only fit points whose group starts with this prefix");

    auto* pipeline = app.add_subcommand("pipeline", "Run ingest, cluster, design, simulate and report");
    pipeline->add_option("--config", s.config, "TOML file whose keys mirror the flags below");
    pipeline->add_option("--annotations,--dataset", s.annotations, "COCO annotation file or dataset snapshot")
        ->required()
        ->check(CLI::ExistingFile);
    pipeline->add_option("--out-dir", s.out_dir, "Directory for every output")->required();
    pipeline->add_option("--template", s.template_path, "Head template JSON")->required()->check(CLI::ExistingFile);
    pipeline->add_option("--image-size", s.image_size, "Input resolution");
    pipeline->add_option("--cost-model", s.cost_model, "Cost model JSON")->required()->check(CLI::ExistingFile);
    pipeline->add_option("--cost-axis", s.cost_axis, "energy|latency")->capture_default_str();
    add_cluster_flags(pipeline, s.cluster);
    add_sim_flags(pipeline, s.sim);

    std::vector<std::string> argv_store{kToolName};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;

    const std::vector<std::string> original_argv = argv_store;
    try {
        argv_store = expand_config(argv_store, *pipeline, s.config);
        for (const auto& a : argv_store) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* failing = &app;
        for (auto* sub : app.get_subcommands()) failing = sub;
        err << failing->help();
        return 2;
    }

    try {
        if (*ingest) return do_ingest(s, original_argv, out);
        if (*cluster) return do_cluster(s, original_argv, out);
        if (*design) return do_design(s, original_argv, out);
        if (*simulate_cmd) return do_simulate(s, original_argv, out);
        if (*report) return do_report(s, original_argv, out);
        if (*pipeline) return do_pipeline(s, original_argv, out);
    } catch (const StageError& e) {
        err << kToolName << " " << e.stage() << ": error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << kToolName << ": error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace ctxroute
