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

#include "ctxroute/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "json.hpp"

#include "ctxroute/error.hpp"
#include "ctxroute/io.hpp"

namespace ctxroute {

using nlohmann::json;

CostAxis parse_cost_axis(std::string_view text) {
    if (text == "energy") return CostAxis::energy;
    if (text == "latency") return CostAxis::latency;
    throw ParameterError("unknown cost axis '" + std::string(text) + "' (expected energy|latency)");
}

ReportFormat parse_report_format(std::string_view text) {
    if (text == "text") return ReportFormat::text;
    if (text == "csv") return ReportFormat::csv;
    if (text == "json") return ReportFormat::json;
    throw ParameterError("unknown report format '" + std::string(text) + "' (expected text|csv|json)");
}

double efficiency(double accuracy, double energy_mj, double latency_ms) {
    if (!(energy_mj > 0.0) || !(latency_ms > 0.0)) {
        throw ParameterError("efficiency needs positive energy and latency");
    }
    return accuracy / (energy_mj * latency_ms);
}

double percent_delta(double baseline, double value) {
    if (baseline == 0.0) throw ParameterError("percent delta against a zero baseline");
    return 100.0 * (value - baseline) / baseline;
}

bool FrontierResult::on_frontier(std::size_t index) const {
    return std::binary_search(frontier.begin(), frontier.end(), index);
}

namespace {

double cost_of(const ConfigPoint& p, CostAxis axis) { return axis == CostAxis::energy ? p.energy_mj : p.latency_ms; }

bool dominates(const ConfigPoint& q, const ConfigPoint& p, CostAxis axis) {
    const double qc = cost_of(q, axis), pc = cost_of(p, axis);
    return q.accuracy >= p.accuracy && qc <= pc && (q.accuracy > p.accuracy || qc < pc);
}

}  // namespace

FrontierResult pareto_front(const std::vector<ConfigPoint>& points, CostAxis axis) {
    FrontierResult result;
    result.axis = axis;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const bool dominated = std::any_of(points.begin(), points.end(),
                                           [&](const ConfigPoint& q) { return dominates(q, points[i], axis); });
        (dominated ? result.dominated : result.frontier).push_back(i);
    }
    return result;
}

RowDeltas compute_deltas(const ConfigPoint& baseline, const ConfigPoint& point) {
    RowDeltas d;
    d.accuracy = percent_delta(baseline.accuracy, point.accuracy);
    d.latency = percent_delta(baseline.latency_ms, point.latency_ms);
    d.energy = percent_delta(baseline.energy_mj, point.energy_mj);
    const double base_dparam = baseline.dparam_m > 0.0 ? baseline.dparam_m : baseline.sparam_m;
    const double point_dparam = point.dparam_m > 0.0 ? point.dparam_m : point.sparam_m;
    d.dparam = base_dparam > 0.0 ? percent_delta(base_dparam, point_dparam) : 0.0;
    d.gmacs = baseline.gmacs > 0.0 ? percent_delta(baseline.gmacs, point.gmacs) : 0.0;
    const double eb = efficiency(baseline.accuracy, baseline.energy_mj, baseline.latency_ms);
    const double ep = efficiency(point.accuracy, point.energy_mj, point.latency_ms);
    d.efficiency = percent_delta(eb, ep);
    return d;
}

namespace {

std::string fixed(double value, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
    return buffer;
}

std::string signed_percent(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%+.1f%%", value);
    std::string text = buffer;
    if (text == "+0.0%" || text == "-0.0%") text = "0.0%";
    return text;
}

}  // namespace

std::string emit_report(const std::vector<ConfigPoint>& all_points, std::string_view baseline_name, CostAxis axis,
                        ReportFormat format) {
    auto base_it = std::find_if(all_points.begin(), all_points.end(),
                                [&](const ConfigPoint& p) { return p.name == baseline_name; });
    if (base_it == all_points.end()) throw ParameterError("unknown baseline '" + std::string(baseline_name) + "'");
    const ConfigPoint baseline = *base_it;

    std::vector<ConfigPoint> points;
    for (const ConfigPoint& p : all_points) {
        if (baseline.group.empty() || p.group == baseline.group) points.push_back(p);
    }
    const FrontierResult front = pareto_front(points, axis);
    std::vector<RowDeltas> deltas;
    for (const ConfigPoint& p : points) deltas.push_back(compute_deltas(baseline, p));
    const std::string axis_name = axis == CostAxis::energy ? "energy" : "latency";

    if (format == ReportFormat::json) {
        json rows = json::array();
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            const auto& d = deltas[i];
            rows.push_back({{"name", p.name},
                            {"group", p.group},
                            {"accuracy", p.accuracy},
                            {"latency_ms", p.latency_ms},
                            {"energy_mj", p.energy_mj},
                            {"sparam_m", p.sparam_m},
                            {"dparam_m", p.dparam_m},
                            {"gmacs", p.gmacs},
                            {"efficiency", efficiency(p.accuracy, p.energy_mj, p.latency_ms)},
                            {"delta_pct", {{"accuracy", d.accuracy},
                                           {"latency", d.latency},
                                           {"energy", d.energy},
                                           {"dparam", d.dparam},
                                           {"gmacs", d.gmacs},
                                           {"efficiency", d.efficiency}}},
                            {"frontier", front.on_frontier(i)}});
        }
        return json{{"format", "ctxroute.report"},
                    {"version", 1},
                    {"baseline", baseline.name},
                    {"cost_axis", axis_name},
                    {"rows", std::move(rows)}}
                   .dump(2) +
               "\n";
    }

    if (format == ReportFormat::csv) {
        std::ostringstream out;
        out << "name,group,accuracy,latency_ms,energy_mj,sparam_m,dparam_m,gmacs,efficiency,"
               "d_accuracy_pct,d_latency_pct,d_energy_pct,d_dparam_pct,d_gmacs_pct,d_efficiency_pct,frontier_"
            << axis_name << '\n';
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            const auto& d = deltas[i];
            out << io::csv_field(p.name) << ',' << io::csv_field(p.group) << ',' << io::format_real(p.accuracy) << ','
                << io::format_real(p.latency_ms) << ',' << io::format_real(p.energy_mj) << ','
                << io::format_real(p.sparam_m) << ',' << io::format_real(p.dparam_m) << ','
                << io::format_real(p.gmacs) << ',' << io::format_real(efficiency(p.accuracy, p.energy_mj, p.latency_ms))
                << ',' << io::format_real(d.accuracy) << ',' << io::format_real(d.latency) << ','
                << io::format_real(d.energy) << ',' << io::format_real(d.dparam) << ',' << io::format_real(d.gmacs)
                << ',' << io::format_real(d.efficiency) << ',' << (front.on_frontier(i) ? 1 : 0) << '\n';
        }
        return out.str();
    }

    // Aligned text table.
    const std::vector<std::string> header = {"model", "acc", "acc%", "lat(ms)", "lat%", "energy(mJ)", "energy%",
                                             "Sparam(M)", "Dparam(M)", "Dparam%", "MACs(G)", "MACs%", "eff%", "pareto"};
    std::vector<std::vector<std::string>> table{header};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const auto& d = deltas[i];
        table.push_back({p.name, fixed(p.accuracy, 1), signed_percent(d.accuracy), fixed(p.latency_ms, 1),
                         signed_percent(d.latency), fixed(p.energy_mj, 1), signed_percent(d.energy),
                         fixed(p.sparam_m, 2), fixed(p.dparam_m, 2), signed_percent(d.dparam), fixed(p.gmacs, 2),
                         signed_percent(d.gmacs), signed_percent(d.efficiency), front.on_frontier(i) ? "*" : ""});
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : table) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    out << "baseline: " << baseline.name << "   pareto axis: accuracy vs " << axis_name << '\n';
    for (const auto& row : table) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out << "  ";
            if (c == 0) {
                out << row[c] << std::string(width[c] - row[c].size(), ' ');
            } else {
                out << std::string(width[c] - row[c].size(), ' ') << row[c];
            }
        }
        out << '\n';
    }
    out << "efficiency = accuracy / (energy * latency); deltas are relative to the baseline\n";
    return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    fields.push_back(field);
    return fields;
}

double parse_number(const std::string& text, const std::string& where) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw SchemaError(where + ": '" + text + "' is not a number");
    }
    if (used != text.size()) throw SchemaError(where + ": '" + text + "' is not a number");
    return value;
}

ConfigPoint point_from_json(const json& doc, std::size_t index) {
    const std::string where = "points[" + std::to_string(index) + "]";
    try {
        ConfigPoint p;
        p.name = doc.at("name").get<std::string>();
        p.group = doc.value("group", "");
        p.accuracy = doc.at("accuracy").get<double>();
        p.latency_ms = doc.at("latency_ms").get<double>();
        p.energy_mj = doc.at("energy_mj").get<double>();
        p.sparam_m = doc.value("sparam_m", 0.0);
        p.dparam_m = doc.value("dparam_m", 0.0);
        p.gmacs = doc.value("gmacs", 0.0);
        return p;
    } catch (const json::exception& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

}  // namespace

std::vector<ConfigPoint> parse_points_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    std::vector<ConfigPoint> points;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        if (header.empty()) {
            header = std::move(fields);
            for (const char* required : {"name", "accuracy", "latency_ms", "energy_mj"}) {
                if (std::find(header.begin(), header.end(), required) == header.end()) {
                    throw SchemaError(std::string("points CSV: missing column '") + required + "'");
                }
            }
            continue;
        }
        const std::string where = "points CSV line " + std::to_string(line_no);
        if (fields.size() != header.size()) throw SchemaError(where + ": wrong number of fields");
        ConfigPoint p;
        for (std::size_t c = 0; c < header.size(); ++c) {
            const std::string& key = header[c];
            const std::string& value = fields[c];
            if (key == "name") p.name = value;
            else if (key == "group") p.group = value;
            else if (key == "accuracy") p.accuracy = parse_number(value, where);
            else if (key == "latency_ms") p.latency_ms = parse_number(value, where);
            else if (key == "energy_mj") p.energy_mj = parse_number(value, where);
            else if (key == "sparam_m") p.sparam_m = parse_number(value, where);
            else if (key == "dparam_m") p.dparam_m = parse_number(value, where);
            else if (key == "gmacs") p.gmacs = parse_number(value, where);
        }
        for (double v : {p.accuracy, p.latency_ms, p.energy_mj, p.sparam_m, p.dparam_m, p.gmacs}) {
            if (!std::isfinite(v)) throw SchemaError(where + ": metrics must be finite");
        }
        points.push_back(std::move(p));
    }
    return points;
}

std::vector<ConfigPoint> load_points(const std::filesystem::path& path) {
    if (path.extension() == ".json") {
        const json doc = io::read_json(path);
        const json& array = doc.is_object() ? doc.at("points") : doc;
        std::vector<ConfigPoint> points;
        for (std::size_t i = 0; i < array.size(); ++i) points.push_back(point_from_json(array[i], i));
        return points;
    }
    return parse_points_csv(io::read_text(path));
}

std::string points_to_csv(const std::vector<ConfigPoint>& points) {
    std::ostringstream out;
    out << "name,group,accuracy,latency_ms,energy_mj,sparam_m,dparam_m,gmacs\n";
    for (const ConfigPoint& p : points) {
        out << io::csv_field(p.name) << ',' << io::csv_field(p.group) << ',' << io::format_real(p.accuracy) << ',' << io::format_real(p.latency_ms)
            << ',' << io::format_real(p.energy_mj) << ',' << io::format_real(p.sparam_m) << ','
            << io::format_real(p.dparam_m) << ',' << io::format_real(p.gmacs) << '\n';
    }
    return out.str();
}

}  // namespace ctxroute
