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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ctxroute {

struct ConfigPoint {
    std::string name;
    std::string group;  // optional, e.g. "RetinaNet-416"
    double accuracy = 0.0;
    double latency_ms = 0.0;
    double energy_mj = 0.0;
    double sparam_m = 0.0;
    double dparam_m = 0.0;
    double gmacs = 0.0;

    friend bool operator==(const ConfigPoint&, const ConfigPoint&) = default;
};

enum class CostAxis { energy, latency };

CostAxis parse_cost_axis(std::string_view text);

/// accuracy / (energy * latency). Throws ParameterError unless both are > 0.
double efficiency(double accuracy, double energy_mj, double latency_ms);

/// 100 * (value - baseline) / baseline. Throws ParameterError for baseline 0.
double percent_delta(double baseline, double value);

struct FrontierResult {
    CostAxis axis = CostAxis::energy;
    std::vector<std::size_t> frontier;   // indices into the input, ascending
    std::vector<std::size_t> dominated;  // indices into the input, ascending

    bool on_frontier(std::size_t index) const;
};

/// Weak dominance on (maximize accuracy, minimize cost); points with equal
/// metrics do not dominate each other.
FrontierResult pareto_front(const std::vector<ConfigPoint>& points, CostAxis axis);

struct RowDeltas {
    double accuracy = 0.0;
    double latency = 0.0;
    double energy = 0.0;
    double dparam = 0.0;
    double gmacs = 0.0;
    double efficiency = 0.0;
};

/// Percent deltas of `point` against `baseline`. A dparam of 0 means "not
/// reported" (static model); that row is compared on its sparam instead.
RowDeltas compute_deltas(const ConfigPoint& baseline, const ConfigPoint& point);

enum class ReportFormat { text, csv, json };

ReportFormat parse_report_format(std::string_view text);

/// Table of raw metrics, deltas against the named baseline and frontier
/// markers. When points carry groups, only the baseline's group is reported.
/// Throws ParameterError if the baseline is unknown.
std::string emit_report(const std::vector<ConfigPoint>& points, std::string_view baseline_name,
                        CostAxis axis, ReportFormat format);

/// Reads points from CSV (header names the columns) or JSON (array or
/// {"points": [...]}), chosen by extension.
std::vector<ConfigPoint> load_points(const std::filesystem::path& path);
std::vector<ConfigPoint> parse_points_csv(const std::string& text);
std::string points_to_csv(const std::vector<ConfigPoint>& points);

}  // namespace ctxroute
