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
#include <string>
#include <vector>

#include "ctxroute/cooccurrence.hpp"

namespace ctxroute {

struct GraphEdge {
    std::size_t a = 0;  // category index, a < b
    std::size_t b = 0;
    double weight = 0.0;  // in (0, 1]

    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Weighted co-occurrence graph over the non-common categories.
struct ContextGraph {
    std::vector<std::size_t> nodes;  // category indices, ascending
    std::vector<GraphEdge> edges;    // sorted by (a, b)

    /// Position of a category in `nodes`, or nodes.size() if absent.
    std::size_t node_position(std::size_t category) const;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct LayoutParams {
    int iterations = 500;
    double area = 1.0;
    /// Non-positive means "use 0.1 * sqrt(area)".
    double initial_temperature = 0.0;

    double effective_temperature() const;
    void validate() const;
};

struct Layout {
    std::vector<std::size_t> nodes;  // same order as ContextGraph::nodes
    std::vector<Point2> positions;   // one per node
    LayoutParams params;
    std::uint64_t seed = 0;
};

/// Nodes are all categories not in `common`; an edge joins a and b iff
/// rho[a][b] > 0, weighted by rho. Negative correlations give no edge.
ContextGraph build_graph(const CorrelationMatrix& rho, const CommonObjectSet& common);

/// Edge-weighted Fruchterman-Reingold in 2-D. Repulsion k^2/d between every
/// pair, attraction w*d^2/k along edges, displacement capped by a
/// temperature that cools linearly to zero. Initial positions are uniform in
/// the unit square. Deterministic in (graph, params, seed).
/// Throws NumericalError if a coordinate becomes non-finite.
Layout fr_layout(const ContextGraph& graph, const LayoutParams& params, std::uint64_t seed);

/// "category,x,y" rows.
std::string layout_csv(const Layout& layout, const std::vector<std::string>& names);

}  // namespace ctxroute
