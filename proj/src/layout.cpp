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

#include "ctxroute/layout.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ctxroute/error.hpp"
#include "ctxroute/io.hpp"
#include "ctxroute/rng.hpp"

namespace ctxroute {

std::size_t ContextGraph::node_position(std::size_t category) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), category);
    if (it == nodes.end() || *it != category) return nodes.size();
    return static_cast<std::size_t>(it - nodes.begin());
}

double LayoutParams::effective_temperature() const {
    return initial_temperature > 0.0 ? initial_temperature : 0.1 * std::sqrt(area);
}

void LayoutParams::validate() const {
    if (iterations < 1) throw ParameterError("layout iterations must be >= 1");
    if (!(area > 0.0) || !std::isfinite(area)) throw ParameterError("layout area must be > 0");
    if (!std::isfinite(initial_temperature)) throw ParameterError("layout temperature must be finite");
}

ContextGraph build_graph(const CorrelationMatrix& rho, const CommonObjectSet& common) {
    ContextGraph graph;
    for (std::size_t c = 0; c < rho.size(); ++c) {
        if (!common.contains(c)) graph.nodes.push_back(c);
    }
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < graph.nodes.size(); ++j) {
            const double w = std::min(std::max(rho(graph.nodes[i], graph.nodes[j]), 0.0), 1.0);
            if (w > 0.0) graph.edges.push_back({graph.nodes[i], graph.nodes[j], w});
        }
    }
    return graph;
}

Layout fr_layout(const ContextGraph& graph, const LayoutParams& params, std::uint64_t seed) {
    params.validate();
    const std::size_t n = graph.nodes.size();
    if (n == 0) throw ParameterError("layout needs at least one node");

    struct LocalEdge {
        std::size_t u, v;
        double w;
    };
    std::vector<LocalEdge> edges;
    edges.reserve(graph.edges.size());
    for (const GraphEdge& e : graph.edges) {
        const std::size_t u = graph.node_position(e.a);
        const std::size_t v = graph.node_position(e.b);
        if (u == n || v == n) throw ParameterError("graph edge refers to a category that is not a node");
        edges.push_back({u, v, e.weight});
    }

    Layout layout;
    layout.nodes = graph.nodes;
    layout.params = params;
    layout.seed = seed;
    layout.positions.resize(n);
    Rng rng(seed);
    for (Point2& p : layout.positions) {
        p.x = rng.uniform();
        p.y = rng.uniform();
    }

    const double k = std::sqrt(params.area / static_cast<double>(n));
    const double k2 = k * k;
    const double t0 = params.effective_temperature();
    std::vector<Point2> disp(n);
    auto& pos = layout.positions;

    for (int iter = 0; iter < params.iterations; ++iter) {
        const double temperature = t0 * (1.0 - static_cast<double>(iter) / params.iterations);
        std::fill(disp.begin(), disp.end(), Point2{});

        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t v = u + 1; v < n; ++v) {
                double dx = pos[u].x - pos[v].x;
                double dy = pos[u].y - pos[v].y;
                double d = std::hypot(dx, dy);
                if (d < 1e-12) {
                    // Coincident nodes: push apart along a fixed direction.
                    dx = 1e-9 * static_cast<double>(v - u);
                    dy = 1e-9;
                    d = std::hypot(dx, dy);
                }
                const double f = k2 / d;
                disp[u].x += dx / d * f;
                disp[u].y += dy / d * f;
                disp[v].x -= dx / d * f;
                disp[v].y -= dy / d * f;
            }
        }

        for (const LocalEdge& e : edges) {
            const double dx = pos[e.u].x - pos[e.v].x;
            const double dy = pos[e.u].y - pos[e.v].y;
            const double d = std::hypot(dx, dy);
            if (d == 0.0) continue;
            const double f = e.w * d * d / k;
            disp[e.u].x -= dx / d * f;
            disp[e.u].y -= dy / d * f;
            disp[e.v].x += dx / d * f;
            disp[e.v].y += dy / d * f;
        }

        for (std::size_t u = 0; u < n; ++u) {
            const double len = std::hypot(disp[u].x, disp[u].y);
            if (len > 0.0) {
                const double step = std::min(len, temperature);
                pos[u].x += disp[u].x / len * step;
                pos[u].y += disp[u].y / len * step;
            }
            if (!std::isfinite(pos[u].x) || !std::isfinite(pos[u].y)) {
                throw NumericalError("layout produced a non-finite coordinate at iteration " + std::to_string(iter));
            }
        }
    }
    return layout;
}

std::string layout_csv(const Layout& layout, const std::vector<std::string>& names) {
    std::ostringstream out;
    out << "category,x,y\n";
    for (std::size_t i = 0; i < layout.nodes.size(); ++i) {
        if (layout.nodes[i] >= names.size()) throw ParameterError("layout CSV: node outside the category list");
        out << io::csv_field(names[layout.nodes[i]]) << ',' << io::format_real(layout.positions[i].x) << ','
            << io::format_real(layout.positions[i].y) << '\n';
    }
    return out.str();
}

}  // namespace ctxroute
