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

#include "ctxroute/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "ctxroute/error.hpp"

namespace ctxroute {

using nlohmann::json;

std::string_view to_string(Linkage linkage) {
    switch (linkage) {
        case Linkage::ward: return "ward";
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
    }
    return "ward";
}

Linkage parse_linkage(std::string_view text) {
    if (text == "ward") return Linkage::ward;
    if (text == "single") return Linkage::single;
    if (text == "complete") return Linkage::complete;
    if (text == "average") return Linkage::average;
    throw ParameterError("unknown linkage '" + std::string(text) + "' (expected ward|single|complete|average)");
}

Dendrogram agglomerate(const std::vector<Point2>& points, const std::vector<std::size_t>& labels,
                       Linkage linkage) {
    const std::size_t n = points.size();
    if (labels.size() != n) throw ParameterError("agglomerate: one label per point required");
    Dendrogram tree;
    tree.n_leaves = n;
    if (n == 0) return tree;

    // Ward works on squared distances; the other linkages on plain distances.
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = points[i].x - points[j].x;
            const double dy = points[i].y - points[j].y;
            const double sq = dx * dx + dy * dy;
            dist[i * n + j] = dist[j * n + i] = linkage == Linkage::ward ? sq : std::sqrt(sq);
        }
    }
    auto d = [&](std::size_t i, std::size_t j) -> double& { return dist[i * n + j]; };

    std::vector<bool> active(n, true);
    std::vector<std::size_t> size(n, 1);
    std::vector<std::size_t> min_label(labels);
    std::vector<std::size_t> node_id(n);
    std::iota(node_id.begin(), node_id.end(), std::size_t{0});

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t best_i = n, best_j = n;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_lo = 0, best_hi = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                const double value = d(i, j);
                const std::size_t lo = std::min(min_label[i], min_label[j]);
                const std::size_t hi = std::max(min_label[i], min_label[j]);
                const bool better = best_i == n || value < best ||
                                    (value == best && (lo < best_lo || (lo == best_lo && hi < best_hi)));
                if (better) {
                    best = value;
                    best_i = i;
                    best_j = j;
                    best_lo = lo;
                    best_hi = hi;
                }
            }
        }

        const std::size_t i = best_i, j = best_j;
        const double ni = static_cast<double>(size[i]);
        const double nj = static_cast<double>(size[j]);
        for (std::size_t m = 0; m < n; ++m) {
            if (!active[m] || m == i || m == j) continue;
            const double nm = static_cast<double>(size[m]);
            double updated = 0.0;
            switch (linkage) {
                case Linkage::ward:
                    updated = ((ni + nm) * d(m, i) + (nj + nm) * d(m, j) - nm * d(i, j)) / (ni + nj + nm);
                    break;
                case Linkage::single: updated = std::min(d(m, i), d(m, j)); break;
                case Linkage::complete: updated = std::max(d(m, i), d(m, j)); break;
                case Linkage::average: updated = (ni * d(m, i) + nj * d(m, j)) / (ni + nj); break;
            }
            d(m, i) = d(i, m) = updated;
        }

        const double height = linkage == Linkage::ward ? std::sqrt(std::max(best, 0.0)) : best;
        tree.merges.push_back({node_id[i], node_id[j], height, size[i] + size[j]});
        size[i] += size[j];
        min_label[i] = best_lo;
        node_id[i] = n + step;
        active[j] = false;
    }
    return tree;
}

std::vector<std::size_t> cut_tree(const Dendrogram& tree, const std::vector<std::size_t>& labels, std::size_t k) {
    const std::size_t n = tree.n_leaves;
    if (labels.size() != n) throw ParameterError("cut_tree: one label per leaf required");
    if (k < 1 || k > n) throw ParameterError("cluster count k=" + std::to_string(k) + " outside [1, " +
                                             std::to_string(n) + "]");
    // Union-find over dendrogram node ids.
    std::vector<std::size_t> parent(2 * n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t step = 0; step < n - k; ++step) {
        const Merge& m = tree.merges[step];
        parent[find(m.left)] = n + step;
        parent[find(m.right)] = n + step;
    }
    std::map<std::size_t, std::size_t> root_min_label;
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
        const std::size_t root = find(leaf);
        auto [it, inserted] = root_min_label.emplace(root, labels[leaf]);
        if (!inserted) it->second = std::min(it->second, labels[leaf]);
    }
    std::vector<std::pair<std::size_t, std::size_t>> order;  // (min label, root)
    for (const auto& [root, label] : root_min_label) order.emplace_back(label, root);
    std::sort(order.begin(), order.end());
    std::map<std::size_t, std::size_t> cluster_of_root;
    for (std::size_t c = 0; c < order.size(); ++c) cluster_of_root[order[c].second] = c;
    std::vector<std::size_t> result(n);
    for (std::size_t leaf = 0; leaf < n; ++leaf) result[leaf] = cluster_of_root[find(leaf)];
    return result;
}

std::vector<std::size_t> ClusterAssignment::members(std::size_t cluster) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < assignment.size(); ++c) {
        if (assignment[c] == static_cast<int>(cluster)) out.push_back(c);
    }
    return out;
}

void ClusterAssignment::validate() const {
    if (k < 1) throw ConsistencyError("cluster assignment: k must be >= 1");
    if (assignment.size() != n_categories) throw ConsistencyError("cluster assignment: wrong category count");
    if (served_classes.size() != k) throw ConsistencyError("cluster assignment: served sets do not match k");
    for (std::size_t c = 0; c < n_categories; ++c) {
        const int a = assignment[c];
        if (a == kCommon) {
            if (!common.contains(c)) {
                throw ConsistencyError("cluster assignment: category " + std::to_string(c) +
                                       " is neither clustered nor common");
            }
        } else if (a < 0 || static_cast<std::size_t>(a) >= k) {
            throw ConsistencyError("cluster assignment: cluster id out of range");
        } else if (common.contains(c)) {
            throw ConsistencyError("cluster assignment: common category " + std::to_string(c) + " is also clustered");
        }
    }
    for (std::size_t cl = 0; cl < k; ++cl) {
        auto expected = members(cl);
        if (expected.empty()) throw ConsistencyError("cluster assignment: cluster " + std::to_string(cl) + " is empty");
        expected.insert(expected.end(), common.members.begin(), common.members.end());
        std::sort(expected.begin(), expected.end());
        if (expected != served_classes[cl]) {
            throw ConsistencyError("cluster assignment: served set of cluster " + std::to_string(cl) +
                                   " is not its members plus the common objects");
        }
    }
}

ClusterAssignment agglomerative_cluster(const Layout& layout, std::size_t k, std::size_t n_categories,
                                        Linkage linkage) {
    const std::size_t n = layout.nodes.size();
    if (k < 1 || k > n) {
        throw ParameterError("cluster count k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
    for (std::size_t node : layout.nodes) {
        if (node >= n_categories) throw ParameterError("layout node outside the category universe");
    }
    const Dendrogram tree = agglomerate(layout.positions, layout.nodes, linkage);
    const auto labels = cut_tree(tree, layout.nodes, k);

    ClusterAssignment result;
    result.k = k;
    result.n_categories = n_categories;
    result.assignment.assign(n_categories, ClusterAssignment::kCommon);
    result.served_classes.assign(k, {});
    for (std::size_t i = 0; i < n; ++i) {
        result.assignment[layout.nodes[i]] = static_cast<int>(labels[i]);
        result.served_classes[labels[i]].push_back(layout.nodes[i]);
    }
    for (auto& served : result.served_classes) std::sort(served.begin(), served.end());
    return result;
}

ClusterAssignment attach_common(const ClusterAssignment& raw, const CommonObjectSet& common) {
    for (std::size_t c : common.members) {
        if (c >= raw.n_categories) throw ConsistencyError("common object outside the category universe");
        if (raw.assignment[c] != ClusterAssignment::kCommon) {
            throw ConsistencyError("common object " + std::to_string(c) + " is already in cluster " +
                                   std::to_string(raw.assignment[c]));
        }
    }
    ClusterAssignment result = raw;
    result.common = common;
    for (std::size_t cl = 0; cl < result.k; ++cl) {
        auto served = raw.members(cl);
        served.insert(served.end(), common.members.begin(), common.members.end());
        std::sort(served.begin(), served.end());
        result.served_classes[cl] = std::move(served);
    }
    result.validate();
    return result;
}

namespace {

std::vector<std::string> names_of(const std::vector<std::size_t>& indices, const std::vector<std::string>& names) {
    std::vector<std::string> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(names.at(i));
    return out;
}

}  // namespace

json clusters_to_json(const ClusterAssignment& assignment, const std::vector<std::string>& category_names) {
    if (category_names.size() != assignment.n_categories) {
        throw ConsistencyError("cluster file: category names do not match the assignment");
    }
    json clusters = json::array();
    for (std::size_t cl = 0; cl < assignment.k; ++cl) {
        clusters.push_back({{"id", cl},
                            {"categories", names_of(assignment.members(cl), category_names)},
                            {"served", names_of(assignment.served_classes[cl], category_names)}});
    }
    return {{"format", "ctxroute.clusters"},
            {"version", 1},
            {"k", assignment.k},
            {"categories", category_names},
            {"common", names_of(assignment.common.members, category_names)},
            {"tau_common", assignment.common.tau_common},
            {"quorum", assignment.common.quorum},
            {"clusters", std::move(clusters)}};
}

std::vector<std::string> cluster_file_categories(const json& doc) {
    if (!doc.is_object() || doc.value("format", "") != "ctxroute.clusters") {
        throw SchemaError("not a cluster file (format key missing or wrong)");
    }
    return doc.at("categories").get<std::vector<std::string>>();
}

ClusterAssignment clusters_from_json(const json& doc, const std::vector<std::string>& category_names) {
    const auto file_names = cluster_file_categories(doc);
    const auto& names = category_names.empty() ? file_names : category_names;
    if (file_names != names) throw ConsistencyError("cluster file was built for a different category list");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], i);
    auto lookup = [&](const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) throw SchemaError("cluster file: unknown category '" + name + "'");
        return it->second;
    };

    ClusterAssignment result;
    result.n_categories = names.size();
    result.k = doc.at("k").get<std::size_t>();
    result.assignment.assign(names.size(), ClusterAssignment::kCommon);
    result.common.tau_common = doc.value("tau_common", kDefaultTauCommon);
    result.common.quorum = doc.value("quorum", kDefaultQuorum);
    for (const auto& name : doc.at("common").get<std::vector<std::string>>()) {
        result.common.members.push_back(lookup(name));
    }
    std::sort(result.common.members.begin(), result.common.members.end());
    const json& clusters = doc.at("clusters");
    if (clusters.size() != result.k) throw SchemaError("cluster file: 'clusters' length differs from k");
    result.served_classes.assign(result.k, {});
    for (const json& cluster : clusters) {
        const auto id = cluster.at("id").get<std::size_t>();
        if (id >= result.k) throw SchemaError("cluster file: cluster id out of range");
        for (const auto& name : cluster.at("categories").get<std::vector<std::string>>()) {
            result.assignment[lookup(name)] = static_cast<int>(id);
        }
        auto& served = result.served_classes[id];
        for (const auto& name : cluster.at("served").get<std::vector<std::string>>()) served.push_back(lookup(name));
        std::sort(served.begin(), served.end());
    }
    result.validate();
    return result;
}

}  // namespace ctxroute
