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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ctxroute/cooccurrence.hpp"
#include "ctxroute/layout.hpp"

namespace ctxroute {

enum class Linkage { ward, single, complete, average };

std::string_view to_string(Linkage linkage);
Linkage parse_linkage(std::string_view text);

struct Merge {
    std::size_t left = 0;   // cluster ids: < n are leaves, n + i is merge i
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;
};

/// Full merge history over n points; merges.size() == n - 1.
struct Dendrogram {
    std::size_t n_leaves = 0;
    std::vector<Merge> merges;
};

/// Bottom-up agglomeration over Euclidean distance. Among equal-cost pairs
/// the one whose union has the smallest minimum label merges first, then the
/// smallest maximum of the two cluster minima. `labels[i]` orders leaves for
/// tie-breaking (category indices).
Dendrogram agglomerate(const std::vector<Point2>& points, const std::vector<std::size_t>& labels,
                       Linkage linkage);

/// Flat labels after stopping with k clusters; clusters numbered by their
/// smallest tie-break label.
std::vector<std::size_t> cut_tree(const Dendrogram& tree, const std::vector<std::size_t>& labels,
                                  std::size_t k);

/// Category -> cluster mapping with the common objects served by every cluster.
struct ClusterAssignment {
    static constexpr int kCommon = -1;

    std::size_t k = 0;
    std::size_t n_categories = 0;
    std::vector<int> assignment;  // per category index; kCommon for common objects
    CommonObjectSet common;
    std::vector<std::vector<std::size_t>> served_classes;  // per cluster, sorted

    /// Categories assigned to cluster c, common objects excluded.
    std::vector<std::size_t> members(std::size_t cluster) const;
    bool is_common(std::size_t category) const { return assignment[category] == kCommon; }

    /// Throws ConsistencyError if any invariant is violated.
    void validate() const;
};

/// Clusters the laid-out nodes into k groups. The result has no common
/// objects attached: served_classes equals the raw clusters.
/// Throws ParameterError unless 1 <= k <= |nodes|.
ClusterAssignment agglomerative_cluster(const Layout& layout, std::size_t k, std::size_t n_categories,
                                        Linkage linkage = Linkage::ward);

/// Adds every common object to every cluster's served set.
ClusterAssignment attach_common(const ClusterAssignment& raw, const CommonObjectSet& common);

/// Cluster file: cluster id -> category names plus the common set.
nlohmann::json clusters_to_json(const ClusterAssignment& assignment,
                                const std::vector<std::string>& category_names);
ClusterAssignment clusters_from_json(const nlohmann::json& doc,
                                     const std::vector<std::string>& category_names);

/// Category names stored in a cluster file, in category index order.
std::vector<std::string> cluster_file_categories(const nlohmann::json& doc);

}  // namespace ctxroute
