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

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"

#include "ctxroute/clustering.hpp"
#include "ctxroute/error.hpp"
#include "oracles.hpp"

using namespace ctxroute;

namespace {

std::vector<std::size_t> iota_labels(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

/// Textbook agglomeration: cluster distances recomputed from the points.
struct NaiveResult {
    std::vector<double> heights;
    std::vector<std::vector<int>> partitions;  // partitions[k] for k = n..1, canonical labels
};

double naive_distance(const std::vector<Point2>& pts, const std::vector<std::size_t>& a,
                      const std::vector<std::size_t>& b, Linkage linkage) {
    auto dist = [&](std::size_t i, std::size_t j) { return std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y); };
    switch (linkage) {
        case Linkage::single: {
            double best = std::numeric_limits<double>::infinity();
            for (auto i : a)
                for (auto j : b) best = std::min(best, dist(i, j));
            return best;
        }
        case Linkage::complete: {
            double best = 0.0;
            for (auto i : a)
                for (auto j : b) best = std::max(best, dist(i, j));
            return best;
        }
        case Linkage::average: {
            double sum = 0.0;
            for (auto i : a)
                for (auto j : b) sum += dist(i, j);
            return sum / static_cast<double>(a.size() * b.size());
        }
        case Linkage::ward: {
            Point2 ca, cb;
            for (auto i : a) {
                ca.x += pts[i].x / static_cast<double>(a.size());
                ca.y += pts[i].y / static_cast<double>(a.size());
            }
            for (auto j : b) {
                cb.x += pts[j].x / static_cast<double>(b.size());
                cb.y += pts[j].y / static_cast<double>(b.size());
            }
            const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
            return std::sqrt(2.0 * na * nb / (na + nb)) * std::hypot(ca.x - cb.x, ca.y - cb.y);
        }
    }
    return 0.0;
}

std::vector<int> canonical(const std::vector<std::vector<std::size_t>>& clusters, std::size_t n) {
    std::vector<std::vector<std::size_t>> sorted = clusters;
    for (auto& c : sorted) std::sort(c.begin(), c.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> labels(n);
    for (std::size_t c = 0; c < sorted.size(); ++c)
        for (auto i : sorted[c]) labels[i] = static_cast<int>(c);
    return labels;
}

NaiveResult naive_agglomerate(const std::vector<Point2>& pts, Linkage linkage) {
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < pts.size(); ++i) clusters.push_back({i});
    NaiveResult r;
    r.partitions.push_back(canonical(clusters, pts.size()));
    while (clusters.size() > 1) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double d = naive_distance(pts, clusters[i], clusters[j], linkage);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        r.heights.push_back(best);
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
        r.partitions.push_back(canonical(clusters, pts.size()));
    }
    return r;
}

std::vector<int> canonical_of(const std::vector<std::size_t>& labels) {
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= clusters.size()) clusters.resize(labels[i] + 1);
        clusters[labels[i]].push_back(i);
    }
    return canonical(clusters, labels.size());
}

std::vector<Point2> random_points(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Point2> pts(n);
    for (auto& p : pts) p = {u(gen), u(gen)};
    return pts;
}

}  // namespace

TEST_SUITE("clustering") {
TEST_CASE("Ward on two well separated pairs") {
    const std::vector<Point2> pts{{0, 0}, {0, 1}, {5, 0}, {5, 1}};
    const Dendrogram tree = agglomerate(pts, iota_labels(4), Linkage::ward);
    REQUIRE(tree.merges.size() == 3);
    CHECK(tree.merges[0].left == 0);
    CHECK(tree.merges[0].right == 1);
    CHECK(tree.merges[0].height == doctest::Approx(1.0));
    CHECK(tree.merges[1].left == 2);
    CHECK(tree.merges[1].right == 3);
    CHECK(tree.merges[1].height == doctest::Approx(1.0));
    // sqrt(2 * 2 * 2 / 4) * 5
    CHECK(tree.merges[2].height == doctest::Approx(5.0 * std::sqrt(2.0)));
    CHECK(tree.merges[2].size == 4);
    CHECK(cut_tree(tree, iota_labels(4), 2) == std::vector<std::size_t>{0, 0, 1, 1});
    CHECK(cut_tree(tree, {7, 6, 1, 2}, 2) == std::vector<std::size_t>{1, 1, 0, 0});
}

TEST_CASE("all linkages match a naive agglomeration") {
    for (Linkage linkage : {Linkage::ward, Linkage::single, Linkage::complete, Linkage::average}) {
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            const auto pts = random_points(seed, 12);
            const auto labels = iota_labels(pts.size());
            const Dendrogram tree = agglomerate(pts, labels, linkage);
            const NaiveResult naive = naive_agglomerate(pts, linkage);
            REQUIRE(tree.merges.size() == naive.heights.size());
            for (std::size_t s = 0; s < naive.heights.size(); ++s) {
                CHECK(tree.merges[s].height == doctest::Approx(naive.heights[s]).epsilon(1e-9));
            }
            for (std::size_t k = 1; k <= pts.size(); ++k) {
                CHECK_MESSAGE(canonical_of(cut_tree(tree, labels, k)) == naive.partitions[pts.size() - k],
                              to_string(linkage) << " seed " << seed << " k " << k);
            }
        }
    }
}

TEST_CASE("cuts are nested: k+1 splits exactly one cluster of k") {
    const auto pts = random_points(99, 15);
    const auto labels = iota_labels(pts.size());
    const Dendrogram tree = agglomerate(pts, labels, Linkage::ward);
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const auto coarse = cut_tree(tree, labels, k);
        const auto fine = cut_tree(tree, labels, k + 1);
        std::map<std::size_t, std::set<std::size_t>> parents_of_fine;
        for (std::size_t i = 0; i < pts.size(); ++i) parents_of_fine[fine[i]].insert(coarse[i]);
        for (const auto& [f, parents] : parents_of_fine) CHECK(parents.size() == 1);
        CHECK(parents_of_fine.size() == k + 1);
    }
}

TEST_CASE("partitions are invariant under translation and rotation") {
    const auto pts = random_points(5, 14);
    const auto labels = iota_labels(pts.size());
    const double angle = 0.7, c = std::cos(angle), s = std::sin(angle);
    std::vector<Point2> moved;
    for (const Point2& p : pts) moved.push_back({c * p.x - s * p.y + 3.0, s * p.x + c * p.y - 1.5});
    const Dendrogram a = agglomerate(pts, labels, Linkage::ward);
    const Dendrogram b = agglomerate(moved, labels, Linkage::ward);
    for (std::size_t k = 1; k <= pts.size(); ++k) CHECK(cut_tree(a, labels, k) == cut_tree(b, labels, k));
}

TEST_CASE("ties break toward the smallest labels") {
    // A unit square: every side is a tie at distance 1.
    const std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const Dendrogram tree = agglomerate(pts, {3, 0, 1, 2}, Linkage::single);
    // Labels 0 and 1 sit on points 1 and 2.
    CHECK(tree.merges[0].left == 1);
    CHECK(tree.merges[0].right == 2);
}

TEST_CASE("cluster assignment with common objects attached") {
    Layout layout;
    layout.nodes = {0, 1, 3, 4};
    layout.positions = {{0, 0}, {0, 0.1}, {2, 2}, {2, 2.1}};
    const ClusterAssignment raw = agglomerative_cluster(layout, 2, 5);
    CommonObjectSet common;
    common.members = {2};
    const ClusterAssignment a = attach_common(raw, common);
    CHECK(a.assignment == std::vector<int>{0, 0, ClusterAssignment::kCommon, 1, 1});
    CHECK(a.served_classes[0] == std::vector<std::size_t>{0, 1, 2});
    CHECK(a.served_classes[1] == std::vector<std::size_t>{2, 3, 4});
    CHECK(a.members(1) == std::vector<std::size_t>{3, 4});
    CHECK(a.is_common(2));
    CHECK_NOTHROW(a.validate());

    const std::vector<std::string> names{"a", "b", "person", "d", "e"};
    const auto doc = clusters_to_json(a, names);
    const ClusterAssignment back = clusters_from_json(doc, names);
    CHECK(back.assignment == a.assignment);
    CHECK(back.served_classes == a.served_classes);
    CHECK(back.common.members == a.common.members);
    CHECK(cluster_file_categories(doc) == names);
    CHECK_THROWS_AS(clusters_from_json(doc, {"a", "b", "person", "d", "zzz"}), Error);
}

TEST_CASE("invalid cluster counts are rejected") {
    Layout layout;
    layout.nodes = {0, 1};
    layout.positions = {{0, 0}, {1, 1}};
    CHECK_THROWS_AS(agglomerative_cluster(layout, 0, 2), ParameterError);
    CHECK_THROWS_AS(agglomerative_cluster(layout, 3, 2), ParameterError);
    CHECK_THROWS_AS(parse_linkage("median"), ParameterError);
    CHECK(parse_linkage("average") == Linkage::average);
}
}
