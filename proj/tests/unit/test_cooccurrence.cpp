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

#include "doctest.h"

#include "ctxroute/cooccurrence.hpp"
#include "ctxroute/error.hpp"
#include "oracles.hpp"

using namespace ctxroute;

TEST_SUITE("cooccurrence") {
TEST_CASE("counts match pairwise enumeration on random datasets") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Dataset d = testing::random_dataset(seed, 80, 7, 0.1 * static_cast<double>(seed));
        const auto counts = build_cooccurrence(build_presence(d));
        REQUIRE(counts.size() == 7);
        for (std::size_t a = 0; a < 7; ++a) {
            for (std::size_t b = 0; b < 7; ++b) {
                CHECK(counts(a, b) == testing::brute_cooccurrence(d, a, b));
            }
        }
    }
}

TEST_CASE("repeated instances count once per image") {
    const Dataset d({{1, "a"}, {2, "b"}},
                    {{10, {{1, {0, 0, 1, 1}}, {1, {0, 0, 1, 1}}, {1, {0, 0, 1, 1}}, {2, {0, 0, 1, 1}}}}, {11, {}}});
    const auto counts = build_cooccurrence(build_presence(d));
    CHECK(counts(0, 0) == 1);
    CHECK(counts(0, 1) == 1);
    CHECK(counts(1, 1) == 1);
}

TEST_CASE("phi equals Pearson correlation of presence vectors") {
    for (std::uint64_t seed = 11; seed <= 14; ++seed) {
        const Dataset d = testing::random_dataset(seed, 120, 6, 0.35);
        const auto presence = build_presence(d);
        const auto rho = phi_correlation(presence);
        const auto rho_counts = phi_correlation(build_cooccurrence(presence), presence.n_images());
        for (std::size_t a = 0; a < 6; ++a) {
            for (std::size_t b = 0; b < 6; ++b) {
                const double want = a == b ? 1.0 : testing::pearson_presence(d, a, b);
                CHECK(rho(a, b) == doctest::Approx(want).epsilon(1e-12));
                CHECK(rho_counts(a, b) == rho(a, b));
                CHECK(rho(a, b) == rho(b, a));
            }
        }
    }
}

TEST_CASE("constant columns get zero correlation") {
    // "all" is in every image, "none" in none.
    const Dataset d({{1, "all"}, {2, "none"}, {3, "some"}},
                    {{1, {{1, {0, 0, 1, 1}}, {3, {0, 0, 1, 1}}}}, {2, {{1, {0, 0, 1, 1}}}}, {3, {{1, {0, 0, 1, 1}}}}});
    const auto rho = phi_correlation(build_presence(d));
    CHECK(rho(0, 2) == 0.0);
    CHECK(rho(1, 2) == 0.0);
    CHECK(rho(0, 1) == 0.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::isfinite(rho(i, i)));
}

TEST_CASE("common objects need strictly more than quorum * (n - 1) partners") {
    // 5 categories; index 0 correlates with 3 of the 4 others.
    CorrelationMatrix rho(5);
    for (std::size_t i = 0; i < 5; ++i) rho(i, i) = 1.0;
    auto link = [&](std::size_t a, std::size_t b, double v) { rho(a, b) = rho(b, a) = v; };
    link(0, 1, 0.3);
    link(0, 2, 0.3);
    link(0, 3, 0.3);
    link(0, 4, 0.05);
    // 3 > 0.5 * 4 but not > 0.75 * 4.
    CHECK(extract_common_objects(rho, 0.1, 0.75).members.empty());
    CHECK(extract_common_objects(rho, 0.1, 0.5).members == std::vector<std::size_t>{0});
    link(0, 4, 0.2);
    const auto common = extract_common_objects(rho, 0.1, 0.75);
    CHECK(common.members == std::vector<std::size_t>{0});
    CHECK(common.contains(0));
    CHECK_FALSE(common.contains(1));
    // A correlation equal to tau does not count.
    link(0, 4, 0.1);
    CHECK(extract_common_objects(rho, 0.1, 0.75).members.empty());
}

TEST_CASE("invalid thresholds are rejected") {
    CorrelationMatrix rho(2);
    CHECK_THROWS_AS(extract_common_objects(rho, -0.5, 0.75), ParameterError);
    CHECK_THROWS_AS(extract_common_objects(rho, 0.1, 1.5), ParameterError);
    CHECK_THROWS_AS(extract_common_objects(rho, 0.1, -0.1), ParameterError);
}

TEST_CASE("matrix CSV has a header row and one row per category") {
    const Dataset d({{1, "a"}, {2, "b,c"}}, {{1, {{1, {0, 0, 1, 1}}, {2, {0, 0, 1, 1}}}}, {2, {{1, {0, 0, 1, 1}}}}});
    const std::string csv = matrix_csv(build_cooccurrence(build_presence(d)), d.category_names());
    CHECK(csv == "category,a,\"b,c\"\na,2,1\n\"b,c\",1,1\n");
}
}
