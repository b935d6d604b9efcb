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

#include <cstdint>
#include <string>
#include <vector>

#include "ctxroute/dataset.hpp"

namespace ctxroute {

/// Generator for corpora with known spatial contexts. Each image is either
/// background (no objects) or drawn from one context: classes of that context
/// appear with `within_probability`, classes of other contexts with
/// `cross_probability`, and common classes with `common_probability`.
struct PlantedCorpusSpec {
    std::vector<std::vector<std::string>> contexts;
    std::vector<std::string> common;
    int n_images = 500;
    double within_probability = 0.6;
    double cross_probability = 0.02;
    double common_probability = 0.9;
    double background_fraction = 0.3;
    int max_instances_per_class = 3;
    std::uint64_t seed = 1;
};

struct PlantedCorpus {
    Dataset dataset;
    /// Planted context per category index; -1 for common classes.
    std::vector<int> truth;
};

/// Ten indoor and ten outdoor classes plus "person" as the common class.
PlantedCorpusSpec default_planted_spec();

PlantedCorpus generate_planted_corpus(const PlantedCorpusSpec& spec);

}  // namespace ctxroute
