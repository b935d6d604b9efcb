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

#include "ctxroute/synthetic.hpp"

#include <cmath>

#include "ctxroute/error.hpp"
#include "ctxroute/rng.hpp"

namespace ctxroute {

PlantedCorpusSpec default_planted_spec() {
    PlantedCorpusSpec spec;
    spec.contexts = {
        {"couch", "tv", "bed", "chair", "oven", "sink", "refrigerator", "microwave", "toaster", "dining table"},
        {"car", "truck", "bus", "traffic light", "stop sign", "parking meter", "bicycle", "motorcycle", "fire hydrant",
         "bench"},
    };
    spec.common = {"person"};
    return spec;
}

PlantedCorpus generate_planted_corpus(const PlantedCorpusSpec& spec) {
    if (spec.contexts.empty()) throw ParameterError("planted corpus needs at least one context");
    if (spec.n_images < 1) throw ParameterError("planted corpus needs at least one image");
    if (spec.max_instances_per_class < 1) throw ParameterError("max_instances_per_class must be >= 1");

    // Category ids are 1-based in declaration order: contexts first, then common.
    std::vector<Category> categories;
    PlantedCorpus corpus;
    std::vector<std::vector<std::int64_t>> context_ids(spec.contexts.size());
    for (std::size_t ctx = 0; ctx < spec.contexts.size(); ++ctx) {
        for (const auto& name : spec.contexts[ctx]) {
            const auto id = static_cast<std::int64_t>(categories.size() + 1);
            categories.push_back({id, name});
            context_ids[ctx].push_back(id);
            corpus.truth.push_back(static_cast<int>(ctx));
        }
    }
    std::vector<std::int64_t> common_ids;
    for (const auto& name : spec.common) {
        const auto id = static_cast<std::int64_t>(categories.size() + 1);
        categories.push_back({id, name});
        common_ids.push_back(id);
        corpus.truth.push_back(-1);
    }

    Rng rng(spec.seed);
    auto add_instances = [&](ImageRecord& image, std::int64_t category) {
        const int count = 1 + static_cast<int>(rng.uniform() * spec.max_instances_per_class);
        for (int i = 0; i < count; ++i) {
            const double w = 8.0 + 120.0 * rng.uniform();
            const double h = 8.0 + 120.0 * rng.uniform();
            image.instances.push_back({category, {std::floor(500.0 * rng.uniform()), std::floor(350.0 * rng.uniform()),
                                                  std::floor(w), std::floor(h)}});
        }
    };

    std::vector<ImageRecord> images;
    images.reserve(static_cast<std::size_t>(spec.n_images));
    for (int i = 0; i < spec.n_images; ++i) {
        ImageRecord image{i + 1, {}};
        if (!rng.bernoulli(spec.background_fraction)) {
            const auto ctx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(spec.contexts.size()));
            for (std::size_t other = 0; other < context_ids.size(); ++other) {
                const double p = other == ctx ? spec.within_probability : spec.cross_probability;
                for (std::int64_t id : context_ids[other]) {
                    if (rng.bernoulli(p)) add_instances(image, id);
                }
            }
            for (std::int64_t id : common_ids) {
                if (rng.bernoulli(spec.common_probability)) add_instances(image, id);
            }
        }
        images.push_back(std::move(image));
    }
    corpus.dataset = Dataset(std::move(categories), std::move(images));
    return corpus;
}

}  // namespace ctxroute
