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

// Writes the planted-context corpus shipped under data/synthetic.
//
//   make_planted_corpus --out data/synthetic/planted_corpus.json [--seed 1] [--images 500]

#include <iostream>

#include "CLI11.hpp"

#include "ctxroute/io.hpp"
#include "ctxroute/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate a COCO-style corpus with planted spatial contexts"};
    ctxroute::PlantedCorpusSpec spec = ctxroute::default_planted_spec();
    std::string out;
    app.add_option("--out", out, "Output annotation file")->required();
    app.add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
    app.add_option("--images", spec.n_images, "Number of images")->capture_default_str();
    app.add_option("--background", spec.background_fraction, "Fraction of empty images")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        const auto corpus = ctxroute::generate_planted_corpus(spec);
        ctxroute::io::write_text(out, ctxroute::to_coco_json(corpus.dataset).dump() + "\n");
        std::cout << corpus.dataset.num_images() << " images, " << corpus.dataset.num_categories()
                  << " categories -> " << out << '\n';
    } catch (const std::exception& e) {
        std::cerr << "make_planted_corpus: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
