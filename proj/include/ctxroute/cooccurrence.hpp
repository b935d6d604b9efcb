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

#include "ctxroute/dataset.hpp"
#include "ctxroute/matrix.hpp"

namespace ctxroute {

/// Per-image binary category presence. Row i, column c is 1 iff image i has
/// at least one instance of category index c.
class PresenceMatrix {
public:
    PresenceMatrix() = default;
    PresenceMatrix(std::size_t n_images, std::size_t n_categories)
        : n_images_(n_images), n_categories_(n_categories), bits_(n_images * n_categories, 0) {}

    std::size_t n_images() const { return n_images_; }
    std::size_t n_categories() const { return n_categories_; }

    bool get(std::size_t image, std::size_t category) const {
        return bits_[image * n_categories_ + category] != 0;
    }
    void set(std::size_t image, std::size_t category, bool present = true) {
        bits_[image * n_categories_ + category] = present ? 1 : 0;
    }

    friend bool operator==(const PresenceMatrix&, const PresenceMatrix&) = default;

private:
    std::size_t n_images_ = 0;
    std::size_t n_categories_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// C[a][b] = number of images containing both a and b; diagonal is the
/// per-category image count.
using CooccurrenceMatrix = SquareMatrix<std::int64_t>;

/// Pairwise phi coefficients of presence columns, in [-1, 1].
using CorrelationMatrix = SquareMatrix<double>;

struct CommonObjectSet {
    std::vector<std::size_t> members;  // sorted category indices
    double tau_common = 0.1;
    double quorum = 0.75;

    bool contains(std::size_t category) const;

    friend bool operator==(const CommonObjectSet&, const CommonObjectSet&) = default;
};

inline constexpr double kDefaultTauCommon = 0.1;
inline constexpr double kDefaultQuorum = 0.75;

PresenceMatrix build_presence(const Dataset& dataset);

CooccurrenceMatrix build_cooccurrence(const PresenceMatrix& presence);

/// Phi coefficient from the 2x2 contingency table of each column pair.
/// A constant column correlates 0 with everything, itself included.
/// Requires at least two images.
CorrelationMatrix phi_correlation(const PresenceMatrix& presence);

/// Same result computed from an already built co-occurrence matrix; the
/// contingency counts are recoverable from C and the image count.
CorrelationMatrix phi_correlation(const CooccurrenceMatrix& counts, std::size_t n_images);

/// Category a is common iff |{b != a : rho[a][b] > tau_common}| > quorum * (n - 1).
CommonObjectSet extract_common_objects(const CorrelationMatrix& rho,
                                       double tau_common = kDefaultTauCommon,
                                       double quorum = kDefaultQuorum);

/// CSV with a header row and a leading name column.
std::string matrix_csv(const CooccurrenceMatrix& m, const std::vector<std::string>& names);
std::string matrix_csv(const CorrelationMatrix& m, const std::vector<std::string>& names);

}  // namespace ctxroute
