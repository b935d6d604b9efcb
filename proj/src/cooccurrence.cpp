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

#include "ctxroute/cooccurrence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ctxroute/error.hpp"
#include "ctxroute/io.hpp"

namespace ctxroute {

bool CommonObjectSet::contains(std::size_t category) const {
    return std::binary_search(members.begin(), members.end(), category);
}

PresenceMatrix build_presence(const Dataset& dataset) {
    PresenceMatrix presence(dataset.num_images(), dataset.num_categories());
    for (std::size_t i = 0; i < dataset.num_images(); ++i) {
        for (const Instance& inst : dataset.images()[i].instances) {
            presence.set(i, dataset.category_index(inst.category_id));
        }
    }
    return presence;
}

CooccurrenceMatrix build_cooccurrence(const PresenceMatrix& presence) {
    const std::size_t n = presence.n_categories();
    CooccurrenceMatrix counts(n, 0);
    std::vector<std::size_t> present;
    for (std::size_t i = 0; i < presence.n_images(); ++i) {
        present.clear();
        for (std::size_t c = 0; c < n; ++c) {
            if (presence.get(i, c)) present.push_back(c);
        }
        for (std::size_t x = 0; x < present.size(); ++x) {
            counts(present[x], present[x]) += 1;
            for (std::size_t y = x + 1; y < present.size(); ++y) {
                counts(present[x], present[y]) += 1;
                counts(present[y], present[x]) += 1;
            }
        }
    }
    return counts;
}

CorrelationMatrix phi_correlation(const CooccurrenceMatrix& counts, std::size_t n_images) {
    if (n_images < 2) throw ParameterError("phi correlation needs at least 2 images");
    const std::size_t n = counts.size();
    const double total = static_cast<double>(n_images);
    CorrelationMatrix rho(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            const double n11 = static_cast<double>(counts(a, b));
            const double row1 = static_cast<double>(counts(a, a));
            const double col1 = static_cast<double>(counts(b, b));
            const double row0 = total - row1;
            const double col0 = total - col1;
            double value = 0.0;
            if (row1 > 0.0 && row0 > 0.0 && col1 > 0.0 && col0 > 0.0) {
                const double n10 = row1 - n11;
                const double n01 = col1 - n11;
                const double n00 = total - row1 - col1 + n11;
                value = (n11 * n00 - n10 * n01) / std::sqrt(row1 * row0 * col1 * col0);
                value = std::clamp(value, -1.0, 1.0);
            }
            rho(a, b) = value;
            rho(b, a) = value;
        }
    }
    return rho;
}

CorrelationMatrix phi_correlation(const PresenceMatrix& presence) {
    return phi_correlation(build_cooccurrence(presence), presence.n_images());
}

CommonObjectSet extract_common_objects(const CorrelationMatrix& rho, double tau_common, double quorum) {
    if (!(quorum > 0.0 && quorum < 1.0)) throw ParameterError("quorum must lie in (0, 1)");
    if (!(tau_common >= 0.0)) throw ParameterError("tau_common must be >= 0");
    CommonObjectSet common;
    common.tau_common = tau_common;
    common.quorum = quorum;
    const std::size_t n = rho.size();
    const double needed = quorum * static_cast<double>(n == 0 ? 0 : n - 1);
    for (std::size_t a = 0; a < n; ++a) {
        std::size_t correlated = 0;
        for (std::size_t b = 0; b < n; ++b) {
            if (b != a && rho(a, b) > tau_common) ++correlated;
        }
        if (static_cast<double>(correlated) > needed) common.members.push_back(a);
    }
    return common;
}

namespace {

template <typename T, typename Format>
std::string write_csv(const SquareMatrix<T>& m, const std::vector<std::string>& names, Format format) {
    if (names.size() != m.size()) throw ParameterError("matrix CSV: name count does not match matrix size");
    std::ostringstream out;
    out << "category";
    for (const auto& name : names) out << ',' << io::csv_field(name);
    out << '\n';
    for (std::size_t r = 0; r < m.size(); ++r) {
        out << io::csv_field(names[r]);
        for (std::size_t c = 0; c < m.size(); ++c) out << ',' << format(m(r, c));
        out << '\n';
    }
    return out.str();
}

}  // namespace

std::string matrix_csv(const CooccurrenceMatrix& m, const std::vector<std::string>& names) {
    return write_csv(m, names, [](std::int64_t v) { return std::to_string(v); });
}

std::string matrix_csv(const CorrelationMatrix& m, const std::vector<std::string>& names) {
    return write_csv(m, names, [](double v) { return io::format_real(v); });
}

}  // namespace ctxroute
