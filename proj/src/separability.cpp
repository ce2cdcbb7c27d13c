// Copyright 2026-present the embedlens authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "embedlens/separability.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "embedlens/error.hpp"
#include "embedlens/metrics.hpp"
#include "embedlens/reference_index.hpp"
#include "embedlens/rng.hpp"

namespace embedlens {

namespace {

std::uint64_t
content_hash(std::span<const double> x) {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (double v : x) {
        h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v));
    }
    return h;
}

double
score(const std::vector<double>& w, double bias, std::span<const double> x) {
    double s = bias;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += w[i] * x[i];
    }
    return s;
}

}  // namespace

double
probe_score(const ProbeResult& probe, std::span<const double> x) {
    if (x.size() != probe.weights.size()) {
        fail(ErrorCode::kDimensionMismatch, "probe of dimension " +
                                                std::to_string(probe.weights.size()) +
                                                " applied to a vector of length " +
                                                std::to_string(x.size()));
    }
    return score(probe.weights, probe.bias, x);
}

ProbeResult
train_linear_probe(Rows a, Rows b, std::size_t max_epochs, std::uint64_t seed) {
    if (a.empty() || b.empty()) {
        fail(ErrorCode::kEmptySet, "linear probe needs points on both sides");
    }
    if (a.dim() != b.dim()) {
        fail(ErrorCode::kDimensionMismatch, "linear probe sides have dimensions " +
                                                std::to_string(a.dim()) + " and " +
                                                std::to_string(b.dim()));
    }
    struct Point {
        std::span<const double> x;
        double label;
        std::uint64_t hash;
    };
    std::vector<Point> points;
    points.reserve(a.size() + b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        points.push_back({a[i], +1.0, content_hash(a[i])});
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        points.push_back({b[i], -1.0, content_hash(b[i])});
    }
    const std::size_t dim = a.dim();
    const std::size_t n = points.size();

    auto accuracy_of = [&](const std::vector<double>& w, double bias) {
        std::size_t right = 0;
        for (const auto& p : points) {
            if (p.label * score(w, bias, p.x) > 0.0) {
                ++right;
            }
        }
        return static_cast<double>(right) / static_cast<double>(n);
    };

    ProbeResult out;
    out.weights.assign(dim, 0.0);
    std::vector<double> w(dim, 0.0);
    double bias = 0.0;
    double best_accuracy = -1.0;
    std::vector<std::size_t> order(n);
    std::vector<std::uint64_t> keys(n);

    for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
        const std::uint64_t epoch_seed = derive_seed(seed, {epoch});
        for (std::size_t i = 0; i < n; ++i) {
            keys[i] = splitmix64(points[i].hash ^ epoch_seed);
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
            if (keys[l] != keys[r]) {
                return keys[l] < keys[r];
            }
            if (points[l].hash != points[r].hash) {
                return points[l].hash < points[r].hash;
            }
            return points[l].label > points[r].label;
        });

        std::size_t mistakes = 0;
        for (std::size_t idx : order) {
            const auto& p = points[idx];
            if (p.label * score(w, bias, p.x) <= 0.0) {
                ++mistakes;
                for (std::size_t d = 0; d < dim; ++d) {
                    w[d] += p.label * p.x[d];
                }
                bias += p.label;
            }
        }
        out.epochs = epoch + 1;
        if (mistakes == 0) {
            out.separable = true;
            out.training_accuracy = 1.0;
            out.weights = w;
            out.bias = bias;
            const double norm = euclidean_norm(w);
            double margin = std::numeric_limits<double>::infinity();
            for (const auto& p : points) {
                margin = std::min(margin, p.label * score(w, bias, p.x) / norm);
            }
            out.margin = norm > 0.0 ? margin : 0.0;
            return out;
        }
        const double acc = accuracy_of(w, bias);
        if (acc > best_accuracy) {
            best_accuracy = acc;
            out.weights = w;
            out.bias = bias;
        }
    }
    out.training_accuracy = std::max(0.0, best_accuracy);
    return out;
}

std::string_view
to_string(ModalityBlock block) {
    switch (block) {
        case ModalityBlock::kWithinPrompt:
            return "within-prompt";
        case ModalityBlock::kWithinImage:
            return "within-image";
        case ModalityBlock::kCrossModality:
            return "cross-modality";
    }
    return "unknown";
}

SimilaritySummary
modality_similarity_summary(const std::vector<EmbeddingSet>& sets) {
    if (sets.size() < 2) {
        fail(ErrorCode::kInvalidArgument, "similarity summary needs at least two sets");
    }
    std::vector<const EmbeddingSet*> refs;
    std::vector<const EmbeddingSet*> queries;
    for (const auto& s : sets) {
        (s.split() == Split::kTrain ? refs : queries).push_back(&s);
    }
    if (refs.empty() || queries.empty()) {
        fail(ErrorCode::kInvalidArgument,
             "similarity summary needs at least one train-split and one eval-split set");
    }
    SimilaritySummary out;
    double sums[3] = {0.0, 0.0, 0.0};
    std::size_t counts[3] = {0, 0, 0};
    for (const auto* r : refs) {
        const ReferenceIndex index = build_centroid_references(*r);
        for (const auto* q : queries) {
            ModalityBlock block = ModalityBlock::kCrossModality;
            if (r->modality() == q->modality()) {
                block = r->modality() == Modality::kPrompt ? ModalityBlock::kWithinPrompt
                                                           : ModalityBlock::kWithinImage;
            }
            const double sim = avg_cos_similarity(index, *q, SimilarityPairing::kNearest);
            out.rows.push_back({r->name(), q->name(), block, sim});
            sums[static_cast<int>(block)] += sim;
            counts[static_cast<int>(block)] += 1;
        }
    }
    auto mean = [&](ModalityBlock b) {
        const auto i = static_cast<int>(b);
        return counts[i] == 0 ? std::numeric_limits<double>::quiet_NaN()
                              : sums[i] / static_cast<double>(counts[i]);
    };
    out.within_prompt = mean(ModalityBlock::kWithinPrompt);
    out.within_image = mean(ModalityBlock::kWithinImage);
    out.cross_modality = mean(ModalityBlock::kCrossModality);
    return out;
}

}  // namespace embedlens
