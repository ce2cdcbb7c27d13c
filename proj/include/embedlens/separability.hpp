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

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "embedlens/dataset.hpp"
#include "embedlens/geometry.hpp"

namespace embedlens {

inline constexpr std::size_t kDefaultProbeEpochs = 1000;

struct ProbeResult {
    /// True only when an epoch finished with zero mistakes; false means "not
    /// separated within the epoch budget", not a proof of inseparability.
    bool separable = false;
    double training_accuracy = 0.0;
    std::size_t epochs = 0;
    /// min_i y_i (w.x_i + b) / |w| when separable, else 0.
    double margin = 0.0;
    std::vector<double> weights;
    double bias = 0.0;
};

/// Perceptron with bias, labels a -> +1 and b -> -1, reshuffled each epoch.
/// The visiting order depends only on the seed, the epoch and the point
/// coordinates, so swapping a and b negates weights and bias exactly. When
/// the budget runs out the best-accuracy weights seen at an epoch end are
/// returned.
ProbeResult
train_linear_probe(Rows a, Rows b, std::size_t max_epochs, std::uint64_t seed);

/// Signed decision value w.x + b.
double
probe_score(const ProbeResult& probe, std::span<const double> x);

enum class ModalityBlock { kWithinPrompt, kWithinImage, kCrossModality };

std::string_view
to_string(ModalityBlock block);

struct SimilarityRow {
    std::string reference_set;
    std::string query_set;
    ModalityBlock block;
    double avg_cos_similarity = 0.0;
};

struct SimilaritySummary {
    std::vector<SimilarityRow> rows;
    /// Mean over the rows of each block; NaN when a block has no rows.
    double within_prompt = 0.0;
    double within_image = 0.0;
    double cross_modality = 0.0;
};

/// avg_cos_similarity (nearest centroid) for every (train-split reference,
/// eval-split query) pair, grouped by the modalities of the two sides.
/// Needs >= 2 sets including at least one of each split.
SimilaritySummary
modality_similarity_summary(const std::vector<EmbeddingSet>& sets);

}  // namespace embedlens
