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
#include <utility>

#include "embedlens/dataset.hpp"
#include "embedlens/geometry.hpp"

namespace embedlens {

/// Synthetic labeled clusters on the unit sphere with separate dials for
/// diversity (spread) and concept drift (shift).
///
/// Samples are unit_normalize(mean + spread * g) with g standard normal per
/// coordinate. This is not von Mises-Fisher sampling; it only guarantees
/// that spread grows monotonically with the dial.
struct ClusterSpec {
    std::string name = "sim";
    std::size_t dimension = 16;
    std::size_t classes = 10;
    std::size_t per_class = 100;
    double spread = 0.1;
    /// Angle between each class's reference mean and its query mean.
    double shift_degrees = 0.0;
    /// Fraction of each class's reference samples drawn around another
    /// class's mean while keeping this class's label.
    double outlier_fraction = 0.0;
    std::uint64_t seed = 0;
};

/// n samples around `mean`; spread == 0 gives n exact copies of mean.
Embeddings
sample_class_cluster(const UnitVector& mean, double spread, std::size_t n, std::uint64_t seed);

/// Uniformly random unit vector.
UnitVector
random_direction(std::size_t dimension, std::uint64_t seed);

/// (references: train split, queries: eval split), both image modality,
/// class ids 0..C-1. Each class has a seeded uniform mean m and a seeded
/// unit u orthogonal to m; the query mean is cos(theta) m + sin(theta) u, so
/// at zero spread the per-class centroid shift is exactly 1 - cos(theta).
/// kDegenerateRotation when dimension < 2.
std::pair<EmbeddingSet, EmbeddingSet>
simulate_experiment(const ClusterSpec& spec);

/// Moves every embedding by offset * direction and renormalizes, producing
/// a prompt-modality copy named `name`. Builds an artificial modality gap.
EmbeddingSet
apply_modality_gap(const EmbeddingSet& set,
                   double offset,
                   const UnitVector& direction,
                   std::string name);

}  // namespace embedlens
