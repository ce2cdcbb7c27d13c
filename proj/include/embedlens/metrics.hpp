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
#include <vector>

#include "embedlens/dataset.hpp"
#include "embedlens/geometry.hpp"
#include "embedlens/reference_index.hpp"

namespace embedlens {

/// Centroid Distance of one class: mean over its embeddings of
/// codiff(e, centroid)^2, where centroid is the spherical centroid.
double
class_centroid_distance(Rows embeddings);

struct ClassMetrics {
    ClassId id;
    UnitVector centroid;
    double centroid_distance = 0.0;
    std::size_t n = 0;
};

struct SetMetrics {
    std::vector<ClassMetrics> classes;
    /// Unweighted mean of the per-class values.
    double set_centroid_distance = 0.0;
};

/// Per-class Centroid Distance (computed in parallel across classes) and the
/// unweighted mean across classes.
SetMetrics
set_centroid_distance(const EmbeddingSet& set);

/// codiff between the spherical centroids of two embedding lists.
double
centroid_shift(Rows a, Rows b);

enum class FrechetMeanTerm {
    kSquared,   // |mu_x - mu_y|^2, the usual FD/FID convention
    kAbsolute,  // |mu_x - mu_y|, the unsquared form
};

struct FrechetResult {
    double mean_term = 0.0;
    /// tr(S_x + S_y - 2 (S_x S_y)^{1/2})
    double trace_term = 0.0;
    double total = 0.0;
};

/// Fréchet distance between the Gaussian fits of two samples. Covariances
/// use 1/(N-1). The cross term is tr((S_x^{1/2} S_y S_x^{1/2})^{1/2}), taken
/// from a symmetric eigendecomposition; eigenvalues below -1e-8 (relative to
/// the largest magnitude when that exceeds 1) are kNumericalFailure, smaller
/// negatives are clamped to zero. Needs >= 2 rows per side (kTooFewSamples).
FrechetResult
frechet_distance(Rows x, Rows y, FrechetMeanTerm mean_term = FrechetMeanTerm::kSquared);

enum class SimilarityPairing {
    kNearest,    // each query with its most similar reference entry
    kTrueClass,  // each query with its own class's reference entry
};

/// Mean over all queries of the cosine similarity between the normalized
/// query and its paired reference entry. kTrueClass requires a centroid
/// index containing every query class (kClassUniverseMismatch otherwise).
double
avg_cos_similarity(const ReferenceIndex& reference,
                   const EmbeddingSet& queries,
                   SimilarityPairing pairing = SimilarityPairing::kNearest);

}  // namespace embedlens
