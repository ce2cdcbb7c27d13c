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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embedlens/dataset.hpp"
#include "embedlens/reference_index.hpp"

namespace embedlens {

struct Prediction {
    std::size_t query_index = 0;
    ClassId predicted;
    /// Cosine similarity to the winning reference entry.
    double similarity = 0.0;
    bool correct = false;
};

/// Classification method of one experiment cell.
struct Method {
    enum class Kind { kCentroid, kKnn };
    Kind kind = Kind::kCentroid;
    std::size_t k = 1;

    static Method
    centroid() {
        return {Kind::kCentroid, 1};
    }
    static Method
    knn(std::size_t k) {
        return {Kind::kKnn, k};
    }

    friend bool
    operator==(const Method&, const Method&) = default;
};

/// "centroid", "knn1", "knn5", ...
std::string
to_string(const Method& m);

/// Accepts "centroid", "knnK", "knn:K" and "knn(K)".
Method
parse_method(std::string_view text);

struct ExperimentSpec {
    std::string reference_set;
    std::string query_set;
    Method method;
    std::uint64_t seed = 0;
};

struct ClassAccuracy {
    std::size_t correct = 0;
    std::size_t total = 0;

    double
    accuracy() const {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
};

struct ExperimentResult {
    ExperimentSpec spec;
    /// Correct queries over all queries.
    double accuracy = 0.0;
    /// Bucketed by the query's true class.
    std::map<ClassId, ClassAccuracy> per_class;
    /// Mean similarity between each query and its nearest class centroid,
    /// for every method.
    double avg_cos_similarity = 0.0;
    std::vector<Prediction> predictions;
};

/// Entry with the highest cosine similarity to `query`; exact ties are broken
/// by a uniform draw seeded with `seed`. query_index is 0 and correct is
/// false; callers fill them in.
Prediction
nearest_reference(const UnitVector& query, const ReferenceIndex& index, std::uint64_t seed);

/// Centroid Accuracy: each eval query is assigned the class of its nearest
/// train-set class centroid. Tie draws for query i use derive_seed(seed, {i}).
///
/// Errors: kSplitMismatch (refs not train or queries not eval),
/// kDimensionMismatch, kClassUniverseMismatch (a query class has no
/// reference class).
ExperimentResult
centroid_accuracy(const EmbeddingSet& refs, const EmbeddingSet& queries, std::uint64_t seed);

/// k-NN over every reference embedding, majority vote. Neighbours tying with
/// the k-th similarity are drawn at random; vote ties go to the class with
/// the single nearest member, then to a random draw. kKTooLarge when k
/// exceeds the reference count.
ExperimentResult
knn_classify(const EmbeddingSet& refs,
             const EmbeddingSet& queries,
             std::size_t k,
             std::uint64_t seed);

/// Same as the two functions above but on prebuilt indexes, so a matrix run
/// builds each reference structure once.
ExperimentResult
classify_with_centroids(const ReferenceIndex& centroids,
                        const EmbeddingSet& queries,
                        std::uint64_t seed);
ExperimentResult
classify_with_knn(const ReferenceIndex& full,
                  const ReferenceIndex& centroids,
                  const EmbeddingSet& queries,
                  std::size_t k,
                  std::uint64_t seed);

/// Skip pattern for matrix cells; "*" matches anything.
struct SkipRule {
    std::string reference = "*";
    std::string query = "*";
    std::string method = "*";

    bool
    matches(const std::string& ref, const std::string& query_name, const Method& m) const;
};

/// Parses "REF:QUERY:METHOD" or "QUERY:METHOD" (reference "*"). METHOD may
/// be "*", "knn" (any k) or an exact method name.
SkipRule
parse_skip_rule(std::string_view text);

struct MatrixCell {
    enum class Status { kOk, kSkipped, kFailed };

    /// 1-based; shared by all methods of one (reference, query) pair.
    std::size_t experiment = 0;
    std::string reference_set;
    std::string query_set;
    Method method;
    Status status = Status::kOk;
    std::optional<ExperimentResult> result;
    std::string error;
};

/// Every (train-split set, eval-split set) pair under every method. Pairs
/// are numbered with the query set as the outer loop. Cell failures are
/// recorded and the matrix continues.
std::vector<MatrixCell>
run_experiment_matrix(const std::vector<EmbeddingSet>& sets,
                      const std::vector<Method>& methods,
                      std::uint64_t seed,
                      const std::vector<SkipRule>& skip = {});

enum class FailureTag { kHealthy, kConceptFailure, kShiftFailure, kIndeterminate };

std::string_view
to_string(FailureTag tag);

struct ClassDiagnosis {
    ClassId id;
    double natural_accuracy = 0.0;
    double synthetic_accuracy = 0.0;
    FailureTag tag = FailureTag::kHealthy;
};

/// Per-class failure pattern from the same reference set classified against
/// natural and synthetic queries:
///   natural >= low                         -> healthy
///   natural <  low and synthetic <  low    -> concept failure
///   natural <  low and synthetic >= high   -> shift failure
///   natural <  low, low <= synthetic < high -> indeterminate
/// kMismatchedResults when reference sets or class universes differ.
std::vector<ClassDiagnosis>
diagnose_class_failures(const ExperimentResult& natural,
                        const ExperimentResult& synthetic,
                        double low_threshold,
                        double high_threshold);

}  // namespace embedlens
