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

#include "embedlens/reference_index.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <string>

#include "embedlens/error.hpp"
#include "embedlens/parallel.hpp"

namespace embedlens {

namespace {

constexpr std::size_t kQueryBlock = 64;
constexpr std::size_t kRefBlock = 2048;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMajor>;

}  // namespace

ReferenceIndex::ReferenceIndex(ReferenceMode mode,
                               std::string set_name,
                               std::vector<ClassLabel> classes,
                               Embeddings entries,
                               std::vector<std::size_t> entry_class)
    : mode_(mode),
      set_name_(std::move(set_name)),
      classes_(std::move(classes)),
      entries_(std::move(entries)),
      entry_class_(std::move(entry_class)) {
    if (classes_.empty() || entries_.size() == 0) {
        fail(ErrorCode::kEmptySet, "reference index needs at least one class");
    }
    if (entry_class_.size() != entries_.size()) {
        fail(ErrorCode::kInvalidArgument, "reference index needs one class tag per entry");
    }
    if (mode_ == ReferenceMode::kCentroid && entries_.size() != classes_.size()) {
        fail(ErrorCode::kInvalidArgument, "centroid index needs exactly one entry per class");
    }
}

std::optional<std::size_t>
ReferenceIndex::find_class(ClassId id) const {
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        if (classes_[c].id == id) {
            return c;
        }
    }
    return std::nullopt;
}

ReferenceIndex
build_centroid_references(const EmbeddingSet& refs) {
    if (refs.split() != Split::kTrain) {
        fail(ErrorCode::kSplitMismatch,
             "reference set '" + refs.name() + "' must be a train split");
    }
    const std::size_t n = refs.num_classes();
    std::vector<UnitVector> centroids(n);
    parallel_for(n, [&](std::size_t c) {
        try {
            centroids[c] = spherical_centroid(refs.class_rows(c));
        } catch (const Error& e) {
            fail(e.code(), "set '" + refs.name() + "' class " +
                               std::to_string(refs.entry(c).label.id.value) + ": " + e.what());
        }
    });
    Embeddings entries(refs.dimension());
    std::vector<std::size_t> entry_class(n);
    for (std::size_t c = 0; c < n; ++c) {
        entries.push_back(centroids[c].values());
        entry_class[c] = c;
    }
    return ReferenceIndex(ReferenceMode::kCentroid, refs.name(), refs.labels(), std::move(entries),
                          std::move(entry_class));
}

ReferenceIndex
build_full_references(const EmbeddingSet& refs) {
    if (refs.split() != Split::kTrain) {
        fail(ErrorCode::kSplitMismatch,
             "reference set '" + refs.name() + "' must be a train split");
    }
    std::vector<std::size_t> entry_class(refs.size());
    for (std::size_t c = 0; c < refs.num_classes(); ++c) {
        const auto& e = refs.entry(c);
        std::fill_n(entry_class.begin() + static_cast<std::ptrdiff_t>(e.offset), e.count, c);
    }
    Embeddings entries;
    try {
        entries = normalize_rows(refs.rows());
    } catch (const Error& e) {
        fail(e.code(), "set '" + refs.name() + "': " + e.what());
    }
    return ReferenceIndex(ReferenceMode::kFull, refs.name(), refs.labels(), std::move(entries),
                          std::move(entry_class));
}

void
similarity_sweep(
    Rows unit_queries,
    Rows unit_refs,
    const std::function<void(std::size_t, std::size_t, std::span<const double>)>& visit) {
    if (unit_queries.dim() != unit_refs.dim()) {
        fail(ErrorCode::kDimensionMismatch, "queries have dimension " +
                                                std::to_string(unit_queries.dim()) +
                                                ", references " + std::to_string(unit_refs.dim()));
    }
    const std::size_t dim = unit_queries.dim();
    const std::size_t nq = unit_queries.size();
    const std::size_t nr = unit_refs.size();
    if (nq == 0 || nr == 0) {
        return;
    }
    const std::size_t query_blocks = (nq + kQueryBlock - 1) / kQueryBlock;

    parallel_for(query_blocks, [&](std::size_t qb) {
        const std::size_t q0 = qb * kQueryBlock;
        const std::size_t bq = std::min(kQueryBlock, nq - q0);
        ConstRowMap queries(unit_queries.values().data() + q0 * dim, static_cast<Eigen::Index>(bq),
                            static_cast<Eigen::Index>(dim));
        RowMajor sims;
        for (std::size_t r0 = 0; r0 < nr; r0 += kRefBlock) {
            const std::size_t br = std::min(kRefBlock, nr - r0);
            ConstRowMap refs(unit_refs.values().data() + r0 * dim, static_cast<Eigen::Index>(br),
                             static_cast<Eigen::Index>(dim));
            sims.noalias() = queries * refs.transpose();
            sims = sims.cwiseMax(-1.0).cwiseMin(1.0);
            for (std::size_t i = 0; i < bq; ++i) {
                visit(q0 + i, r0,
                      std::span<const double>(sims.data() + i * br, br));
            }
        }
    });
}

}  // namespace embedlens
