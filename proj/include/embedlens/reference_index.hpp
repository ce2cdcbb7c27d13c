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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "embedlens/dataset.hpp"
#include "embedlens/geometry.hpp"

namespace embedlens {

enum class ReferenceMode { kCentroid, kFull };

/// Per-class reference vectors, all unit length. In centroid mode there is
/// exactly one entry per class (its spherical centroid); in full mode every
/// reference embedding is an entry.
class ReferenceIndex {
public:
    ReferenceIndex(ReferenceMode mode,
                   std::string set_name,
                   std::vector<ClassLabel> classes,
                   Embeddings entries,
                   std::vector<std::size_t> entry_class);

    ReferenceMode
    mode() const noexcept {
        return mode_;
    }
    const std::string&
    set_name() const noexcept {
        return set_name_;
    }
    std::size_t
    dimension() const noexcept {
        return entries_.dim();
    }
    std::size_t
    size() const noexcept {
        return entries_.size();
    }
    const std::vector<ClassLabel>&
    classes() const noexcept {
        return classes_;
    }
    Rows
    entries() const {
        return entries_.rows();
    }
    /// Class position (into classes()) of entry `i`.
    std::size_t
    entry_class(std::size_t i) const {
        return entry_class_[i];
    }
    std::optional<std::size_t>
    find_class(ClassId id) const;

private:
    ReferenceMode mode_;
    std::string set_name_;
    std::vector<ClassLabel> classes_;
    Embeddings entries_;
    std::vector<std::size_t> entry_class_;
};

/// One spherical centroid per class. A class with a single embedding yields
/// that embedding normalized. ZeroVector errors name the offending class.
ReferenceIndex
build_centroid_references(const EmbeddingSet& refs);

/// Every reference embedding, normalized, tagged with its class.
ReferenceIndex
build_full_references(const EmbeddingSet& refs);

/// Exact brute-force similarity sweep between unit queries and unit
/// references. The (query x reference) product is evaluated in blocks with a
/// dense matrix kernel; query blocks run in parallel. For each query,
/// visit(query, first_ref, sims) is called once per reference block in
/// increasing reference order, always from a single thread per query.
/// Similarities are clamped to [-1, 1].
void
similarity_sweep(
    Rows unit_queries,
    Rows unit_refs,
    const std::function<void(std::size_t, std::size_t, std::span<const double>)>& visit);

}  // namespace embedlens
