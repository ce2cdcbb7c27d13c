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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "embedlens/geometry.hpp"

namespace embedlens {

/// Class identity across sets. Names are mutable (overrides rewrite them),
/// ids are not.
struct ClassId {
    std::int64_t value = 0;

    friend auto
    operator<=>(const ClassId&, const ClassId&) = default;
};

struct ClassLabel {
    ClassId id;
    std::string name;

    friend bool
    operator==(const ClassLabel&, const ClassLabel&) = default;
};

enum class Modality { kImage, kPrompt };
enum class Split { kTrain, kEval };

std::string_view
to_string(Modality m);
std::string_view
to_string(Split s);
Modality
parse_modality(std::string_view text);
Split
parse_split(std::string_view text);

struct ClassData {
    ClassLabel label;
    Embeddings rows;
};

/// A named, labeled, validated collection of embeddings. Values are held in
/// double precision in class order; the on-disk form is 32-bit.
///
/// Construction is the single validation boundary: dimension >= 2, at least
/// one class, every class non-empty, unique ids, non-empty names, every row
/// of length D and every value finite. Downstream code never re-checks.
class EmbeddingSet {
public:
    struct ClassEntry {
        ClassLabel label;
        std::size_t offset = 0;  // first row
        std::size_t count = 0;
    };

    EmbeddingSet(std::string name,
                 Modality modality,
                 Split split,
                 std::size_t dimension,
                 std::vector<ClassData> classes);

    const std::string&
    name() const noexcept {
        return name_;
    }
    Modality
    modality() const noexcept {
        return modality_;
    }
    Split
    split() const noexcept {
        return split_;
    }
    std::size_t
    dimension() const noexcept {
        return dimension_;
    }
    std::size_t
    size() const noexcept {
        return values_.size() / dimension_;
    }
    std::size_t
    num_classes() const noexcept {
        return classes_.size();
    }
    const std::vector<ClassEntry>&
    classes() const noexcept {
        return classes_;
    }
    const ClassEntry&
    entry(std::size_t class_index) const {
        return classes_.at(class_index);
    }

    /// Rows of one class, by position in classes().
    Rows
    class_rows(std::size_t class_index) const;

    /// All rows in class order.
    Rows
    rows() const {
        return Rows(values_, dimension_);
    }

    /// Class position of global row `row`.
    std::size_t
    class_of_row(std::size_t row) const;

    std::optional<std::size_t>
    find_class(ClassId id) const;

    std::vector<ClassLabel>
    labels() const;

    /// Copy with a different name/split/modality; data unchanged.
    EmbeddingSet
    retagged(std::string name, Modality modality, Split split) const;

    /// Copy with the given labels (same ids, same order) replacing the names.
    EmbeddingSet
    relabeled(const std::vector<ClassLabel>& labels) const;

    std::vector<ClassData>
    to_class_data() const;

private:
    std::string name_;
    Modality modality_;
    Split split_;
    std::size_t dimension_;
    std::vector<ClassEntry> classes_;
    std::vector<double> values_;
    std::map<ClassId, std::size_t> index_;
};

/// Reads a set from its JSON manifest; the blob path in the manifest is
/// resolved relative to the manifest's directory.
///
/// Errors: kIoFailure (unreadable files), kManifestParse, kBlobSizeMismatch,
/// kNonFiniteValue (message names class id and row), kInvalidSet.
EmbeddingSet
load_set(const std::filesystem::path& manifest_path);

/// Writes `<stem>.json` at `manifest_path` and the blob `<stem>.f32` beside it.
/// Values are narrowed to 32-bit floats; a loaded set round-trips bit-exactly.
void
save_set(const EmbeddingSet& set, const std::filesystem::path& manifest_path);

/// Per-class disjoint partition into (train, eval). The eval count per class
/// is max(1, round(eval_fraction * N)), capped at N - 1 so train keeps a row.
/// Row order inside each part follows the original order.
std::pair<EmbeddingSet, EmbeddingSet>
split_set(const EmbeddingSet& set, double eval_fraction, std::uint64_t seed);

struct LabelOverrides {
    std::map<ClassId, std::string> entries;
};

/// Parses a JSON array of {"id": int, "prompt": text}.
LabelOverrides
parse_label_overrides(std::string_view json_text);

LabelOverrides
load_label_overrides(const std::filesystem::path& path);

/// Replaces the names of the listed ids; everything else and the order are
/// untouched. Throws kUnknownClassId when an override id is not in `labels`.
std::vector<ClassLabel>
apply_label_overrides(const std::vector<ClassLabel>& labels, const LabelOverrides& overrides);

/// Parses a JSON array of {"id": int, "name": text} (class list files).
std::vector<ClassLabel>
load_class_list(const std::filesystem::path& path);

}  // namespace embedlens
