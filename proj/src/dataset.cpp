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

#include "embedlens/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "embedlens/error.hpp"
#include "embedlens/rng.hpp"

namespace embedlens {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kDtype = "f32le";
constexpr std::string_view kLayout = "row-major-by-class";

std::string
describe(const ClassId& id) {
    return std::to_string(id.value);
}

std::string
read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::kIoFailure, "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        fail(ErrorCode::kIoFailure, "read error on " + path.string());
    }
    return buffer.str();
}

std::uint32_t
to_little_endian(std::uint32_t bits) {
    if constexpr (std::endian::native == std::endian::big) {
        return ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) |
               (bits >> 24);
    }
    return bits;
}

template <typename T>
T
required(const ordered_json& j, const char* key, const std::filesystem::path& where) {
    if (!j.contains(key)) {
        fail(ErrorCode::kManifestParse, where.string() + ": missing field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kManifestParse,
             where.string() + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

}  // namespace

std::string_view
to_string(Modality m) {
    return m == Modality::kImage ? "IM" : "PRMT";
}

std::string_view
to_string(Split s) {
    return s == Split::kTrain ? "train" : "eval";
}

Modality
parse_modality(std::string_view text) {
    if (text == "IM") {
        return Modality::kImage;
    }
    if (text == "PRMT") {
        return Modality::kPrompt;
    }
    fail(ErrorCode::kInvalidArgument, "unknown modality '" + std::string(text) + "'");
}

Split
parse_split(std::string_view text) {
    if (text == "train") {
        return Split::kTrain;
    }
    if (text == "eval") {
        return Split::kEval;
    }
    fail(ErrorCode::kInvalidArgument, "unknown split '" + std::string(text) + "'");
}

EmbeddingSet::EmbeddingSet(std::string name,
                           Modality modality,
                           Split split,
                           std::size_t dimension,
                           std::vector<ClassData> classes)
    : name_(std::move(name)), modality_(modality), split_(split), dimension_(dimension) {
    if (dimension_ < 2) {
        fail(ErrorCode::kInvalidSet, "set '" + name_ + "': dimension must be >= 2, got " +
                                         std::to_string(dimension_));
    }
    if (classes.empty()) {
        fail(ErrorCode::kInvalidSet, "set '" + name_ + "' has no classes");
    }
    std::size_t total = 0;
    for (const auto& c : classes) {
        total += c.rows.size();
    }
    values_.reserve(total * dimension_);
    classes_.reserve(classes.size());

    for (auto& c : classes) {
        const std::string where = "set '" + name_ + "' class " + describe(c.label.id);
        if (c.label.name.empty()) {
            fail(ErrorCode::kInvalidSet, where + " has an empty name");
        }
        if (c.rows.size() == 0) {
            fail(ErrorCode::kInvalidSet, where + " has no embeddings");
        }
        if (c.rows.dim() != dimension_) {
            fail(ErrorCode::kDimensionMismatch, where + " has rows of length " +
                                                    std::to_string(c.rows.dim()) + ", expected " +
                                                    std::to_string(dimension_));
        }
        if (!index_.emplace(c.label.id, classes_.size()).second) {
            fail(ErrorCode::kInvalidSet, where + " appears twice");
        }
        const auto& v = c.rows.values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i])) {
                fail(ErrorCode::kNonFiniteValue,
                     where + " row " + std::to_string(i / dimension_) + " contains a non-finite value");
            }
        }
        classes_.push_back({std::move(c.label), values_.size() / dimension_, c.rows.size()});
        values_.insert(values_.end(), v.begin(), v.end());
    }
}

Rows
EmbeddingSet::class_rows(std::size_t class_index) const {
    const auto& e = classes_.at(class_index);
    return Rows(std::span<const double>(values_).subspan(e.offset * dimension_, e.count * dimension_),
                dimension_);
}

std::size_t
EmbeddingSet::class_of_row(std::size_t row) const {
    auto it = std::upper_bound(classes_.begin(), classes_.end(), row,
                               [](std::size_t r, const ClassEntry& e) { return r < e.offset; });
    return static_cast<std::size_t>(std::distance(classes_.begin(), it)) - 1;
}

std::optional<std::size_t>
EmbeddingSet::find_class(ClassId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<ClassLabel>
EmbeddingSet::labels() const {
    std::vector<ClassLabel> out;
    out.reserve(classes_.size());
    for (const auto& e : classes_) {
        out.push_back(e.label);
    }
    return out;
}

std::vector<ClassData>
EmbeddingSet::to_class_data() const {
    std::vector<ClassData> out;
    out.reserve(classes_.size());
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        const auto rows = class_rows(c);
        out.push_back({classes_[c].label,
                       Embeddings(dimension_, {rows.values().begin(), rows.values().end()})});
    }
    return out;
}

EmbeddingSet
EmbeddingSet::retagged(std::string name, Modality modality, Split split) const {
    return EmbeddingSet(std::move(name), modality, split, dimension_, to_class_data());
}

EmbeddingSet
EmbeddingSet::relabeled(const std::vector<ClassLabel>& labels) const {
    if (labels.size() != classes_.size()) {
        fail(ErrorCode::kInvalidArgument, "relabel needs one label per class");
    }
    auto data = to_class_data();
    for (std::size_t c = 0; c < data.size(); ++c) {
        if (labels[c].id != data[c].label.id) {
            fail(ErrorCode::kInvalidArgument, "relabel must keep class ids and order");
        }
        data[c].label.name = labels[c].name;
    }
    return EmbeddingSet(name_, modality_, split_, dimension_, std::move(data));
}

EmbeddingSet
load_set(const std::filesystem::path& manifest_path) {
    const std::string text = read_text_file(manifest_path);
    ordered_json manifest;
    try {
        manifest = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::kManifestParse, manifest_path.string() + ": " + e.what());
    }
    if (!manifest.is_object()) {
        fail(ErrorCode::kManifestParse, manifest_path.string() + ": manifest must be an object");
    }

    const auto name = required<std::string>(manifest, "name", manifest_path);
    const auto dimension = required<std::int64_t>(manifest, "dimension", manifest_path);
    const auto modality_text = required<std::string>(manifest, "modality", manifest_path);
    const auto split_text = required<std::string>(manifest, "split", manifest_path);
    const auto blob_name = required<std::string>(manifest, "blob", manifest_path);
    const auto dtype = required<std::string>(manifest, "dtype", manifest_path);
    const auto layout = required<std::string>(manifest, "layout", manifest_path);
    if (!manifest.contains("classes") || !manifest["classes"].is_array()) {
        fail(ErrorCode::kManifestParse, manifest_path.string() + ": 'classes' must be an array");
    }
    if (dtype != kDtype) {
        fail(ErrorCode::kManifestParse, manifest_path.string() + ": unsupported dtype '" + dtype + "'");
    }
    if (layout != kLayout) {
        fail(ErrorCode::kManifestParse,
             manifest_path.string() + ": unsupported layout '" + layout + "'");
    }
    if (dimension < 2) {
        fail(ErrorCode::kManifestParse, manifest_path.string() + ": dimension must be >= 2");
    }
    Modality modality;
    Split split;
    try {
        modality = parse_modality(modality_text);
        split = parse_split(split_text);
    } catch (const Error& e) {
        fail(ErrorCode::kManifestParse, manifest_path.string() + ": " + e.what());
    }

    struct Declared {
        ClassLabel label;
        std::int64_t count;
    };
    std::vector<Declared> declared;
    std::uint64_t total_rows = 0;
    for (const auto& c : manifest["classes"]) {
        if (!c.is_object()) {
            fail(ErrorCode::kManifestParse, manifest_path.string() + ": class entries must be objects");
        }
        Declared d{{ClassId{required<std::int64_t>(c, "id", manifest_path)},
                    required<std::string>(c, "name", manifest_path)},
                   required<std::int64_t>(c, "count", manifest_path)};
        if (d.count < 0) {
            fail(ErrorCode::kManifestParse,
                 manifest_path.string() + ": negative count for class " + describe(d.label.id));
        }
        total_rows += static_cast<std::uint64_t>(d.count);
        declared.push_back(std::move(d));
    }

    const auto dim = static_cast<std::size_t>(dimension);
    const auto blob_path = manifest_path.parent_path() / blob_name;
    std::error_code ec;
    const auto blob_bytes = std::filesystem::file_size(blob_path, ec);
    if (ec) {
        fail(ErrorCode::kIoFailure, "cannot stat blob " + blob_path.string() + ": " + ec.message());
    }
    const std::uint64_t expected_bytes = 4ull * dim * total_rows;
    if (blob_bytes != expected_bytes) {
        fail(ErrorCode::kBlobSizeMismatch, blob_path.string() + " holds " +
                                               std::to_string(blob_bytes) + " bytes, manifest implies " +
                                               std::to_string(expected_bytes));
    }

    std::vector<std::uint32_t> raw(dim * total_rows);
    {
        std::ifstream in(blob_path, std::ios::binary);
        if (!in) {
            fail(ErrorCode::kIoFailure, "cannot open blob " + blob_path.string());
        }
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(expected_bytes));
        if (!in) {
            fail(ErrorCode::kIoFailure, "short read on blob " + blob_path.string());
        }
    }

    std::vector<ClassData> classes;
    classes.reserve(declared.size());
    std::size_t cursor = 0;
    for (auto& d : declared) {
        const auto count = static_cast<std::size_t>(d.count);
        std::vector<double> values(count * dim);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const float f = std::bit_cast<float>(to_little_endian(raw[cursor + i]));
            if (!std::isfinite(f)) {
                fail(ErrorCode::kNonFiniteValue, manifest_path.string() + ": class " +
                                                     describe(d.label.id) + " row " +
                                                     std::to_string(i / dim) + " (global row " +
                                                     std::to_string((cursor + i) / dim) +
                                                     ") contains a non-finite value");
            }
            values[i] = f;
        }
        cursor += values.size();
        classes.push_back({std::move(d.label), Embeddings(dim, std::move(values))});
    }
    return EmbeddingSet(name, modality, split, dim, std::move(classes));
}

void
save_set(const EmbeddingSet& set, const std::filesystem::path& manifest_path) {
    const auto blob_name = manifest_path.stem().string() + ".f32";
    const auto blob_path = manifest_path.parent_path() / blob_name;
    if (manifest_path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(manifest_path.parent_path(), ec);
    }

    const auto values = set.rows().values();
    std::vector<std::uint32_t> raw(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto f = static_cast<float>(values[i]);
        if (!std::isfinite(f)) {
            const std::size_t row = i / set.dimension();
            fail(ErrorCode::kNonFiniteValue,
                 "set '" + set.name() + "' class " +
                     describe(set.entry(set.class_of_row(row)).label.id) + " row " +
                     std::to_string(row) + " overflows 32-bit storage");
        }
        raw[i] = to_little_endian(std::bit_cast<std::uint32_t>(f));
    }

    ordered_json manifest;
    manifest["name"] = set.name();
    manifest["dimension"] = set.dimension();
    manifest["modality"] = to_string(set.modality());
    manifest["split"] = to_string(set.split());
    manifest["classes"] = ordered_json::array();
    for (const auto& e : set.classes()) {
        manifest["classes"].push_back(
            ordered_json{{"id", e.label.id.value}, {"name", e.label.name}, {"count", e.count}});
    }
    manifest["blob"] = blob_name;
    manifest["dtype"] = kDtype;
    manifest["layout"] = kLayout;

    {
        std::ofstream out(blob_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            fail(ErrorCode::kIoFailure, "cannot write " + blob_path.string());
        }
        out.write(reinterpret_cast<const char*>(raw.data()),
                  static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));
        if (!out) {
            fail(ErrorCode::kIoFailure, "write error on " + blob_path.string());
        }
    }
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorCode::kIoFailure, "cannot write " + manifest_path.string());
    }
    out << manifest.dump(2) << '\n';
    if (!out) {
        fail(ErrorCode::kIoFailure, "write error on " + manifest_path.string());
    }
}

std::pair<EmbeddingSet, EmbeddingSet>
split_set(const EmbeddingSet& set, double eval_fraction, std::uint64_t seed) {
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
        fail(ErrorCode::kInvalidArgument, "eval fraction must lie in (0, 1)");
    }
    std::vector<ClassData> train;
    std::vector<ClassData> eval;
    for (std::size_t c = 0; c < set.num_classes(); ++c) {
        const auto& e = set.entry(c);
        const std::size_t n = e.count;
        if (n < 2) {
            fail(ErrorCode::kClassTooSmall, "class " + describe(e.label.id) + " of set '" +
                                                set.name() + "' has " + std::to_string(n) +
                                                " embedding(s); splitting needs 2");
        }
        auto n_eval = static_cast<std::size_t>(std::llround(eval_fraction * static_cast<double>(n)));
        n_eval = std::clamp<std::size_t>(n_eval, 1, n - 1);

        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(e.label.id.value)}));
        rng.shuffle(std::span<std::size_t>(order));
        std::vector<bool> is_eval(n, false);
        for (std::size_t i = 0; i < n_eval; ++i) {
            is_eval[order[i]] = true;
        }

        const auto rows = set.class_rows(c);
        Embeddings tr(set.dimension());
        Embeddings ev(set.dimension());
        for (std::size_t i = 0; i < n; ++i) {
            (is_eval[i] ? ev : tr).push_back(rows[i]);
        }
        train.push_back({e.label, std::move(tr)});
        eval.push_back({e.label, std::move(ev)});
    }
    return {EmbeddingSet(set.name(), set.modality(), Split::kTrain, set.dimension(), std::move(train)),
            EmbeddingSet(set.name(), set.modality(), Split::kEval, set.dimension(), std::move(eval))};
}

LabelOverrides
parse_label_overrides(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::kManifestParse, std::string("label overrides: ") + e.what());
    }
    if (!j.is_array()) {
        fail(ErrorCode::kManifestParse, "label overrides must be a JSON array");
    }
    LabelOverrides out;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("id") || !item.contains("prompt") ||
            !item["id"].is_number_integer() || !item["prompt"].is_string()) {
            fail(ErrorCode::kManifestParse, "label override entries need integer 'id' and text 'prompt'");
        }
        const ClassId id{item["id"].get<std::int64_t>()};
        auto prompt = item["prompt"].get<std::string>();
        if (prompt.empty()) {
            fail(ErrorCode::kManifestParse, "empty override prompt for class " + describe(id));
        }
        if (!out.entries.emplace(id, std::move(prompt)).second) {
            fail(ErrorCode::kManifestParse, "duplicate override for class " + describe(id));
        }
    }
    return out;
}

LabelOverrides
load_label_overrides(const std::filesystem::path& path) {
    return parse_label_overrides(read_text_file(path));
}

std::vector<ClassLabel>
apply_label_overrides(const std::vector<ClassLabel>& labels, const LabelOverrides& overrides) {
    std::set<ClassId> known;
    for (const auto& l : labels) {
        known.insert(l.id);
    }
    for (const auto& [id, prompt] : overrides.entries) {
        if (!known.contains(id)) {
            fail(ErrorCode::kUnknownClassId, "override names class " + describe(id) +
                                                 ", which is not in the label table");
        }
    }
    std::vector<ClassLabel> out = labels;
    for (auto& l : out) {
        if (auto it = overrides.entries.find(l.id); it != overrides.entries.end()) {
            l.name = it->second;
        }
    }
    return out;
}

std::vector<ClassLabel>
load_class_list(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::kManifestParse, path.string() + ": " + e.what());
    }
    if (!j.is_array()) {
        fail(ErrorCode::kManifestParse, path.string() + ": class list must be a JSON array");
    }
    std::vector<ClassLabel> out;
    std::set<ClassId> seen;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("id") || !item.contains("name") ||
            !item["id"].is_number_integer() || !item["name"].is_string()) {
            fail(ErrorCode::kManifestParse, path.string() + ": entries need integer 'id' and text 'name'");
        }
        ClassLabel label{ClassId{item["id"].get<std::int64_t>()}, item["name"].get<std::string>()};
        if (label.name.empty() || !seen.insert(label.id).second) {
            fail(ErrorCode::kManifestParse,
                 path.string() + ": class " + describe(label.id) + " is duplicated or unnamed");
        }
        out.push_back(std::move(label));
    }
    return out;
}

}  // namespace embedlens
