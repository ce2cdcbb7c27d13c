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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "embedlens/dataset.hpp"

namespace embedlens {

/// Option lists for the prompt modifiers. The extent list feeds two slots
/// (the one before `typical` and the one before `size`). Options may be the
/// empty string, which drops the word from the prompt.
struct ModifierLexicon {
    std::vector<std::string> looks;
    std::vector<std::string> extent;
    std::vector<std::string> typical;
    std::vector<std::string> size;
    std::vector<std::string> location;
    std::vector<std::string> style;

    /// Throws kInvalidArgument unless every list is non-empty with distinct
    /// options.
    void
    validate() const;

    /// Number of distinct choice tuples: |looks| |extent|^2 |typical| |size|
    /// |location| |style|. Saturates at SIZE_MAX.
    std::size_t
    combinations() const;
};

/// The lexicon shipped with the toolkit (also in data/lexicon_default.json).
ModifierLexicon
default_lexicon();

ModifierLexicon
parse_lexicon(std::string_view json_text);

ModifierLexicon
load_lexicon(const std::filesystem::path& path);

std::string
lexicon_to_json(const ModifierLexicon& lexicon);

/// One chosen option per slot, in prompt order.
struct PromptChoices {
    std::string looks;
    std::string extent1;
    std::string typical;
    std::string extent2;
    std::string size;
    std::string location;
    std::string style;

    friend bool
    operator==(const PromptChoices&, const PromptChoices&) = default;
};

/// "<looks>, <extent1> <typical>, <extent2> <size> <class>, <location>. <style>."
/// Empty options vanish together with the whitespace around them; a comma
/// group that ends up empty is dropped with its separator, and an empty
/// style drops its trailing sentence.
std::string
assemble_prompt(std::string_view class_name, const PromptChoices& choices);

struct PromptRecord {
    ClassId class_id;
    std::string class_name;
    std::uint64_t seed = 0;
    std::string prompt;
    PromptChoices choices;
};

/// Draws one option per slot (looks, extent1, typical, extent2, size,
/// location, style, in that order) from Rng(seed). class_id is left at 0.
PromptRecord
generate_prompt(std::string_view class_name, const ModifierLexicon& lexicon, std::uint64_t seed);

/// Every choice tuple of `lexicon` that assembles to `prompt` for `class_name`.
std::vector<PromptChoices>
parse_prompt(std::string_view prompt, std::string_view class_name, const ModifierLexicon& lexicon);

/// Attempts per record before giving up with kLexiconTooSmall.
inline constexpr std::size_t kPromptRetryCap = 1000;

/// `per_class` records per class with no duplicate prompt inside a class.
/// Record seeds are derive_seed(master_seed, {class id, index, attempt});
/// attempts after a duplicate increase `attempt`. Classes are generated in
/// parallel; output is in class order, then index order.
/// kLexiconTooSmall when combinations() < per_class or the retry cap hits.
std::vector<PromptRecord>
generate_prompt_set(const std::vector<ClassLabel>& classes,
                    std::size_t per_class,
                    const ModifierLexicon& lexicon,
                    std::uint64_t master_seed);

/// {"class_id","class_name","seed","prompt","choices":{...}} on one line.
std::string
prompt_record_to_json(const PromptRecord& record);

}  // namespace embedlens
