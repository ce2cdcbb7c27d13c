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

#include "embedlens/promptgen.hpp"

#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <unordered_set>

#include "embedlens/error.hpp"
#include "embedlens/parallel.hpp"
#include "embedlens/rng.hpp"

namespace embedlens {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kSlotNames[] = {"looks", "extent", "typical", "size", "location", "style"};

std::array<const std::vector<std::string>*, 6>
slots(const ModifierLexicon& lex) {
    return {&lex.looks, &lex.extent, &lex.typical, &lex.size, &lex.location, &lex.style};
}

std::array<std::vector<std::string>*, 6>
slots(ModifierLexicon& lex) {
    return {&lex.looks, &lex.extent, &lex.typical, &lex.size, &lex.location, &lex.style};
}

std::string
join_nonempty(std::initializer_list<std::string_view> parts, std::string_view sep) {
    std::string out;
    for (auto p : parts) {
        if (p.empty()) {
            continue;
        }
        if (!out.empty()) {
            out += sep;
        }
        out += p;
    }
    return out;
}

std::string
middle_groups(std::string_view class_name, const PromptChoices& c) {
    return join_nonempty({join_nonempty({c.extent1, c.typical}, " "),
                          join_nonempty({c.extent2, c.size, class_name}, " ")},
                         ", ");
}

std::string
tail_of(const std::string& location, const std::string& style) {
    std::string tail = location.empty() ? "" : ", " + location;
    tail += ".";
    if (!style.empty()) {
        tail += " " + style + ".";
    }
    return tail;
}

}  // namespace

void
ModifierLexicon::validate() const {
    const auto lists = slots(*this);
    for (std::size_t s = 0; s < lists.size(); ++s) {
        const auto& list = *lists[s];
        if (list.empty()) {
            fail(ErrorCode::kInvalidArgument,
                 std::string("lexicon slot '") + kSlotNames[s] + "' has no options");
        }
        std::set<std::string> seen(list.begin(), list.end());
        if (seen.size() != list.size()) {
            fail(ErrorCode::kInvalidArgument,
                 std::string("lexicon slot '") + kSlotNames[s] + "' repeats an option");
        }
    }
}

std::size_t
ModifierLexicon::combinations() const {
    const std::size_t factors[] = {looks.size(), extent.size(), typical.size(), extent.size(),
                                   size.size(),  location.size(), style.size()};
    std::size_t total = 1;
    for (std::size_t f : factors) {
        if (f != 0 && total > std::numeric_limits<std::size_t>::max() / f) {
            return std::numeric_limits<std::size_t>::max();
        }
        total *= f;
    }
    return total;
}

ModifierLexicon
default_lexicon() {
    ModifierLexicon lex;
    lex.looks = {"beautiful", "ugly", "old", "new", ""};
    lex.extent = {"", "slightly", "very", "extremely"};
    lex.typical = {"common", "uncommon", "typical", "unusual"};
    lex.size = {"small", "large", "small size", "large size", "medium size"};
    lex.location = {"centered in the image", "partially occluded",
                    "with many other other objects visible", "in the background",
                    "seen from a distance"};
    lex.style = {"Typical snapshot", "Hyper-sharp", "Overexposed", "Underexposed"};
    return lex;
}

ModifierLexicon
parse_lexicon(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::kManifestParse, std::string("lexicon: ") + e.what());
    }
    if (!j.is_object()) {
        fail(ErrorCode::kManifestParse, "lexicon must be a JSON object of arrays");
    }
    ModifierLexicon lex;
    const auto lists = slots(lex);
    for (const auto& [key, value] : j.items()) {
        if (key.starts_with("_")) {
            continue;  // annotations
        }
        std::size_t s = 0;
        while (s < lists.size() && key != kSlotNames[s]) {
            ++s;
        }
        if (s == lists.size()) {
            fail(ErrorCode::kManifestParse, "lexicon has unknown slot '" + key + "'");
        }
        if (!value.is_array()) {
            fail(ErrorCode::kManifestParse, "lexicon slot '" + key + "' must be an array");
        }
        for (const auto& option : value) {
            if (!option.is_string()) {
                fail(ErrorCode::kManifestParse, "lexicon slot '" + key + "' must hold strings");
            }
            lists[s]->push_back(option.get<std::string>());
        }
    }
    lex.validate();
    return lex;
}

ModifierLexicon
load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::kIoFailure, "cannot open lexicon " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_lexicon(text.str());
}

std::string
lexicon_to_json(const ModifierLexicon& lexicon) {
    ordered_json j;
    const auto lists = slots(lexicon);
    for (std::size_t s = 0; s < lists.size(); ++s) {
        j[kSlotNames[s]] = *lists[s];
    }
    return j.dump(2);
}

std::string
assemble_prompt(std::string_view class_name, const PromptChoices& c) {
    std::string body =
        join_nonempty({c.looks, middle_groups(class_name, c), c.location}, ", ");
    body += ".";
    if (!c.style.empty()) {
        body += " " + c.style + ".";
    }
    return body;
}

PromptRecord
generate_prompt(std::string_view class_name, const ModifierLexicon& lexicon, std::uint64_t seed) {
    if (class_name.empty()) {
        fail(ErrorCode::kInvalidArgument, "class name must be non-empty");
    }
    Rng rng(seed);
    auto draw = [&rng](const std::vector<std::string>& options) {
        return options[rng.uniform_index(options.size())];
    };
    PromptRecord record;
    record.class_name = std::string(class_name);
    record.seed = seed;
    record.choices.looks = draw(lexicon.looks);
    record.choices.extent1 = draw(lexicon.extent);
    record.choices.typical = draw(lexicon.typical);
    record.choices.extent2 = draw(lexicon.extent);
    record.choices.size = draw(lexicon.size);
    record.choices.location = draw(lexicon.location);
    record.choices.style = draw(lexicon.style);
    record.prompt = assemble_prompt(class_name, record.choices);
    return record;
}

std::vector<PromptChoices>
parse_prompt(std::string_view prompt, std::string_view class_name, const ModifierLexicon& lexicon) {
    std::vector<PromptChoices> matches;
    for (const auto& looks : lexicon.looks) {
        const std::string head = looks.empty() ? "" : looks + ", ";
        if (!prompt.starts_with(head)) {
            continue;
        }
        for (const auto& location : lexicon.location) {
            for (const auto& style : lexicon.style) {
                const std::string tail = tail_of(location, style);
                if (prompt.size() < head.size() + tail.size() || !prompt.ends_with(tail)) {
                    continue;
                }
                const auto middle =
                    prompt.substr(head.size(), prompt.size() - head.size() - tail.size());
                for (const auto& e1 : lexicon.extent) {
                    for (const auto& typical : lexicon.typical) {
                        for (const auto& e2 : lexicon.extent) {
                            for (const auto& size : lexicon.size) {
                                PromptChoices c{looks, e1, typical, e2, size, location, style};
                                if (middle_groups(class_name, c) == middle &&
                                    assemble_prompt(class_name, c) == prompt) {
                                    matches.push_back(std::move(c));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return matches;
}

std::vector<PromptRecord>
generate_prompt_set(const std::vector<ClassLabel>& classes,
                    std::size_t per_class,
                    const ModifierLexicon& lexicon,
                    std::uint64_t master_seed) {
    lexicon.validate();
    if (per_class < 1) {
        fail(ErrorCode::kInvalidArgument, "per-class prompt count must be >= 1");
    }
    if (lexicon.combinations() < per_class) {
        fail(ErrorCode::kLexiconTooSmall,
             "lexicon yields " + std::to_string(lexicon.combinations()) +
                 " distinct prompts per class, " + std::to_string(per_class) + " requested");
    }
    std::vector<std::vector<PromptRecord>> per(classes.size());
    parallel_for(classes.size(), [&](std::size_t c) {
        const auto& label = classes[c];
        const auto id = static_cast<std::uint64_t>(label.id.value);
        std::unordered_set<std::string> seen;
        auto& out = per[c];
        out.reserve(per_class);
        for (std::size_t i = 0; i < per_class; ++i) {
            bool placed = false;
            for (std::size_t attempt = 0; attempt < kPromptRetryCap && !placed; ++attempt) {
                auto record = generate_prompt(label.name, lexicon, derive_seed(master_seed, {id, i, attempt}));
                if (seen.insert(record.prompt).second) {
                    record.class_id = label.id;
                    out.push_back(std::move(record));
                    placed = true;
                }
            }
            if (!placed) {
                fail(ErrorCode::kLexiconTooSmall,
                     "no unused prompt found for class " + std::to_string(label.id.value) +
                         " after " + std::to_string(kPromptRetryCap) + " attempts");
            }
        }
    });
    std::vector<PromptRecord> records;
    records.reserve(classes.size() * per_class);
    for (auto& v : per) {
        std::move(v.begin(), v.end(), std::back_inserter(records));
    }
    return records;
}

std::string
prompt_record_to_json(const PromptRecord& r) {
    ordered_json choices{{"looks", r.choices.looks},       {"extent1", r.choices.extent1},
                         {"typical", r.choices.typical},   {"extent2", r.choices.extent2},
                         {"size", r.choices.size},         {"location", r.choices.location},
                         {"style", r.choices.style}};
    ordered_json j{{"class_id", r.class_id.value},
                   {"class_name", r.class_name},
                   {"seed", r.seed},
                   {"prompt", r.prompt},
                   {"choices", std::move(choices)}};
    return j.dump();
}

}  // namespace embedlens
