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

#include "commands.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "embedlens/classify.hpp"
#include "embedlens/cli.hpp"
#include "embedlens/dataset.hpp"
#include "embedlens/error.hpp"
#include "embedlens/metrics.hpp"
#include "embedlens/promptgen.hpp"
#include "embedlens/rng.hpp"
#include "embedlens/separability.hpp"
#include "embedlens/simulator.hpp"

namespace embedlens::cli {

namespace {

namespace fs = std::filesystem;

// Stream id for the gap direction; distinct from the per-class streams.
constexpr std::uint64_t kGapDirectionStream = 0x67617000;

std::string
utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string
real(double v) {
    return std::isfinite(v) ? fmt::format("{:.9g}", v) : std::string("nan");
}

std::string
percent(double v) {
    return fmt::format("{:.1f}", 100.0 * v);
}

std::string
csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') {
            q += '"';
        }
        q += c;
    }
    q += '"';
    return q;
}

std::string
csv_line(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            line += ',';
        }
        line += csv_field(fields[i]);
    }
    line += '\n';
    return line;
}

ordered_json
finite_or_null(double v) {
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

std::string
json_report(const ordered_json& config, ordered_json results) {
    ordered_json r;
    r["tool"] = kToolName;
    r["version"] = kVersion;
    r["command"] = config.at("command");
    r["seed"] = config.at("seed");
    r["generated_at"] = utc_timestamp();
    r["config"] = config;
    r["results"] = std::move(results);
    return r.dump(2) + "\n";
}

std::string
csv_report(const ordered_json& config,
           const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::string text = fmt::format("# tool: {} {}\n", kToolName, kVersion);
    text += fmt::format("# seed: {}\n", config.at("seed").get<std::uint64_t>());
    text += fmt::format("# generated_at: {}\n", utc_timestamp());
    text += "# config: " + config.dump() + "\n";
    text += csv_line(header);
    for (const auto& row : rows) {
        text += csv_line(row);
    }
    return text;
}

void
write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        fail(ErrorCode::kIoFailure, "cannot open " + path.string() + " for writing");
    }
    f << text;
    if (!f) {
        fail(ErrorCode::kIoFailure, "write failed: " + path.string());
    }
}

std::string
read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        fail(ErrorCode::kIoFailure, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void
emit(const ordered_json& config, const std::string& text, std::ostream& out) {
    const auto path = config.at("out").get<std::string>();
    if (path.empty()) {
        out << text;
    } else {
        write_file(path, text);
    }
}

bool
wants_json(const ordered_json& config) {
    return config.at("format").get<std::string>() == "json";
}

std::uint64_t
seed_of(const ordered_json& config) {
    return config.at("seed").get<std::uint64_t>();
}

std::vector<EmbeddingSet>
load_all(const ordered_json& paths) {
    std::vector<EmbeddingSet> sets;
    for (const auto& p : paths) {
        sets.push_back(load_set(p.get<std::string>()));
    }
    return sets;
}

ordered_json
class_sizes(const EmbeddingSet& set) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : set.classes()) {
        arr.push_back({{"id", e.label.id.value}, {"name", e.label.name}, {"count", e.count}});
    }
    return arr;
}

// ---------------------------------------------------------------- validate

int
run_validate(const ordered_json& config, std::ostream& out, std::ostream& err) {
    int rc = kExitOk;
    ordered_json results = ordered_json::array();
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : config.at("inputs")) {
        const auto path = p.get<std::string>();
        ordered_json r;
        r["path"] = path;
        try {
            const auto set = load_set(path);
            r["status"] = "ok";
            r["name"] = set.name();
            r["dimension"] = set.dimension();
            r["modality"] = to_string(set.modality());
            r["split"] = to_string(set.split());
            r["num_classes"] = set.num_classes();
            r["rows"] = set.size();
            r["classes"] = class_sizes(set);
            for (const auto& e : set.classes()) {
                rows.push_back({path, "ok", set.name(), std::to_string(set.dimension()),
                                std::string(to_string(set.modality())),
                                std::string(to_string(set.split())),
                                std::to_string(e.label.id.value), e.label.name,
                                std::to_string(e.count), ""});
            }
        } catch (const Error& e) {
            r["status"] = "error";
            r["error_code"] = error_code_name(e.code());
            r["error"] = e.what();
            rows.push_back({path, "error", "", "", "", "", "", "", "", e.what()});
            err << kToolName << ": " << path << ": " << e.what() << '\n';
            if (rc == kExitOk) {
                rc = exit_code_for(e.code());
            }
        }
        results.push_back(std::move(r));
    }
    if (wants_json(config)) {
        emit(config, json_report(config, std::move(results)), out);
    } else {
        emit(config,
             csv_report(config,
                        {"path", "status", "name", "dimension", "modality", "split", "class_id",
                         "class_name", "count", "error"},
                        rows),
             out);
    }
    return rc;
}

// ----------------------------------------------------------------- metrics

int
run_metrics(const ordered_json& config, std::ostream& out) {
    const auto sets = load_all(config.at("inputs"));
    if (sets.empty() || sets.size() > 2) {
        fail(ErrorCode::kInvalidArgument, "metrics takes one or two sets");
    }
    const auto& a = sets[0];
    const auto ma = set_centroid_distance(a);

    if (sets.size() == 1) {
        ordered_json classes = ordered_json::array();
        std::vector<std::vector<std::string>> rows;
        for (std::size_t c = 0; c < ma.classes.size(); ++c) {
            const auto& m = ma.classes[c];
            const auto& name = a.entry(c).label.name;
            classes.push_back({{"id", m.id.value},
                               {"name", name},
                               {"n", m.n},
                               {"centroid_distance", m.centroid_distance}});
            rows.push_back({"class", std::to_string(m.id.value), name, std::to_string(m.n),
                            real(m.centroid_distance)});
        }
        rows.push_back({"set", "", a.name(), std::to_string(a.size()),
                        real(ma.set_centroid_distance)});
        if (wants_json(config)) {
            ordered_json r;
            r["set"] = a.name();
            r["set_centroid_distance"] = ma.set_centroid_distance;
            r["classes"] = std::move(classes);
            emit(config, json_report(config, std::move(r)), out);
        } else {
            emit(config,
                 csv_report(config, {"scope", "class_id", "class_name", "n", "centroid_distance"},
                            rows),
                 out);
        }
        return kExitOk;
    }

    const auto& b = sets[1];
    if (a.dimension() != b.dimension()) {
        fail(ErrorCode::kDimensionMismatch,
             fmt::format("sets have dimensions {} and {}", a.dimension(), b.dimension()));
    }
    const auto mb = set_centroid_distance(b);

    ordered_json classes = ordered_json::array();
    std::vector<std::vector<std::string>> rows;
    double shift_sum = 0.0;
    std::size_t shared = 0;
    for (std::size_t ca = 0; ca < a.num_classes(); ++ca) {
        const auto& label = a.entry(ca).label;
        const auto cb = b.find_class(label.id);
        const auto& m = ma.classes[ca];
        ordered_json row;
        row["id"] = label.id.value;
        row["name"] = label.name;
        row["n_a"] = m.n;
        row["centroid_distance_a"] = m.centroid_distance;
        if (cb) {
            const auto& mbc = mb.classes[*cb];
            const double shift = codiff(m.centroid, mbc.centroid);
            shift_sum += shift;
            ++shared;
            row["n_b"] = mbc.n;
            row["centroid_distance_b"] = mbc.centroid_distance;
            row["centroid_shift"] = shift;
            rows.push_back({"class", std::to_string(label.id.value), label.name,
                            std::to_string(m.n), std::to_string(mbc.n), real(m.centroid_distance),
                            real(mbc.centroid_distance), real(shift), "", ""});
        } else {
            row["n_b"] = 0;
            row["centroid_distance_b"] = nullptr;
            row["centroid_shift"] = nullptr;
            rows.push_back({"class", std::to_string(label.id.value), label.name,
                            std::to_string(m.n), "0", real(m.centroid_distance), "", "", "", ""});
        }
        classes.push_back(std::move(row));
    }
    for (std::size_t cb = 0; cb < b.num_classes(); ++cb) {
        const auto& label = b.entry(cb).label;
        if (a.find_class(label.id)) {
            continue;
        }
        const auto& mbc = mb.classes[cb];
        classes.push_back({{"id", label.id.value},
                           {"name", label.name},
                           {"n_a", 0},
                           {"centroid_distance_a", nullptr},
                           {"n_b", mbc.n},
                           {"centroid_distance_b", mbc.centroid_distance},
                           {"centroid_shift", nullptr}});
        rows.push_back({"class", std::to_string(label.id.value), label.name, "0",
                        std::to_string(mbc.n), "", real(mbc.centroid_distance), "", "", ""});
    }

    const auto fd_sq = frechet_distance(a.rows(), b.rows(), FrechetMeanTerm::kSquared);
    const auto fd_abs = frechet_distance(a.rows(), b.rows(), FrechetMeanTerm::kAbsolute);
    const double mean_shift =
        shared == 0 ? std::nan("") : shift_sum / static_cast<double>(shared);
    rows.push_back({"set", "", a.name() + " vs " + b.name(), std::to_string(a.size()),
                    std::to_string(b.size()), real(ma.set_centroid_distance),
                    real(mb.set_centroid_distance), real(mean_shift), real(fd_sq.total),
                    real(fd_abs.total)});

    if (wants_json(config)) {
        ordered_json r;
        r["set_a"] = a.name();
        r["set_b"] = b.name();
        r["set_centroid_distance_a"] = ma.set_centroid_distance;
        r["set_centroid_distance_b"] = mb.set_centroid_distance;
        r["mean_centroid_shift"] = finite_or_null(mean_shift);
        r["shared_classes"] = shared;
        auto fd_json = [](const FrechetResult& f) {
            return ordered_json{{"mean_term", f.mean_term},
                                {"trace_term", f.trace_term},
                                {"total", f.total}};
        };
        r["frechet_squared"] = fd_json(fd_sq);
        r["frechet_absolute"] = fd_json(fd_abs);
        r["classes"] = std::move(classes);
        emit(config, json_report(config, std::move(r)), out);
    } else {
        emit(config,
             csv_report(config,
                        {"scope", "class_id", "class_name", "n_a", "n_b", "centroid_distance_a",
                         "centroid_distance_b", "centroid_shift", "fd_squared", "fd_absolute"},
                        rows),
             out);
    }
    return kExitOk;
}

// ------------------------------------------------------------------ matrix

std::string_view
status_name(MatrixCell::Status s) {
    switch (s) {
        case MatrixCell::Status::kOk:
            return "ok";
        case MatrixCell::Status::kSkipped:
            return "skipped";
        case MatrixCell::Status::kFailed:
            return "failed";
    }
    return "failed";
}

ordered_json
per_class_json(const ExperimentResult& r) {
    ordered_json arr = ordered_json::array();
    for (const auto& [id, acc] : r.per_class) {
        arr.push_back({{"id", id.value},
                       {"correct", acc.correct},
                       {"total", acc.total},
                       {"accuracy", acc.accuracy()}});
    }
    return arr;
}

int
run_matrix(const ordered_json& config, std::ostream& out, std::ostream& err) {
    const auto sets = load_all(config.at("inputs"));
    std::vector<Method> methods;
    for (const auto& m : config.at("methods")) {
        methods.push_back(parse_method(m.get<std::string>()));
    }
    std::vector<SkipRule> skip;
    for (const auto& s : config.at("skip")) {
        skip.push_back(parse_skip_rule(s.get<std::string>()));
    }
    const auto cells = run_experiment_matrix(sets, methods, seed_of(config), skip);

    bool any_ok = false;
    bool any_failed = false;
    ordered_json results = ordered_json::array();
    std::vector<std::vector<std::string>> rows;
    for (const auto& cell : cells) {
        ordered_json j;
        j["experiment"] = cell.experiment;
        j["reference_set"] = cell.reference_set;
        j["query_set"] = cell.query_set;
        j["method"] = to_string(cell.method);
        j["status"] = status_name(cell.status);
        std::string acc = "n/a";
        std::string cos = "n/a";
        if (cell.status == MatrixCell::Status::kOk && cell.result) {
            any_ok = true;
            acc = percent(cell.result->accuracy);
            cos = fmt::format("{:.4f}", cell.result->avg_cos_similarity);
            j["accuracy"] = cell.result->accuracy;
            j["avg_cos_similarity"] = cell.result->avg_cos_similarity;
            j["per_class"] = per_class_json(*cell.result);
        } else {
            j["accuracy"] = nullptr;
            j["avg_cos_similarity"] = nullptr;
        }
        if (cell.status == MatrixCell::Status::kFailed) {
            any_failed = true;
            j["error"] = cell.error;
            err << kToolName << ": experiment " << cell.experiment << " ("
                << cell.reference_set << " / " << cell.query_set << " / "
                << to_string(cell.method) << "): " << cell.error << '\n';
        }
        rows.push_back({std::to_string(cell.experiment), cell.reference_set, cell.query_set,
                        to_string(cell.method), acc, cos, std::string(status_name(cell.status)),
                        cell.error});
        results.push_back(std::move(j));
    }
    if (wants_json(config)) {
        emit(config, json_report(config, std::move(results)), out);
    } else {
        emit(config,
             csv_report(config,
                        {"experiment", "reference_set", "query_set", "method", "accuracy",
                         "avg_cos_similarity", "status", "error"},
                        rows),
             out);
    }
    return (any_ok || !any_failed) ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------- diagnose

ExperimentResult
classify(const EmbeddingSet& refs,
         const EmbeddingSet& queries,
         const Method& method,
         std::uint64_t seed) {
    if (method.kind == Method::Kind::kCentroid) {
        return centroid_accuracy(refs, queries, seed);
    }
    return knn_classify(refs, queries, method.k, seed);
}

int
run_diagnose(const ordered_json& config, std::ostream& out) {
    const auto refs = load_set(config.at("refs").get<std::string>());
    const auto natural = load_set(config.at("natural").get<std::string>());
    const auto synthetic = load_set(config.at("synthetic").get<std::string>());
    const auto method = parse_method(config.at("method").get<std::string>());
    const auto seed = seed_of(config);
    const double low = config.at("low").get<double>();
    const double high = config.at("high").get<double>();

    const auto rn = classify(refs, natural, method, seed);
    const auto rs = classify(refs, synthetic, method, seed);
    const auto diagnoses = diagnose_class_failures(rn, rs, low, high);

    auto name_of = [&](ClassId id) {
        const auto c = refs.find_class(id);
        return c ? refs.entry(*c).label.name : std::string();
    };
    if (wants_json(config)) {
        ordered_json r;
        r["natural_accuracy"] = rn.accuracy;
        r["synthetic_accuracy"] = rs.accuracy;
        ordered_json classes = ordered_json::array();
        for (const auto& d : diagnoses) {
            classes.push_back({{"id", d.id.value},
                               {"name", name_of(d.id)},
                               {"natural_accuracy", d.natural_accuracy},
                               {"synthetic_accuracy", d.synthetic_accuracy},
                               {"tag", to_string(d.tag)}});
        }
        r["classes"] = std::move(classes);
        emit(config, json_report(config, std::move(r)), out);
    } else {
        std::vector<std::vector<std::string>> rows;
        for (const auto& d : diagnoses) {
            rows.push_back({std::to_string(d.id.value), name_of(d.id), percent(d.natural_accuracy),
                            percent(d.synthetic_accuracy), std::string(to_string(d.tag))});
        }
        emit(config,
             csv_report(config,
                        {"class_id", "class_name", "natural_accuracy", "synthetic_accuracy", "tag"},
                        rows),
             out);
    }
    return kExitOk;
}

// ------------------------------------------------------------ separability

int
run_separability(const ordered_json& config, std::ostream& out) {
    const auto sets = load_all(config.at("inputs"));
    if (sets.size() != 2) {
        fail(ErrorCode::kInvalidArgument, "separability takes exactly two sets");
    }
    const auto probe = train_linear_probe(sets[0].rows(), sets[1].rows(),
                                          config.at("max_epochs").get<std::size_t>(),
                                          seed_of(config));
    if (wants_json(config)) {
        ordered_json r;
        r["set_a"] = sets[0].name();
        r["set_b"] = sets[1].name();
        r["separable"] = probe.separable;
        r["training_accuracy"] = probe.training_accuracy;
        r["epochs"] = probe.epochs;
        r["margin"] = probe.margin;
        r["bias"] = probe.bias;
        r["weights"] = probe.weights;
        emit(config, json_report(config, std::move(r)), out);
    } else {
        emit(config,
             csv_report(config,
                        {"set_a", "set_b", "separable", "training_accuracy", "epochs", "margin"},
                        {{sets[0].name(), sets[1].name(), probe.separable ? "true" : "false",
                          percent(probe.training_accuracy), std::to_string(probe.epochs),
                          real(probe.margin)}}),
             out);
    }
    return kExitOk;
}

// -------------------------------------------------------------- similarity

int
run_similarity(const ordered_json& config, std::ostream& out) {
    const auto sets = load_all(config.at("inputs"));
    const auto summary = modality_similarity_summary(sets);
    if (wants_json(config)) {
        ordered_json r;
        ordered_json pairs = ordered_json::array();
        for (const auto& row : summary.rows) {
            pairs.push_back({{"reference_set", row.reference_set},
                             {"query_set", row.query_set},
                             {"block", to_string(row.block)},
                             {"avg_cos_similarity", row.avg_cos_similarity}});
        }
        r["pairs"] = std::move(pairs);
        r["within_prompt"] = finite_or_null(summary.within_prompt);
        r["within_image"] = finite_or_null(summary.within_image);
        r["cross_modality"] = finite_or_null(summary.cross_modality);
        emit(config, json_report(config, std::move(r)), out);
    } else {
        std::vector<std::vector<std::string>> rows;
        auto four = [](double v) {
            return std::isfinite(v) ? fmt::format("{:.4f}", v) : std::string("n/a");
        };
        for (const auto& row : summary.rows) {
            rows.push_back({"pair", row.reference_set, row.query_set,
                            std::string(to_string(row.block)), four(row.avg_cos_similarity)});
        }
        rows.push_back({"block", "", "", "within-prompt", four(summary.within_prompt)});
        rows.push_back({"block", "", "", "within-image", four(summary.within_image)});
        rows.push_back({"block", "", "", "cross-modality", four(summary.cross_modality)});
        emit(config,
             csv_report(config,
                        {"scope", "reference_set", "query_set", "block", "avg_cos_similarity"},
                        rows),
             out);
    }
    return kExitOk;
}

// --------------------------------------------------------------- promptgen

int
run_promptgen(const ordered_json& config, std::ostream& out) {
    auto classes = load_class_list(config.at("classes").get<std::string>());
    const auto overrides_path = config.at("overrides").get<std::string>();
    if (!overrides_path.empty()) {
        classes = apply_label_overrides(classes, load_label_overrides(overrides_path));
    }
    const auto lexicon_path = config.at("lexicon").get<std::string>();
    const auto lexicon = lexicon_path.empty() ? default_lexicon() : load_lexicon(lexicon_path);
    const auto per_class = config.at("per_class").get<std::size_t>();
    const auto records = generate_prompt_set(classes, per_class, lexicon, seed_of(config));

    std::string text;
    for (const auto& r : records) {
        text += prompt_record_to_json(r);
        text += '\n';
    }
    const auto path = config.at("out").get<std::string>();
    if (path.empty()) {
        out << text;
        return kExitOk;
    }
    write_file(path, text);
    ordered_json r;
    r["manifest"] = path;
    r["classes"] = classes.size();
    r["per_class"] = per_class;
    r["records"] = records.size();
    r["combinations"] = lexicon.combinations();
    write_file(path + ".run.json", json_report(config, std::move(r)));
    return kExitOk;
}

// ---------------------------------------------------------------- simulate

ordered_json
set_summary(const EmbeddingSet& set, const fs::path& path) {
    return {{"path", path.string()},
            {"name", set.name()},
            {"modality", to_string(set.modality())},
            {"split", to_string(set.split())},
            {"rows", set.size()}};
}

int
run_simulate(const ordered_json& config, std::ostream& out) {
    ClusterSpec spec;
    spec.name = config.at("name").get<std::string>();
    spec.dimension = config.at("dimension").get<std::size_t>();
    spec.classes = config.at("classes").get<std::size_t>();
    spec.per_class = config.at("per_class").get<std::size_t>();
    spec.spread = config.at("spread").get<double>();
    spec.shift_degrees = config.at("shift_degrees").get<double>();
    spec.outlier_fraction = config.at("outlier_fraction").get<double>();
    spec.seed = seed_of(config);
    const double gap = config.at("gap_offset").get<double>();
    if (!std::isfinite(gap) || gap < 0.0) {
        fail(ErrorCode::kInvalidArgument, "gap offset must be a finite value >= 0");
    }

    const fs::path dir = config.at("out").get<std::string>();
    if (dir.empty()) {
        fail(ErrorCode::kInvalidArgument, "simulate needs an output directory");
    }
    const auto [refs, queries] = simulate_experiment(spec);
    ordered_json files = ordered_json::array();
    auto save = [&](const EmbeddingSet& set, const std::string& stem) {
        const auto path = dir / (stem + ".json");
        save_set(set, path);
        files.push_back(set_summary(set, path));
    };
    save(refs, spec.name + "-train");
    save(queries, spec.name + "-eval");
    if (gap > 0.0) {
        const auto direction =
            random_direction(spec.dimension, derive_seed(spec.seed, {kGapDirectionStream}));
        const auto prompt_name = spec.name + "-prmt";
        save(apply_modality_gap(refs, gap, direction, prompt_name), prompt_name + "-train");
        save(apply_modality_gap(queries, gap, direction, prompt_name), prompt_name + "-eval");
    }
    ordered_json r;
    r["files"] = std::move(files);
    write_file(dir / (spec.name + ".run.json"), json_report(config, r));
    out << fmt::format("wrote {} sets to {}\n", r["files"].size(), dir.string());
    return kExitOk;
}

// ------------------------------------------------------------------- split

int
run_split(const ordered_json& config, std::ostream& out) {
    const fs::path input = config.at("input").get<std::string>();
    const fs::path dir = config.at("out").get<std::string>();
    if (dir.empty()) {
        fail(ErrorCode::kInvalidArgument, "split needs an output directory");
    }
    const auto set = load_set(input);
    const auto [train, eval] =
        split_set(set, config.at("eval_fraction").get<double>(), seed_of(config));
    const auto stem = input.stem().string();
    const auto train_path = dir / (stem + "-train.json");
    const auto eval_path = dir / (stem + "-eval.json");
    save_set(train, train_path);
    save_set(eval, eval_path);
    ordered_json r;
    r["files"] = ordered_json::array({set_summary(train, train_path), set_summary(eval, eval_path)});
    write_file(dir / (stem + ".split.json"), json_report(config, r));
    out << fmt::format("wrote {} train and {} eval rows to {}\n", train.size(), eval.size(),
                       dir.string());
    return kExitOk;
}

int
dispatch(const ordered_json& config, std::ostream& out, std::ostream& err) {
    const auto command = config.at("command").get<std::string>();
    if (command == "validate") {
        return run_validate(config, out, err);
    }
    if (command == "metrics") {
        return run_metrics(config, out);
    }
    if (command == "matrix") {
        return run_matrix(config, out, err);
    }
    if (command == "diagnose") {
        return run_diagnose(config, out);
    }
    if (command == "separability") {
        return run_separability(config, out);
    }
    if (command == "similarity") {
        return run_similarity(config, out);
    }
    if (command == "promptgen") {
        return run_promptgen(config, out);
    }
    if (command == "simulate") {
        return run_simulate(config, out);
    }
    if (command == "split") {
        return run_split(config, out);
    }
    fail(ErrorCode::kInvalidArgument, "unknown command '" + command + "'");
}

}  // namespace

ordered_json
config_from_report(const fs::path& path) {
    const auto text = read_file(path);
    if (!text.empty() && text.front() == '#') {
        std::istringstream lines(text);
        std::string line;
        const std::string prefix = "# config: ";
        while (std::getline(lines, line) && line.starts_with("#")) {
            if (line.starts_with(prefix)) {
                try {
                    return ordered_json::parse(line.substr(prefix.size()));
                } catch (const nlohmann::json::exception& e) {
                    fail(ErrorCode::kManifestParse,
                         path.string() + ": malformed config line: " + e.what());
                }
            }
        }
        fail(ErrorCode::kManifestParse, path.string() + ": no '# config:' line");
    }
    ordered_json report;
    try {
        report = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kManifestParse, path.string() + ": not a report: " + e.what());
    }
    if (!report.is_object() || !report.contains("config") || !report["config"].is_object()) {
        fail(ErrorCode::kManifestParse, path.string() + ": report has no config object");
    }
    return report["config"];
}

int
execute(const ordered_json& config, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(config, out, err);
    } catch (const Error& e) {
        err << kToolName << ": " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        err << kToolName << ": malformed configuration: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << kToolName << ": internal error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace embedlens::cli
