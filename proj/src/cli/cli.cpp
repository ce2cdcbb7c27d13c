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

#include "embedlens/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>

#include "commands.hpp"
#include "embedlens/parallel.hpp"
#include "embedlens/separability.hpp"

namespace embedlens {

int
exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::kIoFailure:
            return kExitIo;
        case ErrorCode::kNumericalFailure:
            return kExitNumerical;
        default:
            return kExitValidation;
    }
}

namespace {

using cli::ordered_json;

void
configure_threads(long long requested) {
    if (requested > 0) {
        set_thread_count(static_cast<std::size_t>(requested));
        return;
    }
    if (const char* env = std::getenv("EMBEDLENS_THREADS")) {
        char* end = nullptr;
        const long long n = std::strtoll(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) {
            set_thread_count(static_cast<std::size_t>(n));
            return;
        }
    }
    set_thread_count(0);
}

ordered_json
base_config(const std::string& command, std::uint64_t seed, const std::string& out,
            const std::string& format) {
    ordered_json c;
    c["command"] = command;
    c["seed"] = seed;
    c["out"] = out;
    c["format"] = format;
    return c;
}

}  // namespace

int
run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Diagnostics for labeled embedding sets in a joint text/image space",
                 std::string(kToolName)};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    long long threads = 0;
    app.add_option("--threads", threads,
                   "Worker threads (default: EMBEDLENS_THREADS, else all cores)");

    // Option storage shared by the subcommands.
    std::vector<std::string> inputs;
    std::string out_path;
    std::uint64_t seed = 0;

    auto* validate = app.add_subcommand("validate", "Load sets and report their structure");
    validate->add_option("sets", inputs, "Set manifests")->required();
    std::string validate_format = "json";
    validate->add_option("--format", validate_format)->check(CLI::IsMember({"csv", "json"}));
    validate->add_option("--out", out_path);
    validate->add_option("--seed", seed);

    auto* metrics = app.add_subcommand("metrics", "Centroid Distance; with two sets also centroid shift and Frechet distance");
    std::vector<std::string> metric_sets;
    metrics->add_option("sets", metric_sets, "One or two set manifests")->required()->expected(1, 2);
    std::string metrics_format = "csv";
    metrics->add_option("--format", metrics_format)->check(CLI::IsMember({"csv", "json"}));
    metrics->add_option("--out", out_path);
    metrics->add_option("--seed", seed);

    auto* matrix = app.add_subcommand("matrix", "Classification over every reference/query pair");
    std::vector<std::string> matrix_sets;
    matrix->add_option("sets", matrix_sets, "Train-split and eval-split set manifests")->required();
    std::vector<std::string> methods{"centroid", "knn1", "knn5"};
    matrix->add_option("--methods", methods, "Methods (centroid, knnK)")->delimiter(',');
    std::vector<std::string> skips;
    matrix->add_option("--skip", skips, "Skip cells: QUERY:METHOD or REF:QUERY:METHOD ('*' wildcard)");
    std::string matrix_format = "csv";
    matrix->add_option("--format", matrix_format)->check(CLI::IsMember({"csv", "json"}));
    matrix->add_option("--out", out_path);
    matrix->add_option("--seed", seed);

    auto* diagnose = app.add_subcommand("diagnose", "Per-class failure modes from natural vs synthetic queries");
    std::string refs_path;
    std::string natural_path;
    std::string synthetic_path;
    double low = 0.6;
    double high = 0.8;
    std::string diagnose_method = "centroid";
    diagnose->add_option("--refs", refs_path, "Reference set (train split)")->required();
    diagnose->add_option("--natural", natural_path, "Natural query set (eval split)")->required();
    diagnose->add_option("--synthetic", synthetic_path, "Synthetic query set (eval split)")->required();
    diagnose->add_option("--low", low, "Accuracy below this is low")->capture_default_str();
    diagnose->add_option("--high", high, "Accuracy at or above this is high")->capture_default_str();
    diagnose->add_option("--method", diagnose_method)->capture_default_str();
    std::string diagnose_format = "csv";
    diagnose->add_option("--format", diagnose_format)->check(CLI::IsMember({"csv", "json"}));
    diagnose->add_option("--out", out_path);
    diagnose->add_option("--seed", seed);

    auto* separability = app.add_subcommand("separability", "Perceptron probe between two pooled sets");
    std::vector<std::string> probe_sets;
    separability->add_option("sets", probe_sets, "Set A and set B")->required()->expected(2);
    std::size_t max_epochs = kDefaultProbeEpochs;
    separability->add_option("--max-epochs", max_epochs)->capture_default_str();
    std::string probe_format = "json";
    separability->add_option("--format", probe_format)->check(CLI::IsMember({"csv", "json"}));
    separability->add_option("--out", out_path);
    separability->add_option("--seed", seed);

    auto* similarity = app.add_subcommand("similarity", "Within- and cross-modality average cosine similarity");
    std::vector<std::string> similarity_sets;
    similarity->add_option("sets", similarity_sets, "Train-split and eval-split set manifests")->required();
    std::string similarity_format = "csv";
    similarity->add_option("--format", similarity_format)->check(CLI::IsMember({"csv", "json"}));
    similarity->add_option("--out", out_path);
    similarity->add_option("--seed", seed);

    auto* promptgen = app.add_subcommand("promptgen", "Generate augmented prompts (JSON lines)");
    std::string classes_path;
    std::string lexicon_path;
    std::string overrides_path;
    std::size_t per_class = 1;
    promptgen->add_option("--classes", classes_path, "JSON array of {id, name}")->required();
    promptgen->add_option("--lexicon", lexicon_path, "Modifier lexicon JSON (default: built in)");
    promptgen->add_option("--overrides", overrides_path, "Label overrides JSON array of {id, prompt}");
    promptgen->add_option("--per-class", per_class)->capture_default_str();
    promptgen->add_option("--out", out_path, "Manifest path (default: stdout)");
    promptgen->add_option("--seed", seed);

    auto* simulate = app.add_subcommand("simulate", "Write synthetic reference/query sets");
    std::string sim_name = "sim";
    std::size_t sim_dim = 16;
    std::size_t sim_classes = 10;
    std::size_t sim_per_class = 100;
    double sim_spread = 0.1;
    double sim_shift = 0.0;
    double sim_outliers = 0.0;
    double sim_gap = 0.0;
    simulate->add_option("--name", sim_name)->capture_default_str();
    simulate->add_option("--dim", sim_dim)->capture_default_str();
    simulate->add_option("--classes", sim_classes)->capture_default_str();
    simulate->add_option("--per-class", sim_per_class)->capture_default_str();
    simulate->add_option("--spread", sim_spread)->capture_default_str();
    simulate->add_option("--shift-deg", sim_shift)->capture_default_str();
    simulate->add_option("--outlier-fraction", sim_outliers)->capture_default_str();
    simulate->add_option("--gap-offset", sim_gap, "Also write prompt-modality copies moved by this offset")
        ->capture_default_str();
    simulate->add_option("--out", out_path, "Output directory")->required();
    simulate->add_option("--seed", seed);

    auto* split = app.add_subcommand("split", "Split a set into train and eval parts");
    std::string split_input;
    double eval_fraction = 0.04;
    split->add_option("set", split_input, "Set manifest")->required();
    split->add_option("--eval-fraction", eval_fraction)->capture_default_str();
    split->add_option("--out", out_path, "Output directory")->required();
    split->add_option("--seed", seed);

    auto* rerun = app.add_subcommand("rerun", "Re-execute the configuration embedded in a report");
    std::string report_path;
    rerun->add_option("report", report_path, "Report or sidecar file")->required();
    rerun->add_option("--out", out_path, "Override the output path");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back(kToolName);
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitValidation;
    }
    configure_threads(threads);

    ordered_json config;
    if (validate->parsed()) {
        config = base_config("validate", seed, out_path, validate_format);
        config["inputs"] = inputs;
    } else if (metrics->parsed()) {
        config = base_config("metrics", seed, out_path, metrics_format);
        config["inputs"] = metric_sets;
    } else if (matrix->parsed()) {
        config = base_config("matrix", seed, out_path, matrix_format);
        config["inputs"] = matrix_sets;
        config["methods"] = methods;
        config["skip"] = skips;
    } else if (diagnose->parsed()) {
        config = base_config("diagnose", seed, out_path, diagnose_format);
        config["refs"] = refs_path;
        config["natural"] = natural_path;
        config["synthetic"] = synthetic_path;
        config["method"] = diagnose_method;
        config["low"] = low;
        config["high"] = high;
    } else if (separability->parsed()) {
        config = base_config("separability", seed, out_path, probe_format);
        config["inputs"] = probe_sets;
        config["max_epochs"] = max_epochs;
    } else if (similarity->parsed()) {
        config = base_config("similarity", seed, out_path, similarity_format);
        config["inputs"] = similarity_sets;
    } else if (promptgen->parsed()) {
        config = base_config("promptgen", seed, out_path, "jsonl");
        config["classes"] = classes_path;
        config["lexicon"] = lexicon_path;
        config["overrides"] = overrides_path;
        config["per_class"] = per_class;
    } else if (simulate->parsed()) {
        config = base_config("simulate", seed, out_path, "json");
        config["name"] = sim_name;
        config["dimension"] = sim_dim;
        config["classes"] = sim_classes;
        config["per_class"] = sim_per_class;
        config["spread"] = sim_spread;
        config["shift_degrees"] = sim_shift;
        config["outlier_fraction"] = sim_outliers;
        config["gap_offset"] = sim_gap;
    } else if (split->parsed()) {
        config = base_config("split", seed, out_path, "json");
        config["input"] = split_input;
        config["eval_fraction"] = eval_fraction;
    } else if (rerun->parsed()) {
        try {
            config = cli::config_from_report(report_path);
        } catch (const Error& e) {
            err << kToolName << ": " << e.what() << '\n';
            return exit_code_for(e.code());
        }
        if (!out_path.empty()) {
            config["out"] = out_path;
        }
    }
    return cli::execute(config, out, err);
}

}  // namespace embedlens
