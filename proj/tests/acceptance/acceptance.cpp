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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "embedlens/classify.hpp"
#include "embedlens/cli.hpp"
#include "embedlens/metrics.hpp"
#include "embedlens/promptgen.hpp"
#include "embedlens/separability.hpp"
#include "embedlens/simulator.hpp"
#include "oracle/brute_force.hpp"
#include "support/test_support.hpp"

using namespace embedlens;
using namespace embedlens::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void
    require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

bool
close_relative(double got, double want, double tol) {
    return std::abs(got - want) <= tol * std::abs(want);
}

ClusterSpec
spec_of(std::size_t classes, std::size_t dim, std::size_t per_class, double spread, double degrees,
        std::uint64_t seed) {
    ClusterSpec s;
    s.classes = classes;
    s.dimension = dim;
    s.per_class = per_class;
    s.spread = spread;
    s.shift_degrees = degrees;
    s.seed = seed;
    return s;
}

Outcome
formula_oracle() {
    Outcome o;
    std::mt19937_64 gen(20260101);
    std::size_t instances = 0;
    std::size_t metric_checks = 0;
    std::size_t label_checks = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t dim : {2u, 8u, 16u}) {
        for (int t = 0; t < 40; ++t) {
            std::uniform_int_distribution<std::size_t> n_classes(2, 10);
            std::uniform_int_distribution<std::size_t> count(1, 50);
            const std::size_t C = n_classes(gen);
            std::vector<oracle::Mat> ref_classes;
            std::vector<oracle::Mat> query_classes;
            oracle::Mat queries;
            std::vector<std::pair<std::int64_t, Matrix>> r;
            std::vector<std::pair<std::int64_t, Matrix>> q;
            for (std::size_t c = 0; c < C; ++c) {
                ref_classes.push_back(gaussian_rows(gen, count(gen), dim));
                query_classes.push_back(gaussian_rows(gen, count(gen), dim));
                r.emplace_back(static_cast<std::int64_t>(c), ref_classes.back());
                q.emplace_back(static_cast<std::int64_t>(c), query_classes.back());
                queries.insert(queries.end(), query_classes.back().begin(), query_classes.back().end());
            }
            const auto refs = make_set("r", Split::kTrain, r);
            const auto query_set = make_set("q", Split::kEval, q);
            ++instances;

            for (std::size_t c = 0; c < C; ++c) {
                if (ref_classes[c].size() >= 2) {
                    const double got = class_centroid_distance(refs.class_rows(c));
                    const double want = oracle::class_centroid_distance(ref_classes[c]);
                    o.require(close_relative(got, want, 1e-9),
                              fmt::format("centroid distance {} vs {}", got, want));
                    ++metric_checks;
                }
                const double got = centroid_shift(refs.class_rows(c), query_set.class_rows(c));
                const double want = oracle::centroid_shift(ref_classes[c], query_classes[c]);
                o.require(close_relative(got, want, 1e-9), fmt::format("centroid shift {} vs {}", got, want));
                ++metric_checks;
            }

            const auto ca = centroid_accuracy(refs, query_set, 1);
            const auto want_ca = oracle::centroid_classify(ref_classes, queries);
            for (std::size_t i = 0; i < want_ca.size(); ++i) {
                o.require(ca.predictions[i].predicted.value == static_cast<std::int64_t>(want_ca[i]),
                          "centroid prediction differs");
                ++label_checks;
            }
            for (std::size_t k : {1u, 3u, 5u}) {
                if (k > refs.size()) {
                    continue;
                }
                const auto kn = knn_classify(refs, query_set, k, 1);
                const auto want_kn = oracle::knn_classify(ref_classes, queries, k);
                for (std::size_t i = 0; i < want_kn.size(); ++i) {
                    o.require(kn.predictions[i].predicted.value == static_cast<std::int64_t>(want_kn[i]),
                              fmt::format("knn{} prediction differs", k));
                    ++label_checks;
                }
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(instances >= 100, "too few instances");
    o.require(secs < 60.0, fmt::format("took {:.1f} s", secs));
    if (o.pass) {
        o.detail = fmt::format("{} instances, {} metric and {} label checks, {:.2f} s", instances,
                               metric_checks, label_checks, secs);
    }
    return o;
}

Outcome
closed_form_simulator() {
    Outcome o;
    double worst_shift = 0.0;
    double worst_cd = 0.0;
    for (double degrees : {0.0, 30.0, 60.0, 90.0}) {
        const auto [refs, queries] = simulate_experiment(spec_of(10, 16, 20, 0.0, degrees, 7));
        const double want = 1.0 - std::cos(degrees * std::numbers::pi / 180.0);
        for (std::size_t c = 0; c < refs.num_classes(); ++c) {
            const double shift = centroid_shift(refs.class_rows(c), queries.class_rows(c));
            worst_shift = std::max(worst_shift, std::abs(shift - want));
            worst_cd = std::max({worst_cd, class_centroid_distance(refs.class_rows(c)),
                                 class_centroid_distance(queries.class_rows(c))});
        }
    }
    o.require(worst_shift <= 1e-9, fmt::format("shift error {}", worst_shift));
    o.require(worst_cd <= 1e-12, fmt::format("centroid distance {}", worst_cd));
    if (o.pass) {
        o.detail = fmt::format("max shift error {:.2e}, max centroid distance {:.2e}", worst_shift, worst_cd);
    }
    return o;
}

Outcome
monotonicity() {
    Outcome o;
    const std::vector<double> spreads{0.0, 0.05, 0.1, 0.2, 0.4};
    std::vector<double> mean_cd(spreads.size(), 0.0);
    double acc_0 = 0.0;
    double acc_60 = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        for (std::size_t s = 0; s < spreads.size(); ++s) {
            const auto [refs, queries] = simulate_experiment(spec_of(10, 16, 200, spreads[s], 0.0, seed));
            mean_cd[s] += set_centroid_distance(refs).set_centroid_distance / 10.0;
        }
        for (double degrees : {0.0, 60.0}) {
            const auto [refs, queries] = simulate_experiment(spec_of(10, 16, 200, 0.1, degrees, seed));
            const double acc = centroid_accuracy(refs, queries, seed).accuracy / 10.0;
            (degrees == 0.0 ? acc_0 : acc_60) += acc;
        }
    }
    for (std::size_t s = 1; s < spreads.size(); ++s) {
        o.require(mean_cd[s] > mean_cd[s - 1],
                  fmt::format("centroid distance not increasing at spread {}", spreads[s]));
    }
    o.require(acc_0 > acc_60, fmt::format("accuracy {} at 0 deg vs {} at 60 deg", acc_0, acc_60));
    if (o.pass) {
        o.detail = fmt::format("centroid distance {:.3g} {:.3g} {:.3g} {:.3g} {:.3g}; accuracy {:.3f} > {:.3f}",
                               mean_cd[0], mean_cd[1], mean_cd[2], mean_cd[3], mean_cd[4], acc_0, acc_60);
    }
    return o;
}

Outcome
singleton_equivalence() {
    Outcome o;
    std::mt19937_64 gen(50);
    std::size_t queries_checked = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t dim = std::array<std::size_t, 3>{2, 8, 16}[t % 3];
        const std::size_t C = 2 + static_cast<std::size_t>(t % 9);
        std::vector<std::pair<std::int64_t, Matrix>> r;
        std::vector<std::pair<std::int64_t, Matrix>> q;
        for (std::size_t c = 0; c < C; ++c) {
            r.emplace_back(static_cast<std::int64_t>(c), gaussian_rows(gen, 1, dim));
            q.emplace_back(static_cast<std::int64_t>(c), gaussian_rows(gen, 1 + c % 7, dim));
        }
        const auto refs = make_set("r", Split::kTrain, r);
        const auto queries = make_set("q", Split::kEval, q);
        const auto seed = static_cast<std::uint64_t>(t);
        const auto ca = centroid_accuracy(refs, queries, seed);
        const auto kn = knn_classify(refs, queries, 1, seed);
        for (std::size_t i = 0; i < ca.predictions.size(); ++i) {
            o.require(ca.predictions[i].predicted == kn.predictions[i].predicted,
                      fmt::format("instance {} query {} differs", t, i));
            ++queries_checked;
        }
    }
    if (o.pass) {
        o.detail = fmt::format("50 instances, {} queries identical", queries_checked);
    }
    return o;
}

Outcome
knn_outliers() {
    Outcome o;
    double acc1 = 0.0;
    double acc5 = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto spec = spec_of(10, 16, 200, 0.1, 0.0, seed);
        spec.outlier_fraction = 0.1;
        const auto [refs, queries] = simulate_experiment(spec);
        acc1 += knn_classify(refs, queries, 1, seed).accuracy / 10.0;
        acc5 += knn_classify(refs, queries, 5, seed).accuracy / 10.0;
    }
    o.require(acc5 >= acc1, fmt::format("knn5 {} < knn1 {}", acc5, acc1));
    if (o.pass) {
        o.detail = fmt::format("mean accuracy knn5 {:.4f} >= knn1 {:.4f}", acc5, acc1);
    }
    return o;
}

Outcome
frechet_sanity() {
    Outcome o;
    const auto [refs, queries] = simulate_experiment(spec_of(10, 16, 50, 0.1, 0.0, 3));
    const double self = frechet_distance(refs.rows(), refs.rows()).total;
    o.require(self <= 1e-6, fmt::format("FD(x, x) = {}", self));

    const auto column = [](std::vector<double> v) {
        Matrix m;
        for (double x : v) {
            m.push_back({x});
        }
        return to_embeddings(m);
    };
    // Sample variances with 1/(N-1): {-1, 1} -> 2, {2, 4} -> 2, {-2, 2} -> 8.
    const auto a = column({-1.0, 1.0});
    const auto b = column({2.0, 4.0});
    const auto c = column({-2.0, 2.0});
    const struct {
        const Embeddings* x;
        const Embeddings* y;
        FrechetMeanTerm term;
        double want;
    } cases[] = {{&a, &b, FrechetMeanTerm::kSquared, 9.0},
                 {&a, &b, FrechetMeanTerm::kAbsolute, 3.0},
                 {&a, &c, FrechetMeanTerm::kSquared, 2.0},
                 {&b, &c, FrechetMeanTerm::kSquared, 11.0}};
    for (const auto& k : cases) {
        const double got = frechet_distance(*k.x, *k.y, k.term).total;
        o.require(std::abs(got - k.want) <= 1e-9, fmt::format("univariate {} vs {}", got, k.want));
    }

    double fd_0 = 0.0;
    double fd_90 = 0.0;
    for (double degrees : {0.0, 90.0}) {
        const auto [r, q] = simulate_experiment(spec_of(10, 16, 50, 0.1, degrees, 3));
        (degrees == 0.0 ? fd_0 : fd_90) = frechet_distance(r.rows(), q.rows()).total;
    }
    o.require(fd_0 < fd_90, fmt::format("FD at 0 deg {} vs 90 deg {}", fd_0, fd_90));
    if (o.pass) {
        o.detail = fmt::format("self {:.2e}; 4 univariate cases exact; FD {:.4f} < {:.4f}", self, fd_0, fd_90);
    }
    return o;
}

Outcome
separability_certificate() {
    Outcome o;
    // Per-coordinate spread 0.03 keeps the clusters tighter than the offset;
    // at 0.1 the shifted copies overlap the originals and no hyperplane exists.
    constexpr double kSpread = 0.03;
    std::size_t worst_epochs = 0;
    double best_shuffled = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto [images, unused] = simulate_experiment(spec_of(10, 16, 100, kSpread, 0.0, 11 + seed));
        const auto direction = random_direction(16, seed);
        const auto prompts = apply_modality_gap(images, 0.5, direction, "prmt");
        const auto probe = train_linear_probe(images.rows(), prompts.rows(), kDefaultProbeEpochs, seed);
        o.require(probe.separable, fmt::format("seed {}: gap sets not separable, accuracy {}", seed,
                                               probe.training_accuracy));
        o.require(probe.epochs < kDefaultProbeEpochs, fmt::format("seed {}: used {} epochs", seed, probe.epochs));
        std::size_t errors = 0;
        for (std::size_t i = 0; i < images.size(); ++i) {
            errors += probe_score(probe, images.rows()[i]) > 0.0 ? 0 : 1;
            errors += probe_score(probe, prompts.rows()[i]) < 0.0 ? 0 : 1;
        }
        o.require(errors == 0, fmt::format("seed {}: hyperplane misclassifies {} points", seed, errors));
        worst_epochs = std::max(worst_epochs, probe.epochs);

        // One set, labels shuffled into two random halves.
        std::vector<std::size_t> order(images.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), std::mt19937_64(seed));
        std::vector<double> side_a;
        std::vector<double> side_b;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const auto row = images.rows()[order[i]];
            auto& side = i % 2 == 0 ? side_a : side_b;
            side.insert(side.end(), row.begin(), row.end());
        }
        const auto shuffled = train_linear_probe(Rows(side_a, 16), Rows(side_b, 16), kDefaultProbeEpochs, seed);
        o.require(!shuffled.separable, fmt::format("seed {}: label-shuffled set reported separable", seed));
        best_shuffled = std::max(best_shuffled, shuffled.training_accuracy);
    }
    if (o.pass) {
        o.detail = fmt::format("5 seeds: gap sets separable with 0 errors in at most {} epochs; "
                               "shuffled copies not separable (best accuracy {:.3f})",
                               worst_epochs, best_shuffled);
    }
    return o;
}

Outcome
promptaug_fidelity() {
    Outcome o;
    const auto lex = default_lexicon();
    const struct {
        PromptChoices choices;
        const char* text;
    } published[] = {
        {{"beautiful", "", "common", "extremely", "small", "with many other other objects visible", "Hyper-sharp"},
         "beautiful, common, extremely small quail, with many other other objects visible. Hyper-sharp."},
        {{"old", "", "common", "extremely", "large size", "centered in the image", "Typical snapshot"},
         "old, common, extremely large size quail, centered in the image. Typical snapshot."},
        {{"ugly", "extremely", "uncommon", "slightly", "small size", "centered in the image", "Hyper-sharp"},
         "ugly, extremely uncommon, slightly small size quail, centered in the image. Hyper-sharp."},
    };
    const auto has = [](const std::vector<std::string>& slot, const std::string& v) {
        return std::find(slot.begin(), slot.end(), v) != slot.end();
    };
    for (const auto& p : published) {
        const auto& c = p.choices;
        o.require(has(lex.looks, c.looks) && has(lex.extent, c.extent1) && has(lex.typical, c.typical) &&
                      has(lex.extent, c.extent2) && has(lex.size, c.size) && has(lex.location, c.location) &&
                      has(lex.style, c.style),
                  fmt::format("choices for '{}' missing from the default lexicon", p.text));
        o.require(assemble_prompt("quail", c) == p.text, fmt::format("'{}' not reproduced", p.text));
        const auto parsed = parse_prompt(p.text, "quail", lex);
        o.require(parsed.size() == 1 && parsed[0] == c, fmt::format("'{}' does not parse back", p.text));
    }

    std::vector<ClassLabel> classes;
    for (std::int64_t c = 0; c < 10; ++c) {
        classes.push_back({ClassId{c}, "class " + std::to_string(c)});
    }
    const auto start = std::chrono::steady_clock::now();
    const auto records = generate_prompt_set(classes, 1250, lex, 2026);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::size_t duplicates = 0;
    std::map<std::int64_t, std::unordered_set<std::string>> seen;
    for (const auto& r : records) {
        duplicates += seen[r.class_id.value].insert(r.prompt).second ? 0 : 1;
    }
    o.require(records.size() == 12500, fmt::format("{} records", records.size()));
    o.require(duplicates == 0, fmt::format("{} duplicates", duplicates));
    o.require(secs < 10.0, fmt::format("generation took {:.2f} s", secs));
    if (o.pass) {
        o.detail = fmt::format("3 published prompts exact; 12500 prompts, 0 duplicates, {:.2f} s", secs);
    }
    return o;
}

int
cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    return run_cli(args, out, err);
}

// Files under a directory keyed by relative path, timestamps dropped.
std::map<std::string, std::string>
snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            files[fs::relative(e.path(), dir).string()] = without_timestamp(slurp(e.path()));
        }
    }
    return files;
}

Outcome
cli_determinism() {
    Outcome o;
    TempDir tmp;
    const auto s = [](const fs::path& p) { return p.string(); };
    const auto sims = tmp / "sims";
    if (cli({"simulate", "--out", s(sims), "--per-class", "30", "--seed", "5", "--shift-deg", "20",
             "--gap-offset", "0.5"}) != 0 ||
        cli({"split", s(sims / "sim-train.json"), "--out", s(tmp / "parts"), "--seed", "2",
             "--eval-fraction", "0.2"}) != 0) {
        o.require(false, "setup commands failed");
        return o;
    }

    // Directory outputs: move the originals aside, rerun from their report.
    const auto rerun_dir = [&](const std::string& name, const fs::path& dir, const std::string& report) {
        const auto before = snapshot(dir);
        const fs::path moved = s(dir) + ".orig";
        fs::rename(dir, moved);
        o.require(cli({"rerun", s(moved / report)}) == 0, name + ": rerun failed");
        o.require(snapshot(dir) == before, name + ": rerun output differs");
    };
    rerun_dir("simulate", sims, "sim.run.json");
    rerun_dir("split", tmp / "parts", "sim-train.split.json");

    const auto train = s(sims / "sim-train.json");
    const auto eval = s(sims / "sim-eval.json");
    const auto ptrain = s(sims / "sim-prmt-train.json");
    const auto peval = s(sims / "sim-prmt-eval.json");
    const std::string data = EMBEDLENS_DATA_DIR;
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
        {"validate", {"validate", train, eval}},
        {"validate-csv", {"validate", train, "--format", "csv"}},
        {"metrics", {"metrics", train}},
        {"metrics-pair", {"metrics", train, eval, "--format", "json"}},
        {"matrix", {"matrix", train, eval, ptrain, peval, "--seed", "3", "--skip", "*:knn5"}},
        {"matrix-json", {"matrix", train, eval, "--format", "json", "--methods", "centroid,knn3"}},
        {"diagnose", {"diagnose", "--refs", train, "--natural", eval, "--synthetic", peval}},
        {"separability", {"separability", train, ptrain}},
        {"similarity", {"similarity", train, eval, ptrain, peval}},
        {"promptgen", {"promptgen", "--classes", data + "/classes_example.json", "--overrides",
                       data + "/label_overrides_example.json", "--per-class", "20", "--seed", "8"}},
    };
    std::size_t checked = 2;
    for (const auto& [name, base] : commands) {
        auto args = base;
        const auto target = tmp / "reports" / name;
        args.insert(args.end(), {"--out", s(target)});
        if (cli(args) != 0) {
            o.require(false, name + ": command failed");
            continue;
        }
        const fs::path moved = s(target) + ".orig";
        fs::rename(target, moved);
        std::string report = s(moved);
        if (name == "promptgen") {
            // The prompt file carries no config; its sidecar does.
            fs::rename(s(target) + ".run.json", s(moved) + ".run.json");
            report = s(moved) + ".run.json";
        }
        const int rc = cli({"rerun", report, "--out", s(target)});
        o.require(rc == 0, name + ": rerun failed");
        const auto first = without_timestamp(slurp(moved));
        const auto second = without_timestamp(slurp(target));
        o.require(first == second, name + ": rerun output differs");
        ++checked;
    }
    if (o.pass) {
        o.detail = fmt::format("{} command reruns byte-identical", checked);
    }
    return o;
}

}  // namespace

int
main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"formula-oracle", formula_oracle},
        {"closed-form-simulator", closed_form_simulator},
        {"monotonicity", monotonicity},
        {"singleton-equivalence", singleton_equivalence},
        {"knn-outliers", knn_outliers},
        {"frechet-sanity", frechet_sanity},
        {"separability-certificate", separability_certificate},
        {"promptaug-fidelity", promptaug_fidelity},
        {"cli-determinism", cli_determinism},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome result;
        try {
            result = run();
        } catch (const std::exception& e) {
            result.pass = false;
            result.detail = std::string("exception: ") + e.what();
        }
        failures += result.pass ? 0 : 1;
        fmt::print("{} {}: {}\n", result.pass ? "PASS" : "FAIL", name, result.detail);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
