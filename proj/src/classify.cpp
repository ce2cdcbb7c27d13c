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

#include "embedlens/classify.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <utility>

#include "embedlens/error.hpp"
#include "embedlens/metrics.hpp"
#include "embedlens/rng.hpp"

namespace embedlens {

namespace {

struct Candidate {
    double sim;
    std::size_t entry;
};

bool
by_similarity_then_entry(const Candidate& a, const Candidate& b) {
    if (a.sim != b.sim) {
        return a.sim > b.sim;
    }
    return a.entry < b.entry;
}

/// Checks the query side against an index and returns, per query row, the
/// position of its true class in the index.
std::vector<std::size_t>
true_reference_classes(const ReferenceIndex& index, const EmbeddingSet& queries) {
    if (queries.split() != Split::kEval) {
        fail(ErrorCode::kSplitMismatch, "query set '" + queries.name() + "' must be an eval split");
    }
    if (queries.dimension() != index.dimension()) {
        fail(ErrorCode::kDimensionMismatch,
             "query set '" + queries.name() + "' has dimension " +
                 std::to_string(queries.dimension()) + ", reference set '" + index.set_name() +
                 "' has " + std::to_string(index.dimension()));
    }
    std::vector<std::size_t> out(queries.size());
    for (const auto& e : queries.classes()) {
        const auto pos = index.find_class(e.label.id);
        if (!pos) {
            fail(ErrorCode::kClassUniverseMismatch,
                 "query class " + std::to_string(e.label.id.value) + " of set '" + queries.name() +
                     "' is absent from reference set '" + index.set_name() + "'");
        }
        std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(e.offset), e.count, *pos);
    }
    return out;
}

Embeddings
normalized_queries(const EmbeddingSet& queries) {
    try {
        return normalize_rows(queries.rows());
    } catch (const Error& e) {
        fail(e.code(), "query set '" + queries.name() + "': " + e.what());
    }
}

/// Arg-max with the full list of exactly tied entries, in entry order.
struct BestSoFar {
    double sim = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> tied;

    void
    offer(std::size_t first, std::span<const double> sims) {
        for (std::size_t j = 0; j < sims.size(); ++j) {
            if (sims[j] > sim) {
                sim = sims[j];
                tied.assign(1, first + j);
            } else if (sims[j] == sim) {
                tied.push_back(first + j);
            }
        }
    }

    std::size_t
    pick(std::uint64_t seed) const {
        if (tied.size() == 1) {
            return tied.front();
        }
        Rng rng(seed);
        return tied[rng.uniform_index(tied.size())];
    }
};

/// Streaming top-k that keeps every candidate tying with the current k-th
/// similarity, so boundary ties can be resolved fairly at the end.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k), cap_(4 * k + 64) {
    }

    void
    offer(std::size_t first, std::span<const double> sims) {
        for (std::size_t j = 0; j < sims.size(); ++j) {
            if (sims[j] >= threshold_) {
                items_.push_back({sims[j], first + j});
            }
        }
        if (items_.size() > cap_) {
            prune();
        }
    }

    /// The k chosen neighbours, most similar first.
    std::vector<Candidate>
    select(std::optional<Rng>& rng, std::uint64_t seed) {
        std::sort(items_.begin(), items_.end(), by_similarity_then_entry);
        const double kth = items_[k_ - 1].sim;
        std::vector<Candidate> chosen;
        std::vector<Candidate> boundary;
        for (const auto& c : items_) {
            if (c.sim > kth) {
                chosen.push_back(c);
            } else if (c.sim == kth) {
                boundary.push_back(c);
            }
        }
        const std::size_t need = k_ - chosen.size();
        if (boundary.size() > need) {
            if (!rng) {
                rng.emplace(seed);
            }
            for (std::size_t t = 0; t < need; ++t) {
                const std::size_t j = t + rng->uniform_index(boundary.size() - t);
                std::swap(boundary[t], boundary[j]);
            }
            boundary.resize(need);
        }
        chosen.insert(chosen.end(), boundary.begin(), boundary.end());
        return chosen;
    }

private:
    void
    prune() {
        auto kth_it = items_.begin() + static_cast<std::ptrdiff_t>(k_ - 1);
        std::nth_element(items_.begin(), kth_it, items_.end(),
                         [](const Candidate& a, const Candidate& b) { return a.sim > b.sim; });
        threshold_ = kth_it->sim;
        std::erase_if(items_, [this](const Candidate& c) { return c.sim < threshold_; });
    }

    std::size_t k_;
    std::size_t cap_;
    double threshold_ = -std::numeric_limits<double>::infinity();
    std::vector<Candidate> items_;
};

ExperimentResult
summarize(ExperimentSpec spec,
          const EmbeddingSet& queries,
          std::vector<Prediction> predictions,
          double avg_cos) {
    ExperimentResult out;
    out.spec = std::move(spec);
    std::size_t correct = 0;
    for (const auto& e : queries.classes()) {
        auto& bucket = out.per_class[e.label.id];
        for (std::size_t i = e.offset; i < e.offset + e.count; ++i) {
            bucket.total += 1;
            if (predictions[i].correct) {
                bucket.correct += 1;
            }
        }
        correct += bucket.correct;
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(queries.size());
    out.avg_cos_similarity = avg_cos;
    out.predictions = std::move(predictions);
    return out;
}

std::vector<std::string>
split_on(std::string_view text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = text.find(sep, start);
        parts.emplace_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

}  // namespace

std::string
to_string(const Method& m) {
    return m.kind == Method::Kind::kCentroid ? std::string("centroid") : "knn" + std::to_string(m.k);
}

Method
parse_method(std::string_view text) {
    if (text == "centroid") {
        return Method::centroid();
    }
    if (text.starts_with("knn")) {
        std::string_view digits = text.substr(3);
        if (digits.starts_with(":")) {
            digits.remove_prefix(1);
        } else if (digits.starts_with("(") && digits.ends_with(")")) {
            digits = digits.substr(1, digits.size() - 2);
        }
        std::size_t k = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec == std::errc() && ptr == digits.data() + digits.size() && k >= 1) {
            return Method::knn(k);
        }
    }
    fail(ErrorCode::kInvalidArgument, "unknown method '" + std::string(text) +
                                          "' (expected centroid or knnK with K >= 1)");
}

Prediction
nearest_reference(const UnitVector& query, const ReferenceIndex& index, std::uint64_t seed) {
    if (query.size() != index.dimension()) {
        fail(ErrorCode::kDimensionMismatch, "query of dimension " + std::to_string(query.size()) +
                                                " against references of dimension " +
                                                std::to_string(index.dimension()));
    }
    BestSoFar best;
    similarity_sweep(Rows(query.values(), query.size()), index.entries(),
                     [&](std::size_t, std::size_t first, std::span<const double> sims) {
                         best.offer(first, sims);
                     });
    const std::size_t entry = best.pick(seed);
    Prediction p;
    p.predicted = index.classes()[index.entry_class(entry)].id;
    p.similarity = best.sim;
    return p;
}

ExperimentResult
classify_with_centroids(const ReferenceIndex& centroids,
                        const EmbeddingSet& queries,
                        std::uint64_t seed) {
    if (centroids.mode() != ReferenceMode::kCentroid) {
        fail(ErrorCode::kInvalidArgument, "centroid classification needs a centroid index");
    }
    const auto truth = true_reference_classes(centroids, queries);
    const Embeddings unit = normalized_queries(queries);

    std::vector<BestSoFar> best(unit.size());
    similarity_sweep(unit.rows(), centroids.entries(),
                     [&](std::size_t q, std::size_t first, std::span<const double> sims) {
                         best[q].offer(first, sims);
                     });

    std::vector<Prediction> predictions(unit.size());
    double sum_sim = 0.0;
    for (std::size_t i = 0; i < unit.size(); ++i) {
        const std::size_t entry = best[i].pick(derive_seed(seed, {i}));
        const std::size_t cls = centroids.entry_class(entry);
        predictions[i] = {i, centroids.classes()[cls].id, best[i].sim, cls == truth[i]};
        sum_sim += best[i].sim;
    }
    return summarize({centroids.set_name(), queries.name(), Method::centroid(), seed}, queries,
                     std::move(predictions), sum_sim / static_cast<double>(unit.size()));
}

ExperimentResult
classify_with_knn(const ReferenceIndex& full,
                  const ReferenceIndex& centroids,
                  const EmbeddingSet& queries,
                  std::size_t k,
                  std::uint64_t seed) {
    if (k < 1) {
        fail(ErrorCode::kInvalidArgument, "k must be >= 1");
    }
    if (k > full.size()) {
        fail(ErrorCode::kKTooLarge, "k = " + std::to_string(k) + " exceeds the " +
                                        std::to_string(full.size()) + " embeddings of reference set '" +
                                        full.set_name() + "'");
    }
    const auto truth = true_reference_classes(full, queries);
    const Embeddings unit = normalized_queries(queries);

    std::vector<TopK> top(unit.size(), TopK(k));
    similarity_sweep(unit.rows(), full.entries(),
                     [&](std::size_t q, std::size_t first, std::span<const double> sims) {
                         top[q].offer(first, sims);
                     });

    std::vector<Prediction> predictions(unit.size());
    for (std::size_t i = 0; i < unit.size(); ++i) {
        const std::uint64_t query_seed = derive_seed(seed, {i});
        std::optional<Rng> rng;
        const auto neighbours = top[i].select(rng, query_seed);

        // class position -> (votes, best member similarity)
        std::map<std::size_t, std::pair<std::size_t, double>> votes;
        for (const auto& n : neighbours) {
            auto [it, inserted] = votes.try_emplace(full.entry_class(n.entry), 0, n.sim);
            it->second.first += 1;
            it->second.second = std::max(it->second.second, n.sim);
        }
        std::size_t max_votes = 0;
        for (const auto& [cls, v] : votes) {
            max_votes = std::max(max_votes, v.first);
        }
        double best_member = -std::numeric_limits<double>::infinity();
        for (const auto& [cls, v] : votes) {
            if (v.first == max_votes) {
                best_member = std::max(best_member, v.second);
            }
        }
        std::vector<std::size_t> winners;
        for (const auto& [cls, v] : votes) {
            if (v.first == max_votes && v.second == best_member) {
                winners.push_back(cls);
            }
        }
        std::size_t cls = winners.front();
        if (winners.size() > 1) {
            if (!rng) {
                rng.emplace(query_seed);
            }
            cls = winners[rng->uniform_index(winners.size())];
        }
        predictions[i] = {i, full.classes()[cls].id, best_member, cls == truth[i]};
    }
    const double avg_cos = avg_cos_similarity(centroids, queries, SimilarityPairing::kNearest);
    return summarize({full.set_name(), queries.name(), Method::knn(k), seed}, queries,
                     std::move(predictions), avg_cos);
}

ExperimentResult
centroid_accuracy(const EmbeddingSet& refs, const EmbeddingSet& queries, std::uint64_t seed) {
    return classify_with_centroids(build_centroid_references(refs), queries, seed);
}

ExperimentResult
knn_classify(const EmbeddingSet& refs,
             const EmbeddingSet& queries,
             std::size_t k,
             std::uint64_t seed) {
    if (k > refs.size()) {
        fail(ErrorCode::kKTooLarge, "k = " + std::to_string(k) + " exceeds the " +
                                        std::to_string(refs.size()) + " embeddings of reference set '" +
                                        refs.name() + "'");
    }
    return classify_with_knn(build_full_references(refs), build_centroid_references(refs), queries,
                             k, seed);
}

bool
SkipRule::matches(const std::string& ref, const std::string& query_name, const Method& m) const {
    auto field = [](const std::string& pattern, const std::string& value) {
        return pattern == "*" || pattern == value;
    };
    if (!field(reference, ref) || !field(query, query_name)) {
        return false;
    }
    if (method == "*") {
        return true;
    }
    if (method == "knn") {
        return m.kind == Method::Kind::kKnn;
    }
    return parse_method(method) == m;
}

SkipRule
parse_skip_rule(std::string_view text) {
    const auto parts = split_on(text, ':');
    SkipRule rule;
    if (parts.size() == 2) {
        rule.query = parts[0];
        rule.method = parts[1];
    } else if (parts.size() == 3) {
        rule.reference = parts[0];
        rule.query = parts[1];
        rule.method = parts[2];
    } else {
        fail(ErrorCode::kInvalidArgument,
             "skip rule '" + std::string(text) + "' must be QUERY:METHOD or REF:QUERY:METHOD");
    }
    for (const auto* p : {&rule.reference, &rule.query, &rule.method}) {
        if (p->empty()) {
            fail(ErrorCode::kInvalidArgument, "skip rule '" + std::string(text) + "' has an empty field");
        }
    }
    if (rule.method != "*" && rule.method != "knn") {
        parse_method(rule.method);
    }
    return rule;
}

std::vector<MatrixCell>
run_experiment_matrix(const std::vector<EmbeddingSet>& sets,
                      const std::vector<Method>& methods,
                      std::uint64_t seed,
                      const std::vector<SkipRule>& skip) {
    std::vector<const EmbeddingSet*> refs;
    std::vector<const EmbeddingSet*> queries;
    for (const auto& s : sets) {
        (s.split() == Split::kTrain ? refs : queries).push_back(&s);
    }
    if (refs.empty() || queries.empty()) {
        fail(ErrorCode::kInvalidArgument,
             "experiment matrix needs at least one train-split and one eval-split set");
    }
    if (methods.empty()) {
        fail(ErrorCode::kInvalidArgument, "experiment matrix needs at least one method");
    }
    const bool any_knn = std::any_of(methods.begin(), methods.end(),
                                     [](const Method& m) { return m.kind == Method::Kind::kKnn; });

    struct Indexes {
        std::optional<ReferenceIndex> centroids;
        std::optional<ReferenceIndex> full;
        std::string error;
    };
    std::vector<Indexes> indexes(refs.size());
    for (std::size_t r = 0; r < refs.size(); ++r) {
        try {
            indexes[r].centroids.emplace(build_centroid_references(*refs[r]));
            if (any_knn) {
                indexes[r].full.emplace(build_full_references(*refs[r]));
            }
        } catch (const Error& e) {
            indexes[r].error = e.what();
        }
    }

    std::vector<MatrixCell> cells;
    std::size_t experiment = 0;
    for (const auto* q : queries) {
        for (std::size_t r = 0; r < refs.size(); ++r) {
            ++experiment;
            for (const auto& m : methods) {
                MatrixCell cell;
                cell.experiment = experiment;
                cell.reference_set = refs[r]->name();
                cell.query_set = q->name();
                cell.method = m;
                const bool skipped = std::any_of(skip.begin(), skip.end(), [&](const SkipRule& rule) {
                    return rule.matches(cell.reference_set, cell.query_set, m);
                });
                if (skipped) {
                    cell.status = MatrixCell::Status::kSkipped;
                } else if (!indexes[r].error.empty()) {
                    cell.status = MatrixCell::Status::kFailed;
                    cell.error = indexes[r].error;
                } else {
                    try {
                        if (m.kind == Method::Kind::kCentroid) {
                            cell.result = classify_with_centroids(*indexes[r].centroids, *q, seed);
                        } else {
                            cell.result = classify_with_knn(*indexes[r].full, *indexes[r].centroids,
                                                            *q, m.k, seed);
                        }
                    } catch (const Error& e) {
                        cell.status = MatrixCell::Status::kFailed;
                        cell.error = e.what();
                    }
                }
                cells.push_back(std::move(cell));
            }
        }
    }
    return cells;
}

std::string_view
to_string(FailureTag tag) {
    switch (tag) {
        case FailureTag::kHealthy:
            return "healthy";
        case FailureTag::kConceptFailure:
            return "concept-failure";
        case FailureTag::kShiftFailure:
            return "shift-failure";
        case FailureTag::kIndeterminate:
            return "indeterminate";
    }
    return "unknown";
}

std::vector<ClassDiagnosis>
diagnose_class_failures(const ExperimentResult& natural,
                        const ExperimentResult& synthetic,
                        double low_threshold,
                        double high_threshold) {
    if (!(low_threshold >= 0.0 && low_threshold <= high_threshold && high_threshold <= 1.0)) {
        fail(ErrorCode::kInvalidArgument, "thresholds must satisfy 0 <= low <= high <= 1");
    }
    if (natural.spec.reference_set != synthetic.spec.reference_set) {
        fail(ErrorCode::kMismatchedResults, "results use different reference sets ('" +
                                                natural.spec.reference_set + "' vs '" +
                                                synthetic.spec.reference_set + "')");
    }
    if (natural.per_class.size() != synthetic.per_class.size() ||
        !std::equal(natural.per_class.begin(), natural.per_class.end(), synthetic.per_class.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
        fail(ErrorCode::kMismatchedResults, "natural and synthetic queries cover different classes");
    }
    std::vector<ClassDiagnosis> out;
    auto syn = synthetic.per_class.begin();
    for (const auto& [id, nat] : natural.per_class) {
        ClassDiagnosis d{id, nat.accuracy(), (syn++)->second.accuracy(), FailureTag::kHealthy};
        if (d.natural_accuracy < low_threshold) {
            if (d.synthetic_accuracy < low_threshold) {
                d.tag = FailureTag::kConceptFailure;
            } else if (d.synthetic_accuracy >= high_threshold) {
                d.tag = FailureTag::kShiftFailure;
            } else {
                d.tag = FailureTag::kIndeterminate;
            }
        }
        out.push_back(d);
    }
    return out;
}

}  // namespace embedlens
