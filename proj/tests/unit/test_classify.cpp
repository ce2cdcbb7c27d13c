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


#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "embedlens/classify.hpp"
#include "embedlens/error.hpp"
#include "embedlens/reference_index.hpp"
#include "embedlens/simulator.hpp"
#include "oracle/brute_force.hpp"
#include "support/test_support.hpp"

using namespace embedlens;
using namespace embedlens::testing;

namespace {

std::vector<double>
at_degrees(double deg) {
    const double r = deg * std::numbers::pi / 180.0;
    return {std::cos(r), std::sin(r)};
}

template <typename Fn>
ErrorCode
code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an embedlens::Error");
    return ErrorCode::kInvalidArgument;
}

ExperimentResult
fake_result(const std::string& refs, std::map<std::int64_t, std::pair<std::size_t, std::size_t>> cells) {
    ExperimentResult r;
    r.spec.reference_set = refs;
    for (const auto& [id, ct] : cells) {
        r.per_class[ClassId{id}] = ClassAccuracy{ct.first, ct.second};
    }
    return r;
}

struct RandomInstance {
    std::vector<oracle::Mat> ref_classes;
    oracle::Mat queries;
    std::vector<std::size_t> truth;
    EmbeddingSet refs;
    EmbeddingSet query_set;
};

RandomInstance
random_instance(std::mt19937_64& gen, std::size_t classes, std::size_t max_per_class, std::size_t dim) {
    std::uniform_int_distribution<std::size_t> count(1, max_per_class);
    std::vector<std::pair<std::int64_t, Matrix>> r;
    std::vector<std::pair<std::int64_t, Matrix>> q;
    RandomInstance inst{{}, {}, {}, make_set("r", Split::kTrain, {{0, {std::vector<double>(dim, 1.0)}}}),
                        make_set("q", Split::kEval, {{0, {std::vector<double>(dim, 1.0)}}})};
    for (std::size_t c = 0; c < classes; ++c) {
        const auto rows = gaussian_rows(gen, count(gen), dim);
        const auto qs = gaussian_rows(gen, count(gen), dim);
        r.emplace_back(static_cast<std::int64_t>(c), rows);
        q.emplace_back(static_cast<std::int64_t>(c), qs);
        inst.ref_classes.push_back(rows);
        for (const auto& x : qs) {
            inst.queries.push_back(x);
            inst.truth.push_back(c);
        }
    }
    inst.refs = make_set("r", Split::kTrain, r);
    inst.query_set = make_set("q", Split::kEval, q);
    return inst;
}

}  // namespace

TEST_CASE("build_centroid_references") {
    const auto refs = make_set("r", Split::kTrain, {{3, {{2, 0}}}, {8, {{1, 0}, {0, 1}}}});
    const auto index = build_centroid_references(refs);
    CHECK(index.mode() == ReferenceMode::kCentroid);
    REQUIRE(index.size() == 2);
    CHECK(index.entries()[0][0] == 1.0);
    CHECK(index.entries()[1][0] == doctest::Approx(std::sqrt(0.5)));
    CHECK(index.entries()[1][1] == doctest::Approx(std::sqrt(0.5)));
    CHECK(index.find_class(ClassId{8}) == 1u);

    const auto opposed = make_set("bad", Split::kTrain, {{1, {{1, 0}}}, {42, {{1, 0}, {-1, 0}}}});
    try {
        build_centroid_references(opposed);
        FAIL("expected ZeroVector");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kZeroVector);
        CHECK(std::string(e.what()).find("42") != std::string::npos);
    }
    const auto eval = make_set("e", Split::kEval, {{1, {{1, 0}}}});
    CHECK(code_of([&] { build_centroid_references(eval); }) == ErrorCode::kSplitMismatch);

    const auto full = build_full_references(refs);
    CHECK(full.mode() == ReferenceMode::kFull);
    CHECK(full.size() == 3);
    CHECK(full.entry_class(2) == 1);
}

TEST_CASE("nearest_reference examples") {
    const auto refs = make_set("r", Split::kTrain, {{0, {{1, 0}}}, {1, {{0, 1}}}});
    const auto index = build_centroid_references(refs);

    const auto p = nearest_reference(unit_normalize(std::vector<double>{0.9, 0.436}), index, 0);
    CHECK(p.predicted == ClassId{0});

    const auto exact = nearest_reference(unit_normalize(std::vector<double>{0, 1}), index, 0);
    CHECK(exact.predicted == ClassId{1});
    CHECK(exact.similarity == 1.0);

    const auto tie = unit_normalize(std::vector<double>{1, 1});
    std::set<std::int64_t> seen;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        const auto a = nearest_reference(tie, index, seed);
        CHECK(a.predicted == nearest_reference(tie, index, seed).predicted);
        seen.insert(a.predicted.value);
    }
    CHECK(seen == std::set<std::int64_t>{0, 1});

    CHECK(code_of([&] { nearest_reference(unit_normalize(std::vector<double>{1, 0, 0}), index, 0); }) ==
          ErrorCode::kDimensionMismatch);
}

TEST_CASE("centroid_accuracy on exact centroids and separated clusters") {
    std::mt19937_64 gen(6);
    const auto refs = make_set("r", Split::kTrain,
                               {{0, gaussian_rows(gen, 5, 8)}, {1, gaussian_rows(gen, 5, 8)},
                                {2, gaussian_rows(gen, 5, 8)}});
    const auto index = build_centroid_references(refs);
    std::vector<std::pair<std::int64_t, Matrix>> q;
    for (std::size_t c = 0; c < index.size(); ++c) {
        const auto row = index.entries()[c];
        q.emplace_back(index.classes()[c].id.value, Matrix{{row.begin(), row.end()}});
    }
    const auto r = centroid_accuracy(refs, make_set("q", Split::kEval, q), 1);
    CHECK(r.accuracy == 1.0);
    CHECK(r.avg_cos_similarity == doctest::Approx(1.0).epsilon(1e-12));

    ClusterSpec spec;
    spec.classes = 2;
    spec.spread = 0.01;
    spec.seed = 5;
    const auto [sr, sq] = simulate_experiment(spec);
    CHECK(centroid_accuracy(sr, sq, 0).accuracy == 1.0);
}

TEST_CASE("classifiers agree with the brute-force oracle") {
    std::mt19937_64 gen(1001);
    for (std::size_t dim : {2u, 8u, 16u}) {
        for (int t = 0; t < 8; ++t) {
            auto inst = random_instance(gen, 2 + t, 12, dim);
            const auto ca = centroid_accuracy(inst.refs, inst.query_set, 9);
            const auto ref_ca = oracle::centroid_classify(inst.ref_classes, inst.queries);
            for (std::size_t i = 0; i < ref_ca.size(); ++i) {
                CHECK(ca.predictions[i].predicted.value == static_cast<std::int64_t>(ref_ca[i]));
            }
            for (std::size_t k : {1u, 3u, 5u}) {
                if (k > inst.refs.size()) {
                    continue;
                }
                const auto kn = knn_classify(inst.refs, inst.query_set, k, 9);
                const auto ref_kn = oracle::knn_classify(inst.ref_classes, inst.queries, k);
                for (std::size_t i = 0; i < ref_kn.size(); ++i) {
                    CHECK(kn.predictions[i].predicted.value == static_cast<std::int64_t>(ref_kn[i]));
                }
            }
        }
    }
}

TEST_CASE("accuracy bookkeeping") {
    std::mt19937_64 gen(3);
    auto inst = random_instance(gen, 6, 20, 8);
    const auto r = centroid_accuracy(inst.refs, inst.query_set, 2);
    double weighted = 0.0;
    std::size_t total = 0;
    for (const auto& [id, acc] : r.per_class) {
        weighted += static_cast<double>(acc.correct);
        total += acc.total;
    }
    CHECK(total == inst.queries.size());
    CHECK(std::abs(r.accuracy - weighted / static_cast<double>(total)) <= 1e-12);
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    for (const auto& p : r.predictions) {
        CHECK(p.similarity >= -1.0);
        CHECK(p.similarity <= 1.0);
        CHECK(p.correct == (p.predicted.value == static_cast<std::int64_t>(inst.truth[p.query_index])));
    }
}

TEST_CASE("k-NN vote on a hand-built instance") {
    // A at 5 and 40 degrees, B at 10, 15, 20; query at 0.
    // cos: A 0.9962, 0.7660; B 0.9848, 0.9659, 0.9397 -> B wins 3 votes to 2.
    const auto refs = make_set("r", Split::kTrain,
                               {{0, {at_degrees(5), at_degrees(40)}},
                                {1, {at_degrees(10), at_degrees(15), at_degrees(20)}}});
    const auto q = make_set("q", Split::kEval, {{0, {at_degrees(0)}}});
    CHECK(knn_classify(refs, q, 5, 0).predictions[0].predicted == ClassId{1});
    CHECK(knn_classify(refs, q, 1, 0).predictions[0].predicted == ClassId{0});

    // 2-2 vote: the class holding the single nearest member (A at 5) wins
    const auto tied = make_set("r2", Split::kTrain,
                               {{0, {at_degrees(5), at_degrees(40)}}, {1, {at_degrees(10), at_degrees(15)}}});
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CHECK(knn_classify(tied, q, 4, seed).predictions[0].predicted == ClassId{0});
    }

    // mirror-image members tie on votes and nearest member: seeded coin
    const auto mirror = make_set("r3", Split::kTrain, {{0, {at_degrees(10)}}, {1, {at_degrees(-10)}}});
    std::set<std::int64_t> seen;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        const auto a = knn_classify(mirror, q, 2, seed).predictions[0].predicted;
        CHECK(a == knn_classify(mirror, q, 2, seed).predictions[0].predicted);
        seen.insert(a.value);
    }
    CHECK(seen == std::set<std::int64_t>{0, 1});

    CHECK(code_of([&] { knn_classify(refs, q, 6, 0); }) == ErrorCode::kKTooLarge);
    CHECK(code_of([&] { knn_classify(refs, q, 0, 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("k-NN boundary ties draw fairly from the tied group") {
    // four identical members per class, k = 1: every member ties
    const auto refs = make_set("r", Split::kTrain,
                               {{0, {at_degrees(30), at_degrees(30)}}, {1, {at_degrees(-30), at_degrees(-30)}}});
    const auto q = make_set("q", Split::kEval, {{0, {at_degrees(0)}}});
    std::map<std::int64_t, int> hist;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        hist[knn_classify(refs, q, 1, seed).predictions[0].predicted.value] += 1;
    }
    CHECK(hist[0] > 150);
    CHECK(hist[1] > 150);
}

TEST_CASE("singleton references: k=1 equals centroid classification") {
    std::mt19937_64 gen(44);
    for (int t = 0; t < 20; ++t) {
        std::vector<std::pair<std::int64_t, Matrix>> r;
        std::vector<std::pair<std::int64_t, Matrix>> q;
        for (std::int64_t c = 0; c < 6; ++c) {
            r.emplace_back(c, gaussian_rows(gen, 1, 4));
            q.emplace_back(c, gaussian_rows(gen, 5, 4));
        }
        // an exact tie: a query equidistant from two singleton references
        if (t % 2 == 0) {
            auto mid = r[0].second[0];
            const auto a = oracle::normalize(r[0].second[0]);
            const auto b = oracle::normalize(r[1].second[0]);
            for (std::size_t i = 0; i < mid.size(); ++i) {
                mid[i] = a[i] + b[i];
            }
            q[0].second.push_back(mid);
        }
        const auto refs = make_set("r", Split::kTrain, r);
        const auto queries = make_set("q", Split::kEval, q);
        for (std::uint64_t seed : {0u, 1u, 77u}) {
            const auto ca = centroid_accuracy(refs, queries, seed);
            const auto kn = knn_classify(refs, queries, 1, seed);
            REQUIRE(ca.predictions.size() == kn.predictions.size());
            for (std::size_t i = 0; i < ca.predictions.size(); ++i) {
                CHECK(ca.predictions[i].predicted == kn.predictions[i].predicted);
                CHECK(ca.predictions[i].similarity == kn.predictions[i].similarity);
            }
            CHECK(ca.accuracy == kn.accuracy);
        }
    }
}

TEST_CASE("predictions are scale free and deterministic") {
    std::mt19937_64 gen(8);
    auto inst = random_instance(gen, 5, 15, 8);
    std::vector<std::pair<std::int64_t, Matrix>> scaled;
    for (std::size_t c = 0; c < inst.query_set.num_classes(); ++c) {
        Matrix rows;
        const auto cr = inst.query_set.class_rows(c);
        for (std::size_t i = 0; i < cr.size(); ++i) {
            std::vector<double> v(cr[i].begin(), cr[i].end());
            for (auto& x : v) {
                x *= 37.5;
            }
            rows.push_back(v);
        }
        scaled.emplace_back(inst.query_set.entry(c).label.id.value, rows);
    }
    const auto big = make_set("q", Split::kEval, scaled);
    const auto a = knn_classify(inst.refs, inst.query_set, 5, 3);
    const auto b = knn_classify(inst.refs, big, 5, 3);
    const auto c = knn_classify(inst.refs, inst.query_set, 5, 3);
    for (std::size_t i = 0; i < a.predictions.size(); ++i) {
        CHECK(a.predictions[i].predicted == b.predictions[i].predicted);
        CHECK(a.predictions[i].similarity == c.predictions[i].similarity);
    }
    CHECK(a.avg_cos_similarity == c.avg_cos_similarity);
}

TEST_CASE("class universe and split checks") {
    const auto refs = make_set("r", Split::kTrain, {{0, {{1, 0}}}, {1, {{0, 1}}}});
    const auto subset = make_set("q", Split::kEval, {{1, {{0.1, 1}}}});
    CHECK(centroid_accuracy(refs, subset, 0).accuracy == 1.0);
    const auto stranger = make_set("q", Split::kEval, {{7, {{0.1, 1}}}});
    CHECK(code_of([&] { centroid_accuracy(refs, stranger, 0); }) == ErrorCode::kClassUniverseMismatch);
    const auto train_queries = make_set("q", Split::kTrain, {{1, {{0.1, 1}}}});
    CHECK(code_of([&] { centroid_accuracy(refs, train_queries, 0); }) == ErrorCode::kSplitMismatch);
}

TEST_CASE("method and skip-rule parsing") {
    CHECK(parse_method("centroid") == Method::centroid());
    CHECK(parse_method("knn5") == Method::knn(5));
    CHECK(parse_method("knn:3") == Method::knn(3));
    CHECK(parse_method("knn(7)") == Method::knn(7));
    CHECK(to_string(Method::knn(5)) == "knn5");
    CHECK(code_of([] { parse_method("knn0"); }) == ErrorCode::kInvalidArgument);
    CHECK(code_of([] { parse_method("svm"); }) == ErrorCode::kInvalidArgument);

    const auto rule = parse_skip_rule("small:knn");
    CHECK(rule.matches("any", "small", Method::knn(5)));
    CHECK_FALSE(rule.matches("any", "small", Method::centroid()));
    CHECK_FALSE(rule.matches("any", "big", Method::knn(1)));
    const auto exact = parse_skip_rule("a:b:knn1");
    CHECK(exact.matches("a", "b", Method::knn(1)));
    CHECK_FALSE(exact.matches("a", "b", Method::knn(5)));
    CHECK(parse_skip_rule("*:*:*").matches("x", "y", Method::centroid()));
}

TEST_CASE("experiment matrix over six sets") {
    std::vector<EmbeddingSet> sets;
    for (std::uint64_t s = 0; s < 3; ++s) {
        ClusterSpec spec;
        spec.name = "sim" + std::to_string(s);
        spec.classes = 4;
        spec.per_class = 12;
        spec.seed = s;
        spec.shift_degrees = 20.0 * static_cast<double>(s);
        auto [r, q] = simulate_experiment(spec);
        sets.push_back(std::move(r));
        sets.push_back(std::move(q));
    }
    const std::vector<Method> methods{Method::centroid(), Method::knn(1), Method::knn(5)};
    const auto cells = run_experiment_matrix(sets, methods, 11);
    CHECK(cells.size() == 3 * 3 * 3);

    // each cell equals a direct recomputation
    for (const auto& cell : cells) {
        REQUIRE(cell.status == MatrixCell::Status::kOk);
        const EmbeddingSet* ref = nullptr;
        const EmbeddingSet* qry = nullptr;
        for (const auto& s : sets) {
            if (s.name() == cell.reference_set && s.split() == Split::kTrain) {
                ref = &s;
            }
            if (s.name() == cell.query_set && s.split() == Split::kEval) {
                qry = &s;
            }
        }
        REQUIRE(ref);
        REQUIRE(qry);
        const auto direct = cell.method.kind == Method::Kind::kCentroid
                                ? centroid_accuracy(*ref, *qry, 11)
                                : knn_classify(*ref, *qry, cell.method.k, 11);
        CHECK(direct.accuracy == cell.result->accuracy);
        CHECK(direct.avg_cos_similarity == cell.result->avg_cos_similarity);
    }

    // experiment numbers are shared across the methods of one pair
    CHECK(cells[0].experiment == 1);
    CHECK(cells[1].experiment == 1);
    CHECK(cells[3].experiment == 2);

    const auto skipped = run_experiment_matrix(sets, methods, 11, {parse_skip_rule("sim2:knn")});
    std::size_t n_skipped = 0;
    for (const auto& c : skipped) {
        if (c.status == MatrixCell::Status::kSkipped) {
            ++n_skipped;
            CHECK(c.query_set == "sim2");
            CHECK_FALSE(c.result.has_value());
        }
    }
    CHECK(n_skipped == 3 * 2);
}

TEST_CASE("matrix keeps going past a failed cell") {
    const auto big = make_set("big", Split::kTrain, {{0, {{1, 0}, {1, 0.1}, {1, 0.2}}}, {1, {{0, 1}, {0.1, 1}, {0.2, 1}}}});
    const auto small = make_set("small", Split::kTrain, {{0, {{1, 0}}}, {1, {{0, 1}}}});
    const auto q = make_set("q", Split::kEval, {{0, {{1, 0.05}}}, {1, {{0.05, 1}}}});
    const auto cells = run_experiment_matrix({big, small, q}, {Method::centroid(), Method::knn(5)}, 0);
    REQUIRE(cells.size() == 4);
    std::size_t failed = 0;
    for (const auto& c : cells) {
        if (c.status == MatrixCell::Status::kFailed) {
            ++failed;
            CHECK(c.reference_set == "small");
            CHECK(c.error.find("exceeds") != std::string::npos);
        }
    }
    CHECK(failed == 1);
}

TEST_CASE("single set in both roles gives the diagonal") {
    ClusterSpec spec;
    spec.classes = 3;
    spec.per_class = 10;
    const auto [r, q] = simulate_experiment(spec);
    const auto cells = run_experiment_matrix({r, q}, {Method::centroid()}, 0);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].reference_set == cells[0].query_set);
}

TEST_CASE("diagnose_class_failures tags the table patterns") {
    // hammer 14/16, nail 58/84, a healthy class 95/95
    const auto natural = fake_result("r", {{1, {7, 50}}, {2, {29, 50}}, {3, {19, 20}}});
    const auto synthetic = fake_result("r", {{1, {8, 50}}, {2, {42, 50}}, {3, {19, 20}}});
    const auto d = diagnose_class_failures(natural, synthetic, 0.6, 0.8);
    REQUIRE(d.size() == 3);
    CHECK(d[0].tag == FailureTag::kConceptFailure);
    CHECK(d[0].natural_accuracy == doctest::Approx(0.14));
    CHECK(d[0].synthetic_accuracy == doctest::Approx(0.16));
    CHECK(d[1].tag == FailureTag::kShiftFailure);
    CHECK(d[2].tag == FailureTag::kHealthy);
    CHECK(to_string(FailureTag::kConceptFailure) == "concept-failure");

    // low natural, middling synthetic
    const auto mid = diagnose_class_failures(fake_result("r", {{1, {5, 10}}}), fake_result("r", {{1, {7, 10}}}), 0.6, 0.8);
    CHECK(mid[0].tag == FailureTag::kIndeterminate);

    CHECK(code_of([&] { diagnose_class_failures(natural, fake_result("other", {{1, {1, 1}}, {2, {1, 1}}, {3, {1, 1}}}), 0.6, 0.8); }) ==
          ErrorCode::kMismatchedResults);
    CHECK(code_of([&] { diagnose_class_failures(natural, fake_result("r", {{1, {1, 1}}}), 0.6, 0.8); }) ==
          ErrorCode::kMismatchedResults);
    CHECK(code_of([&] { diagnose_class_failures(natural, synthetic, 0.9, 0.5); }) == ErrorCode::kInvalidArgument);
}
