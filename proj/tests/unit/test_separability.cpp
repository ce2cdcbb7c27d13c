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
#include <random>

#include "embedlens/error.hpp"
#include "embedlens/separability.hpp"
#include "embedlens/simulator.hpp"
#include "support/test_support.hpp"

using namespace embedlens;
using namespace embedlens::testing;

namespace {

Embeddings
axis_band(std::mt19937_64& gen, std::size_t n, std::size_t dim, double sign) {
    std::uniform_real_distribution<double> first(0.9, 1.0);
    std::uniform_real_distribution<double> rest(-0.3, 0.3);
    Embeddings e(dim);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(dim);
        v[0] = sign * first(gen);
        for (std::size_t d = 1; d < dim; ++d) {
            v[d] = rest(gen);
        }
        e.push_back(v);
    }
    return e;
}

void
check_all_signs(const ProbeResult& p, Rows a, Rows b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(probe_score(p, a[i]) > 0.0);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(probe_score(p, b[i]) < 0.0);
    }
}

}  // namespace

TEST_CASE("axis-aligned gap is separable") {
    std::mt19937_64 gen(1);
    const auto a = axis_band(gen, 40, 5, +1.0);
    const auto b = axis_band(gen, 40, 5, -1.0);
    const auto p = train_linear_probe(a, b, kDefaultProbeEpochs, 0);
    CHECK(p.separable);
    CHECK(p.training_accuracy == 1.0);
    CHECK(p.margin > 0.0);
    CHECK(p.epochs <= kDefaultProbeEpochs);
    CHECK(p.weights.size() == 5);
    check_all_signs(p, a, b);
}

TEST_CASE("identical sides are not separable") {
    std::mt19937_64 gen(2);
    const auto a = to_embeddings(gaussian_rows(gen, 20, 4));
    const auto p = train_linear_probe(a, a, 50, 3);
    CHECK_FALSE(p.separable);
    CHECK(p.training_accuracy <= 0.5);
    CHECK(p.margin == 0.0);
}

TEST_CASE("overlapping clouds report pocket accuracy without certifying") {
    std::mt19937_64 gen(3);
    const auto a = to_embeddings(gaussian_rows(gen, 60, 3));
    auto shifted = gaussian_rows(gen, 60, 3);
    for (auto& r : shifted) {
        r[0] += 1.0;
    }
    const auto b = to_embeddings(shifted);
    const auto p = train_linear_probe(a, b, 200, 0);
    CHECK_FALSE(p.separable);
    CHECK(p.epochs == 200);
    CHECK(p.training_accuracy > 0.5);
    CHECK(p.training_accuracy < 1.0);
}

TEST_CASE("probe determinism and label symmetry") {
    std::mt19937_64 gen(4);
    const auto a = axis_band(gen, 30, 6, +1.0);
    const auto b = axis_band(gen, 25, 6, -1.0);
    for (std::uint64_t seed : {0u, 5u, 123u}) {
        const auto p = train_linear_probe(a, b, 500, seed);
        const auto again = train_linear_probe(a, b, 500, seed);
        CHECK(p.weights == again.weights);
        CHECK(p.bias == again.bias);
        CHECK(p.epochs == again.epochs);

        const auto swapped = train_linear_probe(b, a, 500, seed);
        CHECK(swapped.separable == p.separable);
        CHECK(swapped.bias == -p.bias);
        REQUIRE(swapped.weights.size() == p.weights.size());
        for (std::size_t d = 0; d < p.weights.size(); ++d) {
            CHECK(swapped.weights[d] == -p.weights[d]);
        }
    }
    // symmetry also holds when the budget runs out
    const auto x = to_embeddings(gaussian_rows(gen, 30, 3));
    const auto y = to_embeddings(gaussian_rows(gen, 30, 3));
    const auto p = train_linear_probe(x, y, 20, 9);
    const auto q = train_linear_probe(y, x, 20, 9);
    CHECK(p.separable == q.separable);
    CHECK(p.training_accuracy == q.training_accuracy);
    CHECK(q.bias == -p.bias);
}

TEST_CASE("probe input errors") {
    CHECK_THROWS_AS(train_linear_probe(Embeddings{{1, 0}}, Embeddings{{1, 0, 0}}, 10, 0), Error);
    try {
        train_linear_probe(Embeddings{{1, 0}}, Embeddings{{1, 0, 0}}, 10, 0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kDimensionMismatch);
    }
    CHECK_THROWS_AS(train_linear_probe(Embeddings(2), Embeddings{{1, 0}}, 10, 0), Error);
}

TEST_CASE("simulated modality gap is separable") {
    ClusterSpec spec;
    spec.seed = 21;
    spec.per_class = 50;
    spec.spread = 0.05;
    const auto [refs, queries] = simulate_experiment(spec);
    const auto dir = random_direction(spec.dimension, 99);
    const auto prompts = apply_modality_gap(refs, 2.0, dir, "prmt");
    const auto p = train_linear_probe(refs.rows(), prompts.rows(), kDefaultProbeEpochs, 0);
    CHECK(p.separable);
    check_all_signs(p, refs.rows(), prompts.rows());
}

TEST_CASE("modality similarity summary blocks") {
    ClusterSpec spec;
    spec.seed = 8;
    spec.per_class = 40;
    const auto [im_r, im_q] = simulate_experiment(spec);
    const auto dir = random_direction(spec.dimension, 5);
    const auto pr_r = apply_modality_gap(im_r, 2.0, dir, "prmt");
    const auto pr_q = apply_modality_gap(im_q, 2.0, dir, "prmt");
    const auto s = modality_similarity_summary({im_r, im_q, pr_r, pr_q});
    CHECK(s.rows.size() == 4);
    CHECK(s.cross_modality < s.within_image);
    CHECK(s.cross_modality < s.within_prompt);
    for (const auto& row : s.rows) {
        const bool cross = (row.reference_set == "prmt") != (row.query_set == "prmt");
        CHECK((row.block == ModalityBlock::kCrossModality) == cross);
    }
    CHECK(to_string(ModalityBlock::kWithinPrompt) == "within-prompt");

    const auto only_images = modality_similarity_summary({im_r, im_q});
    CHECK(std::isnan(only_images.within_prompt));
    CHECK(std::isnan(only_images.cross_modality));
    CHECK(only_images.within_image > 0.9);
    CHECK_THROWS_AS(modality_similarity_summary({im_r}), Error);
}
