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

#include "embedlens/simulator.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "embedlens/error.hpp"
#include "embedlens/parallel.hpp"
#include "embedlens/rng.hpp"

namespace embedlens {

namespace {

std::vector<double>
gaussian_vector(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    for (double& x : v) {
        x = rng.normal();
    }
    return v;
}

/// Seeded unit vector orthogonal to `mean`.
UnitVector
orthogonal_direction(const UnitVector& mean, Rng& rng) {
    for (;;) {
        auto v = gaussian_vector(rng, mean.size());
        double proj = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            proj += v[i] * mean[i];
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] -= proj * mean[i];
        }
        if (euclidean_norm(v) > 1e-6) {
            return unit_normalize(v);
        }
    }
}

}  // namespace

UnitVector
random_direction(std::size_t dimension, std::uint64_t seed) {
    if (dimension < 1) {
        fail(ErrorCode::kInvalidArgument, "direction needs dimension >= 1");
    }
    Rng rng(seed);
    for (;;) {
        auto v = gaussian_vector(rng, dimension);
        if (euclidean_norm(v) > 1e-6) {
            return unit_normalize(v);
        }
    }
}

Embeddings
sample_class_cluster(const UnitVector& mean, double spread, std::size_t n, std::uint64_t seed) {
    if (!(spread >= 0.0) || !std::isfinite(spread)) {
        fail(ErrorCode::kInvalidArgument, "spread must be finite and >= 0");
    }
    if (n < 1) {
        fail(ErrorCode::kInvalidArgument, "cluster needs at least one sample");
    }
    Embeddings out(mean.size());
    out.values().reserve(n * mean.size());
    if (spread == 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(mean.values());
        }
        return out;
    }
    Rng rng(seed);
    std::vector<double> v(mean.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (;;) {
            for (std::size_t d = 0; d < v.size(); ++d) {
                v[d] = mean[d] + spread * rng.normal();
            }
            if (euclidean_norm(v) > kZeroNormTolerance) {
                break;
            }
        }
        out.push_back(unit_normalize(v).values());
    }
    return out;
}

std::pair<EmbeddingSet, EmbeddingSet>
simulate_experiment(const ClusterSpec& spec) {
    if (spec.dimension < 2) {
        fail(ErrorCode::kDegenerateRotation, "shift rotation needs dimension >= 2, got " +
                                                 std::to_string(spec.dimension));
    }
    if (spec.classes < 2) {
        fail(ErrorCode::kInvalidArgument, "simulation needs at least 2 classes");
    }
    if (spec.per_class < 1) {
        fail(ErrorCode::kInvalidArgument, "simulation needs at least 1 sample per class");
    }
    if (!(spec.shift_degrees >= 0.0 && spec.shift_degrees <= 180.0)) {
        fail(ErrorCode::kInvalidArgument, "shift must lie in [0, 180] degrees");
    }
    if (!(spec.outlier_fraction >= 0.0 && spec.outlier_fraction < 1.0)) {
        fail(ErrorCode::kInvalidArgument, "outlier fraction must lie in [0, 1)");
    }
    if (!(spec.spread >= 0.0) || !std::isfinite(spec.spread)) {
        fail(ErrorCode::kInvalidArgument, "spread must be finite and >= 0");
    }

    const std::size_t C = spec.classes;
    const double theta = spec.shift_degrees * std::numbers::pi / 180.0;
    const double c_theta = std::cos(theta);
    const double s_theta = std::sin(theta);

    std::vector<UnitVector> means(C);
    std::vector<UnitVector> query_means(C);
    for (std::size_t c = 0; c < C; ++c) {
        Rng rng(derive_seed(spec.seed, {c, 0}));
        means[c] = random_direction(spec.dimension, rng.next());
        const UnitVector u = orthogonal_direction(means[c], rng);
        std::vector<double> q(spec.dimension);
        for (std::size_t d = 0; d < q.size(); ++d) {
            q[d] = c_theta * means[c][d] + s_theta * u[d];
        }
        query_means[c] = unit_normalize(q);
    }

    const auto n_outliers = static_cast<std::size_t>(
        std::llround(spec.outlier_fraction * static_cast<double>(spec.per_class)));

    std::vector<ClassData> refs(C);
    std::vector<ClassData> queries(C);
    parallel_for(C, [&](std::size_t c) {
        const ClassLabel label{ClassId{static_cast<std::int64_t>(c)}, "class-" + std::to_string(c)};
        Embeddings ref = sample_class_cluster(means[c], spec.spread, spec.per_class,
                                              derive_seed(spec.seed, {c, 1}));
        if (n_outliers > 0) {
            Rng rng(derive_seed(spec.seed, {c, 3}));
            const std::size_t first = spec.per_class - n_outliers;
            for (std::size_t i = first; i < spec.per_class; ++i) {
                const std::size_t other = (c + 1 + rng.uniform_index(C - 1)) % C;
                const Embeddings stray =
                    sample_class_cluster(means[other], spec.spread, 1, rng.next());
                std::copy(stray.values().begin(), stray.values().end(),
                          ref.values().begin() + static_cast<std::ptrdiff_t>(i * spec.dimension));
            }
        }
        refs[c] = {label, std::move(ref)};
        queries[c] = {label, sample_class_cluster(query_means[c], spec.spread, spec.per_class,
                                                  derive_seed(spec.seed, {c, 2}))};
    });
    return {EmbeddingSet(spec.name, Modality::kImage, Split::kTrain, spec.dimension, std::move(refs)),
            EmbeddingSet(spec.name, Modality::kImage, Split::kEval, spec.dimension,
                         std::move(queries))};
}

EmbeddingSet
apply_modality_gap(const EmbeddingSet& set,
                   double offset,
                   const UnitVector& direction,
                   std::string name) {
    if (direction.size() != set.dimension()) {
        fail(ErrorCode::kDimensionMismatch, "gap direction does not match set dimension");
    }
    auto data = set.to_class_data();
    for (auto& c : data) {
        auto& values = c.rows.values();
        const std::size_t dim = set.dimension();
        for (std::size_t r = 0; r < c.rows.size(); ++r) {
            std::span<double> row(values.data() + r * dim, dim);
            std::vector<double> moved(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                moved[d] = row[d] + offset * direction[d];
            }
            const auto unit = unit_normalize(moved);
            std::copy(unit.values().begin(), unit.values().end(), row.begin());
        }
    }
    return EmbeddingSet(std::move(name), Modality::kPrompt, set.split(), set.dimension(),
                        std::move(data));
}

}  // namespace embedlens
