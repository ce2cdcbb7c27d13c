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

#include "embedlens/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "embedlens/error.hpp"

namespace embedlens {

Rows::Rows(std::span<const double> values, std::size_t dim) : values_(values), dim_(dim) {
    if (dim == 0 ? !values.empty() : values.size() % dim != 0) {
        fail(ErrorCode::kDimensionMismatch,
             "row block of " + std::to_string(values.size()) + " values is not a multiple of " +
                 std::to_string(dim));
    }
}

Embeddings::Embeddings(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
    if (dim == 0 ? !values_.empty() : values_.size() % dim != 0) {
        fail(ErrorCode::kDimensionMismatch,
             "embedding buffer of " + std::to_string(values_.size()) +
                 " values is not a multiple of " + std::to_string(dim));
    }
}

Embeddings::Embeddings(std::initializer_list<std::initializer_list<double>> rows) {
    for (const auto& row : rows) {
        push_back(std::span<const double>(row.begin(), row.size()));
    }
}

void
Embeddings::push_back(std::span<const double> row) {
    if (dim_ == 0 && values_.empty()) {
        dim_ = row.size();
    }
    if (row.size() != dim_) {
        fail(ErrorCode::kDimensionMismatch,
             "row of length " + std::to_string(row.size()) + " pushed into matrix of dimension " +
                 std::to_string(dim_));
    }
    values_.insert(values_.end(), row.begin(), row.end());
}

UnitVector
UnitVector::from_unit(std::vector<double> values) {
    const double norm = euclidean_norm(values);
    if (std::abs(norm - 1.0) > kUnitNormTolerance) {
        fail(ErrorCode::kZeroVector, "vector of norm " + std::to_string(norm) + " is not unit length");
    }
    return UnitVector(std::move(values));
}

double
euclidean_norm(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) {
        sum += x * x;
    }
    return std::sqrt(sum);
}

UnitVector
unit_normalize(std::span<const double> v) {
    const double norm = euclidean_norm(v);
    if (!(norm > kZeroNormTolerance)) {
        fail(ErrorCode::kZeroVector, "cannot normalize a vector of norm " + std::to_string(norm));
    }
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) {
        x /= norm;
    }
    return UnitVector(std::move(out));
}

double
cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        fail(ErrorCode::kDimensionMismatch, "cosine of vectors with lengths " +
                                                std::to_string(a.size()) + " and " +
                                                std::to_string(b.size()));
    }
    if (std::equal(a.begin(), a.end(), b.begin())) {
        return 1.0;
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
    }
    return std::clamp(dot, -1.0, 1.0);
}

double
codiff(std::span<const double> a, std::span<const double> b) {
    return 1.0 - cosine_similarity(a, b);
}

UnitVector
spherical_centroid(Rows rows) {
    if (rows.empty()) {
        fail(ErrorCode::kEmptySet, "centroid of an empty list");
    }
    if (rows.size() == 1) {
        return unit_normalize(rows[0]);
    }
    const std::size_t dim = rows.dim();
    std::vector<long double> sum(dim, 0.0L);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto row = rows[r];
        const long double norm = euclidean_norm(row);
        if (!(norm > kZeroNormTolerance)) {
            fail(ErrorCode::kZeroVector, "row " + std::to_string(r) + " has zero norm");
        }
        for (std::size_t i = 0; i < dim; ++i) {
            sum[i] += static_cast<long double>(row[i]) / norm;
        }
    }
    std::vector<double> narrowed(sum.begin(), sum.end());
    try {
        return unit_normalize(narrowed);
    } catch (const Error&) {
        fail(ErrorCode::kZeroVector, "normalized inputs cancel; centroid direction is undefined");
    }
}

Embeddings
normalize_rows(Rows rows) {
    Embeddings out(rows.dim());
    out.values().reserve(rows.values().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto u = unit_normalize(rows[r]);
        out.values().insert(out.values().end(), u.values().begin(), u.values().end());
    }
    return out;
}

}  // namespace embedlens
