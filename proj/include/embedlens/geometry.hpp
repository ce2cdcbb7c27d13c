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

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace embedlens {

/// Norms at or below this are treated as degenerate.
inline constexpr double kZeroNormTolerance = 1e-12;

/// Allowed deviation of a UnitVector's norm from 1.
inline constexpr double kUnitNormTolerance = 1e-6;

/// Read-only view over a row-major block of equal-length vectors.
class Rows {
public:
    Rows() = default;
    Rows(std::span<const double> values, std::size_t dim);

    std::size_t
    size() const noexcept {
        return dim_ == 0 ? 0 : values_.size() / dim_;
    }

    bool
    empty() const noexcept {
        return size() == 0;
    }

    std::size_t
    dim() const noexcept {
        return dim_;
    }

    std::span<const double>
    operator[](std::size_t i) const {
        return values_.subspan(i * dim_, dim_);
    }

    std::span<const double>
    values() const noexcept {
        return values_;
    }

private:
    std::span<const double> values_;
    std::size_t dim_ = 0;
};

/// Owning row-major matrix of embeddings.
class Embeddings {
public:
    Embeddings() = default;
    explicit Embeddings(std::size_t dim) : dim_(dim) {
    }
    Embeddings(std::size_t dim, std::vector<double> values);
    Embeddings(std::initializer_list<std::initializer_list<double>> rows);

    void
    push_back(std::span<const double> row);

    std::size_t
    size() const noexcept {
        return dim_ == 0 ? 0 : values_.size() / dim_;
    }

    std::size_t
    dim() const noexcept {
        return dim_;
    }

    std::span<const double>
    operator[](std::size_t i) const {
        return rows()[i];
    }

    Rows
    rows() const {
        return Rows(values_, dim_);
    }

    operator Rows() const {
        return rows();
    }

    std::vector<double>&
    values() noexcept {
        return values_;
    }

    const std::vector<double>&
    values() const noexcept {
        return values_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

/// A vector whose Euclidean norm is 1 within kUnitNormTolerance. Only
/// unit_normalize and from_unit produce one.
class UnitVector {
public:
    UnitVector() = default;

    /// Wraps values that are already unit length; throws kZeroVector if the
    /// norm is off by more than kUnitNormTolerance.
    static UnitVector
    from_unit(std::vector<double> values);

    std::span<const double>
    values() const noexcept {
        return values_;
    }

    std::size_t
    size() const noexcept {
        return values_.size();
    }

    double
    operator[](std::size_t i) const {
        return values_[i];
    }

    operator std::span<const double>() const noexcept {
        return values_;
    }

    friend bool
    operator==(const UnitVector&, const UnitVector&) = default;

private:
    explicit UnitVector(std::vector<double> values) : values_(std::move(values)) {
    }

    friend UnitVector
    unit_normalize(std::span<const double> v);

    std::vector<double> values_;
};

double
euclidean_norm(std::span<const double> v);

/// v / |v|. Throws kZeroVector when |v| <= kZeroNormTolerance.
UnitVector
unit_normalize(std::span<const double> v);

/// Dot product of two unit vectors clamped to [-1, 1]; exactly 1 for equal inputs.
/// Throws kDimensionMismatch on unequal lengths.
double
cosine_similarity(std::span<const double> a, std::span<const double> b);

/// 1 - cosine_similarity(a, b), in [0, 2].
double
codiff(std::span<const double> a, std::span<const double> b);

/// Unit-normalized sum of unit-normalized rows. A single row yields
/// unit_normalize(row) itself. Throws kEmptySet on no rows and kZeroVector
/// when the normalized rows cancel.
UnitVector
spherical_centroid(Rows rows);

/// Normalizes every row of `rows` into a new matrix.
Embeddings
normalize_rows(Rows rows);

}  // namespace embedlens
