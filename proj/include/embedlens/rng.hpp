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
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace embedlens {

std::uint64_t
splitmix64(std::uint64_t x);

/// Folds a root seed and a path of integers (class id, row index, attempt...)
/// into an independent stream seed. Order of the path matters.
std::uint64_t
derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Seeded generator with portable draws. The standard distributions are
/// implementation-defined, so bounded integers, uniforms and normals are
/// derived here from the raw mt19937_64 stream, which is fully specified.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {
    }

    std::uint64_t
    next() {
        return engine_();
    }

    /// Uniform in [0, n). n must be > 0.
    std::size_t
    uniform_index(std::size_t n);

    /// Uniform in [0, 1).
    double
    uniform01();

    /// Standard normal (Box-Muller, one value per call).
    double
    normal();

    template <typename T>
    void
    shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace embedlens
