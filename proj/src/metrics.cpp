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

#include "embedlens/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "embedlens/error.hpp"
#include "embedlens/parallel.hpp"

namespace embedlens {

namespace {

using Matrix = Eigen::MatrixXd;
using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kNegativeEigenTolerance = 1e-8;

Eigen::Map<const RowMajor>
as_matrix(Rows rows) {
    return {rows.values().data(), static_cast<Eigen::Index>(rows.size()),
            static_cast<Eigen::Index>(rows.dim())};
}

/// Eigenvalues of a symmetric matrix, with tiny negatives clamped to zero.
Eigen::SelfAdjointEigenSolver<Matrix>
checked_eigen(const Matrix& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) {
        fail(ErrorCode::kNumericalFailure, std::string("eigendecomposition of ") + what + " did not converge");
    }
    const auto& ev = solver.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < -kNegativeEigenTolerance * scale) {
        fail(ErrorCode::kNumericalFailure, std::string(what) + " has eigenvalue " +
                                               std::to_string(ev.minCoeff()) +
                                               "; expected a positive semidefinite matrix");
    }
    return solver;
}

Matrix
covariance(Rows rows, const Eigen::VectorXd& mean) {
    Matrix centered = as_matrix(rows).rowwise() - mean.transpose();
    return (centered.transpose() * centered) / static_cast<double>(rows.size() - 1);
}

}  // namespace

double
class_centroid_distance(Rows embeddings) {
    const UnitVector centroid = spherical_centroid(embeddings);
    long double sum = 0.0L;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const double d = codiff(unit_normalize(embeddings[i]), centroid);
        sum += static_cast<long double>(d) * d;
    }
    return static_cast<double>(sum / static_cast<long double>(embeddings.size()));
}

SetMetrics
set_centroid_distance(const EmbeddingSet& set) {
    SetMetrics out;
    out.classes.resize(set.num_classes());
    parallel_for(set.num_classes(), [&](std::size_t c) {
        const auto rows = set.class_rows(c);
        auto& m = out.classes[c];
        m.id = set.entry(c).label.id;
        m.n = rows.size();
        try {
            m.centroid = spherical_centroid(rows);
            m.centroid_distance = class_centroid_distance(rows);
        } catch (const Error& e) {
            fail(e.code(), "set '" + set.name() + "' class " + std::to_string(m.id.value) + ": " +
                               e.what());
        }
    });
    double sum = 0.0;
    for (const auto& m : out.classes) {
        sum += m.centroid_distance;
    }
    out.set_centroid_distance = sum / static_cast<double>(out.classes.size());
    return out;
}

double
centroid_shift(Rows a, Rows b) {
    if (a.dim() != b.dim()) {
        fail(ErrorCode::kDimensionMismatch, "centroid shift between dimensions " +
                                                std::to_string(a.dim()) + " and " +
                                                std::to_string(b.dim()));
    }
    return codiff(spherical_centroid(a), spherical_centroid(b));
}

FrechetResult
frechet_distance(Rows x, Rows y, FrechetMeanTerm mean_term) {
    if (x.size() < 2 || y.size() < 2) {
        fail(ErrorCode::kTooFewSamples, "Fréchet distance needs >= 2 samples per side, got " +
                                            std::to_string(x.size()) + " and " +
                                            std::to_string(y.size()));
    }
    if (x.dim() != y.dim()) {
        fail(ErrorCode::kDimensionMismatch, "Fréchet distance between dimensions " +
                                                std::to_string(x.dim()) + " and " +
                                                std::to_string(y.dim()));
    }
    const Eigen::VectorXd mu_x = as_matrix(x).colwise().mean().transpose();
    const Eigen::VectorXd mu_y = as_matrix(y).colwise().mean().transpose();
    const Matrix cov_x = covariance(x, mu_x);
    const Matrix cov_y = covariance(y, mu_y);

    const auto eig_x = checked_eigen(cov_x, "covariance of the first sample");
    const Eigen::VectorXd root_ev = eig_x.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix sqrt_x = eig_x.eigenvectors() * root_ev.asDiagonal() * eig_x.eigenvectors().transpose();

    Matrix product = sqrt_x * cov_y * sqrt_x;
    product = 0.5 * (product + product.transpose()).eval();
    const auto eig_p = checked_eigen(product, "covariance product");
    const double trace_sqrt = eig_p.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    FrechetResult out;
    const double diff_sq = (mu_x - mu_y).squaredNorm();
    out.mean_term = mean_term == FrechetMeanTerm::kSquared ? diff_sq : std::sqrt(diff_sq);
    out.trace_term = std::max(0.0, cov_x.trace() + cov_y.trace() - 2.0 * trace_sqrt);
    out.total = out.mean_term + out.trace_term;
    return out;
}

double
avg_cos_similarity(const ReferenceIndex& reference,
                   const EmbeddingSet& queries,
                   SimilarityPairing pairing) {
    if (queries.dimension() != reference.dimension()) {
        fail(ErrorCode::kDimensionMismatch, "queries have dimension " +
                                                std::to_string(queries.dimension()) +
                                                ", references " +
                                                std::to_string(reference.dimension()));
    }
    const Embeddings unit = normalize_rows(queries.rows());
    std::vector<double> paired(unit.size(), -std::numeric_limits<double>::infinity());

    if (pairing == SimilarityPairing::kNearest) {
        similarity_sweep(unit.rows(), reference.entries(),
                         [&](std::size_t q, std::size_t, std::span<const double> sims) {
                             paired[q] = std::max(paired[q], *std::max_element(sims.begin(), sims.end()));
                         });
    } else {
        if (reference.mode() != ReferenceMode::kCentroid) {
            fail(ErrorCode::kInvalidArgument, "true-class pairing needs a centroid index");
        }
        for (std::size_t c = 0; c < queries.num_classes(); ++c) {
            const auto& e = queries.entry(c);
            const auto ref_class = reference.find_class(e.label.id);
            if (!ref_class) {
                fail(ErrorCode::kClassUniverseMismatch,
                     "query class " + std::to_string(e.label.id.value) + " has no reference centroid");
            }
            const auto centroid = reference.entries()[*ref_class];
            for (std::size_t i = e.offset; i < e.offset + e.count; ++i) {
                paired[i] = cosine_similarity(unit[i], centroid);
            }
        }
    }
    double sum = 0.0;
    for (double s : paired) {
        sum += s;
    }
    return sum / static_cast<double>(paired.size());
}

}  // namespace embedlens
