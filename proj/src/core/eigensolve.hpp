/*
specstab
Copyright 2026 specstab contributors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

   http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <cstdint>

#include "fem.hpp"

namespace specstab {

/// Eigenpairs of K φ = λ M_μ φ. Index 0 is the constant mode with λ₀ = 0;
/// indices 1..k are the smallest nonzero eigenvalues in ascending order,
/// with degenerate multiplicities reported as repeated values.
struct SpectralResult {
    Eigen::VectorXd lambdas;
    Eigen::MatrixXd eigenvectors;  // columns, M_μ-orthonormal
    Eigen::VectorXd residuals;     // relative residual per pair
    double mass = 0.0;             // μ(M)
    Normalization normalization = Normalization::None;

    /// λ̄_k = λ_k · μ(M).
    double normalized(int k) const;
    int count() const { return static_cast<int>(lambdas.size()); }

    void save(const std::string& path) const;
};

struct EigOptions {
    double tol = 1e-8;
    int max_restarts = 40;
    int block_size = 100;
    std::uint64_t seed = 0x5eed5eedULL;
};

/// Smallest k+1 eigenpairs of the pencil (K, M) by shift-invert Lanczos
/// with explicit deflation of the constant mode and locking of converged
/// pairs. Deterministic for a fixed seed.
SpectralResult solve_generalized(const SparseOperator& stiffness, const SparseOperator& mass,
                                 int k, const EigOptions& options = {});

/// Convenience wrapper: assembles both operators from a measure and fills
/// in the mass metadata.
SpectralResult solve_measure_spectrum(const SurfaceMesh& mesh, const MeasureOnMesh& measure,
                                      int k, const EigOptions& options = {});

}  // namespace specstab
