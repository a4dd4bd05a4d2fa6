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

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <string>
#include <vector>

#include "fem.hpp"
#include "measure.hpp"
#include "sphere_harmonics.hpp"
#include "surface_mesh.hpp"

namespace specstab {

/// Background-metric operators shared by the dual-norm computations:
/// stiffness K, mass M_g and a factorization of K + M_g.
class BackgroundOperators {
public:
    explicit BackgroundOperators(const SurfaceMesh& mesh);

    const SurfaceMesh& mesh() const { return *mesh_; }
    const SparseOperator& stiffness() const { return stiffness_; }
    const SparseOperator& mass() const { return mass_; }
    Eigen::VectorXd solve_w12(const Eigen::VectorXd& rhs) const;
    double w12_norm_sq(const Eigen::VectorXd& f) const;

private:
    const SurfaceMesh* mesh_;
    SparseOperator stiffness_;
    SparseOperator mass_;
    Eigen::SimplicialLDLT<SparseOperator> solver_;
};

/// Functional f ↦ ∫ f d(μ - ν) represented by its pairings with the hat
/// basis.
class SignedMeasureFunctional {
public:
    SignedMeasureFunctional(const SurfaceMesh& mesh, Eigen::VectorXd pairing);
    static SignedMeasureFunctional difference(const SurfaceMesh& mesh, const MeasureOnMesh& mu,
                                              const MeasureOnMesh& nu);

    const Eigen::VectorXd& pairing() const { return pairing_; }
    /// pairing against the constant 1 = μ(M) - ν(M)
    double mass_difference() const { return pairing_.sum(); }

private:
    Eigen::VectorXd pairing_;
};

/// ‖m‖_{W^{-1,2}} = sqrt(mᵀ (K + M_g)⁻¹ m), the exact dual of the
/// discrete W^{1,2} norm.
double w_minus12_norm(const BackgroundOperators& ops, const SignedMeasureFunctional& m);

/// Riesz representative (K + M_g)⁻¹ m of the functional.
Eigen::VectorXd w_minus12_riesz(const BackgroundOperators& ops, const SignedMeasureFunctional& m);

struct DictionaryElement {
    FEFunction values;
    double sup_norm = 0.0;  // ‖ψ‖_{C⁰}, conservative upper estimate
    std::string label;
};

/// Harmonics up to `degree` plus smoothed geodesic bumps at the given
/// centers: the test dictionary for the (C⁰∩W^{1,2})* lower bound.
std::vector<DictionaryElement> build_c0w12_dictionary(const SurfaceMesh& mesh, int degree,
                                                      const std::vector<Eigen::Vector3d>& bump_centers,
                                                      const std::vector<double>& bump_radii);

/// LOWER bound of ‖m‖_{(C⁰∩W^{1,2})*}: max over the dictionary of
/// ⟨m, ψ⟩ / sqrt(‖ψ‖²_{C⁰} + ψᵀKψ).
double dual_c0w12_norm_lb(const BackgroundOperators& ops, const SignedMeasureFunctional& m,
                          const std::vector<DictionaryElement>& dictionary);

/// LOWER bound of ‖m‖_{(C¹)*}: max over spherical harmonics of degree
/// ≤ max_degree of ⟨m, ψ⟩ / (‖ψ‖_{C⁰} + ‖∇ψ‖_{C⁰}); monotone in the
/// degree. Sphere meshes only.
double dual_c1_norm_lb(const SurfaceMesh& mesh, const SignedMeasureFunctional& m, int max_degree);

/// Luxemburg norm ‖f‖_{L²(LogL)^{-1/2}}: the unique η with
/// ∫ |f/η|² / log(2 + |f/η|) dv_g = 1, by bisection.
double orlicz_norm(const SurfaceMesh& mesh, const FEFunction& f);

/// Orlicz-Sobolev norm: value part plus the same functional of |df|.
double orlicz_w12_norm(const SurfaceMesh& mesh, const FEFunction& f);

/// LOWER bound of the (W^{1,2,-1/2})* distance: sup over candidate
/// profiles φ of ∫φ² dm / ‖φ²‖_{W^{1,2,-1/2}}.
double orlicz_dual_lb(const SurfaceMesh& mesh, const SignedMeasureFunctional& m,
                      const std::vector<FEFunction>& candidates);

/// Log-cap candidate profiles of the concentration analysis: truncated
/// logarithmic bumps at ±e₃, antisymmetrized and mean-centered.
std::vector<FEFunction> concentration_profiles(const SurfaceMesh& mesh,
                                               const std::vector<double>& radii);

struct AtomicMeasure {
    std::vector<int> vertices;
    std::vector<double> weights;  // positive, sum 1
};

struct TransportPlan {
    double w2 = 0.0;
    Eigen::MatrixXd flow;  // rows: mu atoms, cols: nu atoms
    Eigen::MatrixXd cost;  // geodesic-squared cost table
};

/// Exact quadratic-Wasserstein distance between two small atomic
/// unit-mass measures on the mesh, by min-cost flow on geodesic-squared
/// costs. Supports at most 400 points per side.
double wasserstein2_exact_small(const SurfaceMesh& mesh, const AtomicMeasure& mu,
                                const AtomicMeasure& nu);

/// Serializable record of a single norm evaluation; bound_type is
/// "exact" for the Riesz-dual W^{-1,2} value and "lower" for the
/// dictionary-sup estimates.
struct NormReport {
    std::string norm_name;
    double value = 0.0;
    std::string bound_type;       // "exact" | "lower"
    std::string dictionary_spec;  // empty for exact norms
    void save(const std::string& path) const;
};

/// Same computation, returning the optimal plan for certification.
TransportPlan wasserstein2_plan(const SurfaceMesh& mesh, const AtomicMeasure& mu,
                                const AtomicMeasure& nu);

}  // namespace specstab
