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

#include <Eigen/Dense>

#include "fem.hpp"
#include "measure.hpp"
#include "sphere_map.hpp"
#include "surface_mesh.hpp"

namespace specstab {

/// Conformal automorphism G_a of Sⁿ, parameterized by a point of the
/// open unit ball 𝔹ⁿ⁺¹. G_0 is the identity and G_{-a} the inverse.
struct MoebiusParam {
    Eigen::VectorXd a;

    explicit MoebiusParam(Eigen::VectorXd param);
    static MoebiusParam identity(int ambient_dim = 3);
    MoebiusParam inverse() const;
    int ambient_dim() const { return static_cast<int>(a.size()); }
};

/// G_a(x) = (1-|a|²)/|x+a|² (x+a) + a for unit x.
Eigen::VectorXd apply_moebius(const MoebiusParam& param, const Eigen::VectorXd& x);

/// Conformal area element of G_a at x: |dG_a| scales lengths by
/// (1-|a|²)/|x+a|².
double moebius_conformal_factor(const MoebiusParam& param, const Eigen::VectorXd& x);

/// Compose G_a with a map: values (and analytic evaluator, if present)
/// are pushed through G_a.
SphereValuedMap compose_moebius(const MoebiusParam& param, const SphereValuedMap& u);

/// ∫ f d(Φ_*μ) = ∫ (f ∘ Φ) dμ, evaluated lazily by composition under
/// quadrature; f is a piecewise-linear function on the sphere mesh.
double pair_with_pushforward(const SurfaceMesh& mesh, const MeasureOnMesh& mu,
                             const MoebiusParam& phi, const FEFunction& f);

/// Pairing vector of Φ_*μ against the whole hat basis (one point
/// location pass over the quadrature vertices).
Eigen::VectorXd pushforward_pairing_vector(const SurfaceMesh& mesh, const MeasureOnMesh& mu,
                                           const MoebiusParam& phi);

/// Vertex-atomic stand-in for Φ_*μ, for refinement studies of the
/// conformal invariance of eigenvalues.
MeasureOnMesh pushforward_resample(const SurfaceMesh& mesh, const MeasureOnMesh& mu,
                                   const MoebiusParam& phi);

struct BalanceOptions {
    double tol = 1e-10;
    int max_iterations = 200;
};

struct BalanceResult {
    MoebiusParam param;
    double residual = 0.0;
    int iterations = 0;
};

/// Hersch balancing: find a with ∫ G_a dμ = 0, by damped Newton with a
/// homotopy restart along -F(0)/|F(0)|.
BalanceResult hersch_balance(const SurfaceMesh& mesh, const MeasureOnMesh& mu,
                             const BalanceOptions& options = {});

/// Spherical cap {x : angle(center, x) < radius} on the curvature-one
/// sphere; radius in (0, π).
struct SphericalCap {
    Eigen::Vector3d center = Eigen::Vector3d(0, 0, 1);
    double radius = 0.0;

    void validate() const;
    /// Cap area on the curvature-one sphere.
    double area() const { return 2.0 * std::numbers::pi * (1.0 - std::cos(radius)); }
};

/// Conformal reflection across ∂Z applied to a single point inside Z.
Eigen::Vector3d cap_reflect_point(const SphericalCap& cap, const Eigen::Vector3d& x);

/// R_Z: identity outside Z, conformal reflection across ∂Z inside.
/// Boundary ties go to the outside (identity) branch.
Eigen::Vector3d cap_fold_point(const SphericalCap& cap, const Eigen::Vector3d& x);

SphereValuedMap cap_reflection_map(const SphericalCap& cap, const SurfaceMesh& mesh);

struct NadirashviliOptions {
    double tol = 1e-8;  // residual relative to μ(M)
    int max_iterations = 160;
    int coarse_starts = 12;
    std::uint64_t seed = 0x0badcafeULL;
};

struct NadirashviliResult {
    MoebiusParam phi = MoebiusParam::identity();  // conformal automorphism Φ = G_a
    SphericalCap inner_cap;  // Z' in the domain of Φ
    SphericalCap image_cap;  // Z = Φ(Z'), whose center is the bubbling point
    double residual = 0.0;   // |six balancing conditions| / μ(M)
    bool balanced = false;
    SphereValuedMap folded_map;  // u = Φ ∘ R_{Z'} ∘ Φ⁻¹ at mesh vertices
    double energy_times_two = 0.0;
};

/// Two-constraint balancing for λ₂: search (a, cap) so that Φ∘R_{Z'} has
/// vanishing μ-averages against 1 and the first eigenfunction. The
/// existence proof is non-constructive, so a failed search returns the
/// best candidate flagged unbalanced instead of throwing.
NadirashviliResult nadirashvili_balance(const SurfaceMesh& mesh, const MeasureOnMesh& mu,
                                        const FEFunction& phi1,
                                        const NadirashviliOptions& options = {});

/// E(G_a ∘ u) through the closed-form conformal weight of the canonical
/// family; does not re-differentiate the composition. Equals the plain
/// Dirichlet energy at a = 0.
double canonical_family_energy(const SurfaceMesh& mesh, const SphereValuedMap& u,
                               const MoebiusParam& param);

struct HessianH0 {
    double moment_form = 0.0;  // 4∫(3⟨v,F₀⟩² - |v|²)|dF₀|²
    double normal_form = 0.0;  // -4∫|v^⊥|²|dF₀|²
    double discrepancy = 0.0;
    bool harmonic_input = true;
};

/// Second radial derivative of the canonical-family energy at a = 0 in
/// direction v, in both algebraic forms.
HessianH0 hessian_H0(const SurfaceMesh& mesh, const SphereValuedMap& u, const Eigen::VectorXd& v);

}  // namespace specstab
