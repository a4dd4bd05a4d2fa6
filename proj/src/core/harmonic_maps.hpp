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

#include <functional>
#include <vector>

#include "fem.hpp"
#include "moebius.hpp"
#include "sphere_map.hpp"

namespace specstab {

/// Doubly periodic eigenmap Φ_{c,d}: 𝕋² → S³: a pair of unit circles
/// wrapped along the two lattice frequencies, scaled by 1/√2.
SphereValuedMap torus_eigenmap(const LatticeSpec& lattice, const SurfaceMesh& mesh);

/// Minimal embedding of the equilateral torus into S⁵ by its six first
/// eigenfunctions (three unit complex exponentials scaled by 1/√3).
SphereValuedMap equilateral_s5_map(const SurfaceMesh& mesh);

/// Identity map S² → S².
SphereValuedMap sphere_identity_map(const SurfaceMesh& mesh);

/// Flat eigenvalue of the Φ_{c,d} component frequencies on the unit-area
/// torus (equal for both frequency families iff c² + d² = 1).
double torus_eigenmap_eigenvalue(const LatticeSpec& lattice);

/// Worst-case FE residual of Δu = λ u (w.r.t. μ):
/// sup_v [⟨du, dv⟩ - λ⟨u, v⟩_μ] / ‖dv‖.
double tension_residual(const SurfaceMesh& mesh, const SphereValuedMap& u,
                        const MeasureOnMesh& mu, double lambda);

/// Weak-codifferential residuals of the conservation 1-forms
/// α^{ab} = u^a du^b - u^b du^a, one per component pair a < b.
Eigen::MatrixXd conservation_residual(const SurfaceMesh& mesh, const SphereValuedMap& u);

/// I_u(v, w) = ∫ ⟨dv, dw⟩ - |du|² ⟨v, w⟩ dv_g for per-vertex fields,
/// with v, w projected pointwise orthogonal to u when violated
/// (projection is reported through *projected).
double jacobi_form(const SurfaceMesh& mesh, const SphereValuedMap& u,
                   const VectorField& v, const VectorField& w, bool* projected = nullptr);

/// Closed-form field on the mesh: value, Euclidean-coordinate gradient
/// (rows = ambient components, columns = reference x/y/z derivative),
/// evaluated in reference coordinates.
struct AnalyticField {
    int dim = 0;
    std::function<Eigen::VectorXd(const Eigen::Vector3d&)> value;
    std::function<Eigen::MatrixXd(const Eigen::Vector3d&)> gradient;
};

/// I_u(v, w) by degree-5 quadrature of closed forms; the energy density
/// |du|² is supplied as a function of reference coordinates. Exact up to
/// quadrature error, independent of the FE interpolation.
double jacobi_form_quadrature(const SurfaceMesh& mesh,
                              const std::function<double(const Eigen::Vector3d&)>& du_sq,
                              const AnalyticField& v, const AnalyticField& w);

/// Form norm sup_w |I_u(v, w e_c)| / ‖w‖_{W^{1,2}} over FE test fields,
/// with the residual functional assembled by degree-5 quadrature from
/// closed forms of v and |du|².
double jacobi_residual_form_norm(const SurfaceMesh& mesh,
                                 const std::function<double(const Eigen::Vector3d&)>& du_sq,
                                 const AnalyticField& v);

/// Area of the immersed image (induced-metric area of the PL map).
double map_area(const SurfaceMesh& mesh, const SphereValuedMap& map);

/// Discrete ‖H_F‖_∞: cotangent Laplacian of the induced metric applied
/// to the coordinates, normalized by induced vertex areas.
double mean_curvature_sup(const SurfaceMesh& mesh, const SphereValuedMap& map);

/// Θ_F(y, r) = Area({|F - y| < r}, induced metric) / r². Triangles
/// straddling the boundary are refined barycentrically to `depth`.
double area_density(const SurfaceMesh& mesh, const SphereValuedMap& map,
                    const Eigen::VectorXd& y, double r, int depth = 3);

struct MoebiusAreaSample {
    double t = 0.0;
    double area = 0.0;
    double bracket_low = 0.0;
    double bracket_high = 0.0;
};

struct MoebiusAreaLimit {
    std::vector<MoebiusAreaSample> samples;
    double extrapolated = 0.0;
    double four_theta = 0.0;  // 4 Θ_F(-α, 0)
    bool conclusive = true;
};

/// Area(G_{tα} ∘ F) along a t-grid toward the boundary of the ball, with
/// Richardson extrapolation of the limit and two-sided area brackets at
/// δ = (1-t)^{1/3}.
MoebiusAreaLimit moebius_area_limit(const SurfaceMesh& mesh, const SphereValuedMap& map,
                                    const Eigen::VectorXd& alpha,
                                    const std::vector<double>& t_grid = {0.9, 0.95, 0.99, 0.995},
                                    int depth = 4);

}  // namespace specstab
