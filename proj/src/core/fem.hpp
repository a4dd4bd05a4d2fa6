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
#include <Eigen/Sparse>

#include <string>

#include "measure.hpp"
#include "surface_mesh.hpp"

namespace specstab {

using SparseOperator = Eigen::SparseMatrix<double>;
using FEFunction = Eigen::VectorXd;     // per-vertex values
using VectorField = Eigen::MatrixXd;    // V×(n+1) per-vertex values

/// Cotangent stiffness matrix: K_ij = -(cot α_ij + cot β_ij)/2 on edges.
/// Depends only on the conformal class of the background metric.
SparseOperator assemble_stiffness(const SurfaceMesh& mesh);

/// Consistent mass matrix of a piecewise-linear density (exact for the
/// PL·PL·PL integrand) plus diagonal atom contributions.
SparseOperator assemble_mass(const SurfaceMesh& mesh, const MeasureOnMesh& measure);

/// Background-metric mass matrix, the μ = dv_g case.
SparseOperator assemble_background_mass(const SurfaceMesh& mesh);

/// Mass matrix weighted by a per-triangle constant density.
SparseOperator assemble_mass_triangle_weights(const SurfaceMesh& mesh,
                                              const Eigen::VectorXd& tri_weights);

/// E(u) = ½ Σ_c u_cᵀ K u_c.
double dirichlet_energy(const SparseOperator& stiffness, const VectorField& u);

/// Per-triangle gradient of a scalar FE function, as a 3-vector in the
/// triangle plane.
Eigen::Vector3d triangle_gradient(const SurfaceMesh& mesh, int t, const FEFunction& f);

/// Per-triangle energy density |du|²_g of a vector-valued map.
Eigen::VectorXd map_energy_density(const SurfaceMesh& mesh, const VectorField& u);

/// Pairing vector of the energy measure |du|² dv_g against the hat basis.
Eigen::VectorXd energy_density_pairing(const SurfaceMesh& mesh, const VectorField& u);

/// Discrete W^{1,∞} norm: max over vertices of |u(v)| plus the largest
/// incident-triangle gradient norm.
double w1inf_norm(const SurfaceMesh& mesh, const VectorField& u);

/// Coordinate-list text export for external cross-checks.
void save_operator_coo(const SparseOperator& op, const std::string& path);

/// sqrt(rᵀ K⁺ r): the dual seminorm sup_φ ⟨r, φ⟩ / ‖dφ‖_{L²} of a
/// functional r on the FE space. r is projected onto mean-zero first.
double dual_gradient_seminorm(const SparseOperator& stiffness, Eigen::VectorXd r);

}  // namespace specstab
