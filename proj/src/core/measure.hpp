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

#include <string>
#include <vector>

#include "surface_mesh.hpp"

namespace specstab {

enum class Normalization { None, UnitMass, FirstEigenvalueTwo };

struct Atom {
    int vertex = -1;
    double weight = 0.0;
};

/// Radon measure on a mesh: piecewise-linear density w.r.t. dv_g plus a
/// finite atomic part pinned to mesh vertices.
class MeasureOnMesh {
public:
    MeasureOnMesh(const SurfaceMesh& mesh, Eigen::VectorXd density,
                  std::vector<Atom> atoms = {},
                  Normalization normalization = Normalization::None);

    static MeasureOnMesh uniform(const SurfaceMesh& mesh, bool unit_mass = false);
    static MeasureOnMesh load(const SurfaceMesh& mesh, const std::string& path);
    void save(const std::string& path) const;

    const Eigen::VectorXd& density() const { return density_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    Normalization normalization() const { return normalization_; }

    double total_mass(const SurfaceMesh& mesh) const;

    /// Vector p with p_i = ∫ φ_i dμ for the hat basis; pairing against
    /// any piecewise-linear function f is f·p, exact for the density part.
    Eigen::VectorXd pairing_vector(const SurfaceMesh& mesh) const;

    MeasureOnMesh scaled(double factor) const;
    MeasureOnMesh normalized_unit_mass(const SurfaceMesh& mesh) const;
    MeasureOnMesh with_atom(int vertex, double weight) const;

private:
    Eigen::VectorXd density_;
    std::vector<Atom> atoms_;
    Normalization normalization_ = Normalization::None;
};

/// Bump measure ν_ε: indicator of two antipodal geodesic caps of radius
/// ε around ±e₃ on the unit-area round sphere, scaled by 1/(ε² log 1/ε).
MeasureOnMesh cap_bump_measure(const SurfaceMesh& mesh, double eps);

/// Concentration family μ_ε^M = (dv_g + M ν_ε) / (1 + M ν_ε(S²)),
/// returned with total mass exactly 1.
MeasureOnMesh cap_concentration_measure(const SurfaceMesh& mesh, double eps, double coupling);

}  // namespace specstab
