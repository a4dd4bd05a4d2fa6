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

#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace specstab {

enum class Topology { Sphere, Torus };

/// Lattice Γ = ℤ(1,0) ⊕ ℤ(c,d) for a flat-torus quotient.
struct LatticeSpec {
    double c = 0.0;
    double d = 1.0;

    void validate() const;
    bool rhombic_unit(double tol = 1e-12) const;
    double cell_area() const { return d; }
};

/// Triangulated model of the round sphere S² or a flat torus ℝ²/Γ.
///
/// Vertex coordinates are stored in the reference geometry (unit sphere
/// directions, or lattice fundamental-domain coordinates with z = 0).
/// All metric quantities (edge lengths, areas, geodesic distances) carry
/// the uniform factor `metric_scale`, so a torus always has unit area and
/// a sphere can be switched between the curvature-one round metric
/// (scale 1, area 4π) and the unit-area round metric of conformally
/// rescaled experiments.
///
/// Meshes are immutable after construction and safe to share across
/// threads.
class SurfaceMesh {
public:
    static SurfaceMesh build_icosphere(int subdivisions, bool unit_area = false);
    static SurfaceMesh build_flat_torus(const LatticeSpec& lattice, int n);
    static SurfaceMesh load(const std::string& path);
    void save(const std::string& path) const;

    Topology topology() const { return topology_; }
    int vertex_count() const { return static_cast<int>(vertices_.rows()); }
    int triangle_count() const { return static_cast<int>(triangles_.rows()); }
    int edge_count() const { return edge_count_; }
    int euler_characteristic() const;

    const Eigen::MatrixXd& vertices() const { return vertices_; }
    const Eigen::MatrixXi& triangles() const { return triangles_; }
    const std::optional<LatticeSpec>& lattice() const { return lattice_; }
    double metric_scale() const { return metric_scale_; }
    bool unit_area_sphere() const { return topology_ == Topology::Sphere && metric_scale_ != 1.0; }

    double total_area() const { return total_area_; }
    const Eigen::VectorXd& triangle_areas() const { return tri_areas_; }
    const Eigen::VectorXd& vertex_areas() const { return vertex_areas_; }

    /// Unwrapped corner positions of triangle t (row i = corner i), in
    /// metric units. For the torus these are consistent lattice
    /// coordinates of one representative cell, not wrapped vertices.
    const Eigen::Matrix3d& corner_positions(int t) const { return corners_[t]; }

    /// Gradients of the three hat functions on triangle t (row i = ∇λ_i),
    /// as vectors in the triangle plane, metric units.
    const Eigen::Matrix3d& hat_gradients(int t) const { return hat_grads_[t]; }

    const std::vector<std::vector<int>>& vertex_triangles() const { return vertex_tris_; }
    const Eigen::MatrixXi& triangle_neighbors() const { return tri_neighbors_; }

    /// Geodesic distance between two surface points given in reference
    /// coordinates (unit directions for the sphere, fundamental-domain
    /// coordinates for the torus), in metric units.
    double geodesic_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& y) const;

    /// Geodesic distance between two mesh vertices.
    double vertex_distance(int i, int j) const;

    struct PointLocation {
        int tri = -1;
        Eigen::Vector3d bary = Eigen::Vector3d::Zero();
    };

    /// Locate the triangle containing the unit direction x (sphere only)
    /// and return barycentric weights of the radial projection.
    PointLocation locate_on_sphere(const Eigen::Vector3d& x) const;

    /// Vertex nearest to the unit direction x (sphere) or lattice point
    /// (torus, via minimal-image distance).
    int nearest_vertex(const Eigen::Vector3d& x) const;

private:
    SurfaceMesh() = default;
    void finalize();
    void validate_manifold();

    Topology topology_ = Topology::Sphere;
    Eigen::MatrixXd vertices_;   // V×3
    Eigen::MatrixXi triangles_;  // F×3
    std::optional<LatticeSpec> lattice_;
    double metric_scale_ = 1.0;

    // derived
    int edge_count_ = 0;
    double total_area_ = 0.0;
    Eigen::VectorXd tri_areas_;
    Eigen::VectorXd vertex_areas_;
    std::vector<Eigen::Matrix3d> corners_;
    std::vector<Eigen::Matrix3d> hat_grads_;
    std::vector<std::vector<int>> vertex_tris_;
    Eigen::MatrixXi tri_neighbors_;
};

}  // namespace specstab
