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
#include "fem.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <fstream>
#include <vector>

namespace specstab {

SparseOperator assemble_stiffness(const SurfaceMesh& mesh)
{
    const int nv = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.triangle_count() * 9);

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles();
        const Eigen::Matrix3d& p = mesh.corner_positions(t);
        const double area = mesh.triangle_areas()[t];
        if (!(area > 0.0))
            fail(ErrorCode::InvalidInput, "degenerate triangle " + std::to_string(t) + " in stiffness assembly");
        // cot of the angle at corner c weights the opposite edge.
        for (int c = 0; c < 3; ++c) {
            const int i = tri(t, (c + 1) % 3);
            const int j = tri(t, (c + 2) % 3);
            const Eigen::Vector3d e1 = p.row((c + 1) % 3) - p.row(c);
            const Eigen::Vector3d e2 = p.row((c + 2) % 3) - p.row(c);
            const double cot = e1.dot(e2) / (2.0 * area);
            const double w = 0.5 * cot;
            trips.emplace_back(i, j, -w);
            trips.emplace_back(j, i, -w);
            trips.emplace_back(i, i, w);
            trips.emplace_back(j, j, w);
        }
    }

    SparseOperator stiffness(nv, nv);
    stiffness.setFromTriplets(trips.begin(), trips.end());
    return stiffness;
}

SparseOperator assemble_mass(const SurfaceMesh& mesh, const MeasureOnMesh& measure)
{
    if (measure.density().size() != mesh.vertex_count())
        fail(ErrorCode::InvalidInput, "measure does not match mesh");
    const int nv = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.triangle_count() * 9 + measure.atoms().size());

    const auto& rho = measure.density();
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles();
        const double area = mesh.triangle_areas()[t];
        const double r[3] = {rho[tri(t, 0)], rho[tri(t, 1)], rho[tri(t, 2)]};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double v;
                if (i == j) {
                    v = area * (r[i] / 10.0 + (r[(i + 1) % 3] + r[(i + 2) % 3]) / 30.0);
                } else {
                    const int k = 3 - i - j;
                    v = area * ((r[i] + r[j]) / 30.0 + r[k] / 60.0);
                }
                trips.emplace_back(tri(t, i), tri(t, j), v);
            }
        }
    }
    for (const auto& a : measure.atoms()) trips.emplace_back(a.vertex, a.vertex, a.weight);

    SparseOperator mass(nv, nv);
    mass.setFromTriplets(trips.begin(), trips.end());
    return mass;
}

SparseOperator assemble_background_mass(const SurfaceMesh& mesh)
{
    return assemble_mass(mesh, MeasureOnMesh::uniform(mesh));
}

SparseOperator assemble_mass_triangle_weights(const SurfaceMesh& mesh,
                                              const Eigen::VectorXd& tri_weights)
{
    if (tri_weights.size() != mesh.triangle_count())
        fail(ErrorCode::InvalidInput, "triangle weight vector does not match mesh");
    const int nv = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.triangle_count() * 9);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles();
        const double s = tri_weights[t] * mesh.triangle_areas()[t] / 12.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.emplace_back(tri(t, i), tri(t, j), i == j ? 2.0 * s : s);
    }
    SparseOperator mass(nv, nv);
    mass.setFromTriplets(trips.begin(), trips.end());
    return mass;
}

double dirichlet_energy(const SparseOperator& stiffness, const VectorField& u)
{
    if (u.rows() != stiffness.rows())
        fail(ErrorCode::InvalidInput, "field does not match operator dimension");
    double energy = 0.0;
    for (int c = 0; c < u.cols(); ++c) energy += u.col(c).dot(stiffness * u.col(c));
    return 0.5 * energy;
}

Eigen::Vector3d triangle_gradient(const SurfaceMesh& mesh, int t, const FEFunction& f)
{
    const auto& tri = mesh.triangles();
    const Eigen::Matrix3d& grads = mesh.hat_gradients(t);
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (int c = 0; c < 3; ++c) g += f[tri(t, c)] * grads.row(c).transpose();
    return g;
}

Eigen::VectorXd map_energy_density(const SurfaceMesh& mesh, const VectorField& u)
{
    Eigen::VectorXd density(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles();
        const Eigen::Matrix3d& grads = mesh.hat_gradients(t);
        double e = 0.0;
        for (int c = 0; c < u.cols(); ++c) {
            Eigen::Vector3d g = Eigen::Vector3d::Zero();
            for (int k = 0; k < 3; ++k) g += u(tri(t, k), c) * grads.row(k).transpose();
            e += g.squaredNorm();
        }
        density[t] = e;
    }
    return density;
}

Eigen::VectorXd energy_density_pairing(const SurfaceMesh& mesh, const VectorField& u)
{
    const Eigen::VectorXd density = map_energy_density(mesh, u);
    Eigen::VectorXd pairing = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (int t = 0; t < mesh.triangle_count(); ++t)
        for (int c = 0; c < 3; ++c)
            pairing[mesh.triangles()(t, c)] += density[t] * mesh.triangle_areas()[t] / 3.0;
    return pairing;
}

double w1inf_norm(const SurfaceMesh& mesh, const VectorField& u)
{
    const Eigen::VectorXd density = map_energy_density(mesh, u);
    double best = 0.0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        double grad_sup = 0.0;
        for (const int t : mesh.vertex_triangles()[v]) grad_sup = std::max(grad_sup, density[t]);
        best = std::max(best, u.row(v).norm() + std::sqrt(grad_sup));
    }
    return best;
}

double dual_gradient_seminorm(const SparseOperator& stiffness, Eigen::VectorXd r)
{
    r.array() -= r.mean();
    if (r.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    Eigen::ConjugateGradient<SparseOperator, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(20000);
    cg.compute(stiffness);
    Eigen::VectorXd x = cg.solve(r);
    if (cg.info() != Eigen::Success && cg.error() > 1e-8)
        fail(ErrorCode::Numeric, "dual seminorm solve did not converge");
    x.array() -= x.mean();
    return std::sqrt(std::max(r.dot(x), 0.0));
}

void save_operator_coo(const SparseOperator& op, const std::string& path)
{
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write operator file: " + path);
    out << op.rows() << " " << op.cols() << " " << op.nonZeros() << "\n";
    out.precision(17);
    for (int k = 0; k < op.outerSize(); ++k)
        for (SparseOperator::InnerIterator it(op, k); it; ++it)
            out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace specstab
