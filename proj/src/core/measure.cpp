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
#include "measure.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace specstab {

MeasureOnMesh::MeasureOnMesh(const SurfaceMesh& mesh, Eigen::VectorXd density,
                             std::vector<Atom> atoms, Normalization normalization)
    : density_(std::move(density)), atoms_(std::move(atoms)), normalization_(normalization)
{
    if (density_.size() != mesh.vertex_count())
        fail(ErrorCode::InvalidInput, "measure density length does not match mesh vertex count");
    for (int i = 0; i < density_.size(); ++i) {
        if (!std::isfinite(density_[i]) || density_[i] < 0.0)
            fail(ErrorCode::InvalidInput, "measure density must be finite and nonnegative");
    }
    for (const auto& a : atoms_) {
        if (a.vertex < 0 || a.vertex >= mesh.vertex_count())
            fail(ErrorCode::InvalidInput, "atom vertex index out of range");
        if (!(a.weight > 0.0) || !std::isfinite(a.weight))
            fail(ErrorCode::InvalidInput, "atom weights must be positive and finite");
    }
    if (!(total_mass(mesh) > 0.0))
        fail(ErrorCode::InvalidInput, "measure must have positive total mass");
}

MeasureOnMesh MeasureOnMesh::uniform(const SurfaceMesh& mesh, bool unit_mass)
{
    Eigen::VectorXd density = Eigen::VectorXd::Ones(mesh.vertex_count());
    if (unit_mass) density /= mesh.total_area();
    return MeasureOnMesh(mesh, std::move(density), {},
                         unit_mass ? Normalization::UnitMass : Normalization::None);
}

double MeasureOnMesh::total_mass(const SurfaceMesh& mesh) const
{
    double mass = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles();
        const double avg = (density_[tri(t, 0)] + density_[tri(t, 1)] + density_[tri(t, 2)]) / 3.0;
        mass += avg * mesh.triangle_areas()[t];
    }
    for (const auto& a : atoms_) mass += a.weight;
    return mass;
}

Eigen::VectorXd MeasureOnMesh::pairing_vector(const SurfaceMesh& mesh) const
{
    // ∫ φ_i ρ dv on one triangle, exact for linear ρ:
    // ρ_i A/6 + (ρ_j + ρ_k) A/12.
    Eigen::VectorXd p = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles();
        const double area = mesh.triangle_areas()[t];
        const double r[3] = {density_[tri(t, 0)], density_[tri(t, 1)], density_[tri(t, 2)]};
        for (int i = 0; i < 3; ++i)
            p[tri(t, i)] += area * (r[i] / 6.0 + (r[(i + 1) % 3] + r[(i + 2) % 3]) / 12.0);
    }
    for (const auto& a : atoms_) p[a.vertex] += a.weight;
    return p;
}

MeasureOnMesh MeasureOnMesh::scaled(double factor) const
{
    if (!(factor > 0.0))
        fail(ErrorCode::InvalidInput, "measure scaling factor must be positive");
    MeasureOnMesh out = *this;
    out.density_ *= factor;
    for (auto& a : out.atoms_) a.weight *= factor;
    return out;
}

MeasureOnMesh MeasureOnMesh::normalized_unit_mass(const SurfaceMesh& mesh) const
{
    MeasureOnMesh out = scaled(1.0 / total_mass(mesh));
    out.normalization_ = Normalization::UnitMass;
    return out;
}

MeasureOnMesh MeasureOnMesh::with_atom(int vertex, double weight) const
{
    MeasureOnMesh out = *this;
    out.atoms_.push_back({vertex, weight});
    return out;
}

void MeasureOnMesh::save(const std::string& path) const
{
    nlohmann::json doc;
    doc["mesh_ref"] = "";
    doc["density"] = std::vector<double>(density_.data(), density_.data() + density_.size());
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : atoms_) atoms.push_back({{"vertex", a.vertex}, {"weight", a.weight}});
    doc["atoms"] = atoms;
    switch (normalization_) {
        case Normalization::None: doc["normalization"] = "none"; break;
        case Normalization::UnitMass: doc["normalization"] = "unit_mass"; break;
        case Normalization::FirstEigenvalueTwo: doc["normalization"] = "lambda1_two"; break;
    }
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write measure file: " + path);
    out << doc.dump(1) << "\n";
}

MeasureOnMesh MeasureOnMesh::load(const SurfaceMesh& mesh, const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open measure file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail(ErrorCode::Io, std::string("malformed measure file: ") + e.what());
    }

    Eigen::VectorXd density = Eigen::VectorXd::Zero(mesh.vertex_count());
    if (doc.contains("density")) {
        const auto& jd = doc["density"];
        if (static_cast<int>(jd.size()) != mesh.vertex_count())
            fail(ErrorCode::InvalidInput, "measure density length does not match mesh vertex count");
        for (int i = 0; i < mesh.vertex_count(); ++i) density[i] = jd[i].get<double>();
    }

    std::vector<Atom> atoms;
    if (doc.contains("atoms")) {
        for (const auto& ja : doc["atoms"]) {
            Atom a;
            a.weight = ja.at("weight").get<double>();
            if (ja.contains("vertex")) {
                a.vertex = ja.at("vertex").get<int>();
            } else if (ja.contains("point")) {
                // Off-vertex atoms snap to the nearest mesh vertex.
                Eigen::Vector3d p = Eigen::Vector3d::Zero();
                const auto& jp = ja.at("point");
                for (int c = 0; c < static_cast<int>(jp.size()) && c < 3; ++c)
                    p[c] = jp[c].get<double>();
                a.vertex = mesh.nearest_vertex(p);
            } else {
                fail(ErrorCode::InvalidInput, "atom entries need a 'vertex' or 'point'");
            }
            atoms.push_back(a);
        }
    }

    Normalization norm = Normalization::None;
    const std::string n = doc.value("normalization", "none");
    if (n == "unit_mass")
        norm = Normalization::UnitMass;
    else if (n == "lambda1_two")
        norm = Normalization::FirstEigenvalueTwo;
    else if (n != "none")
        fail(ErrorCode::InvalidInput, "unknown measure normalization: " + n);

    MeasureOnMesh measure(mesh, std::move(density), std::move(atoms), norm);
    if (norm == Normalization::UnitMass) {
        const double mass = measure.total_mass(mesh);
        if (std::abs(mass - 1.0) > 1e-12) measure = measure.normalized_unit_mass(mesh);
    }
    return measure;
}

MeasureOnMesh cap_bump_measure(const SurfaceMesh& mesh, double eps)
{
    if (mesh.topology() != Topology::Sphere)
        fail(ErrorCode::UnsupportedTopology, "cap measures require a sphere mesh");
    if (!mesh.unit_area_sphere())
        fail(ErrorCode::InvalidInput, "cap measures are defined on the unit-area round sphere");
    const double max_radius = mesh.metric_scale() * std::acos(-1.0) / 2.0;
    if (!(eps > 0.0) || eps >= max_radius)
        fail(ErrorCode::InvalidInput, "cap radius must lie in (0, quarter-circumference)");

    const Eigen::Vector3d north(0, 0, 1), south(0, 0, -1);
    Eigen::VectorXd density = Eigen::VectorXd::Zero(mesh.vertex_count());
    const double weight = 1.0 / (eps * eps * std::log(1.0 / eps));
    int in_north = 0, in_south = 0;
    std::vector<double> dists(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const Eigen::Vector3d v = mesh.vertices().row(i);
        const double dn = mesh.geodesic_distance(v, north);
        const double ds = mesh.geodesic_distance(v, south);
        dists[i] = std::min(dn, ds);
        if (dn < eps) {
            density[i] = weight;
            ++in_north;
        } else if (ds < eps) {
            density[i] = weight;
            ++in_south;
        }
    }
    if (in_north < 16 || in_south < 16) {
        std::nth_element(dists.begin(), dists.begin() + 31, dists.end());
        const double min_eps = dists[31] * 1.0000001;
        fail(ErrorCode::Resolution,
             "cap radius " + std::to_string(eps) + " is below mesh resolution; minimum eps ~ " +
                 std::to_string(min_eps));
    }
    return MeasureOnMesh(mesh, std::move(density));
}

MeasureOnMesh cap_concentration_measure(const SurfaceMesh& mesh, double eps, double coupling)
{
    if (coupling < 0.0)
        fail(ErrorCode::InvalidInput, "coupling M must be nonnegative");
    if (coupling == 0.0) {
        Eigen::VectorXd density = Eigen::VectorXd::Ones(mesh.vertex_count());
        MeasureOnMesh uniform(mesh, std::move(density));
        return uniform.normalized_unit_mass(mesh);
    }
    const MeasureOnMesh nu = cap_bump_measure(mesh, eps);
    Eigen::VectorXd density = Eigen::VectorXd::Ones(mesh.vertex_count()) + coupling * nu.density();
    MeasureOnMesh combined(mesh, std::move(density));
    return combined.normalized_unit_mass(mesh);
}

}  // namespace specstab
