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
#include "surface_mesh.hpp"

#include <json.hpp>

#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

namespace specstab {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

}  // namespace

void LatticeSpec::validate() const
{
    if (!(d > 0.0))
        fail(ErrorCode::InvalidInput, "degenerate lattice: d must be positive, got d=" + std::to_string(d));
    if (c < 0.0 || c > 0.5)
        fail(ErrorCode::InvalidInput, "lattice parameter c must lie in [0, 1/2], got c=" + std::to_string(c));
}

bool LatticeSpec::rhombic_unit(double tol) const
{
    return std::abs(c * c + d * d - 1.0) <= tol;
}

int SurfaceMesh::euler_characteristic() const
{
    return vertex_count() - edge_count_ + triangle_count();
}

SurfaceMesh SurfaceMesh::build_icosphere(int subdivisions, bool unit_area)
{
    if (subdivisions < 0)
        fail(ErrorCode::InvalidInput, "icosphere subdivisions must be nonnegative");
    if (subdivisions > 9)
        fail(ErrorCode::Capacity, "icosphere subdivisions capped at 9, got " + std::to_string(subdivisions));

    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& v : verts) v.normalize();

    std::vector<Eigen::Vector3i> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

    for (auto& f : faces) {
        const Eigen::Vector3d n = (verts[f[1]] - verts[f[0]]).cross(verts[f[2]] - verts[f[0]]);
        if (n.dot(verts[f[0]]) < 0.0) std::swap(f[1], f[2]);
    }

    for (int level = 0; level < subdivisions; ++level) {
        std::unordered_map<std::uint64_t, int> midpoint;
        midpoint.reserve(faces.size() * 2);
        auto mid = [&](int a, int b) {
            const auto key = edge_key(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(verts.size());
            verts.push_back((verts[a] + verts[b]).normalized());
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Eigen::Vector3i> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    SurfaceMesh mesh;
    mesh.topology_ = Topology::Sphere;
    mesh.metric_scale_ = unit_area ? 1.0 / std::sqrt(4.0 * kPi) : 1.0;
    mesh.vertices_.resize(static_cast<int>(verts.size()), 3);
    for (int i = 0; i < static_cast<int>(verts.size()); ++i) mesh.vertices_.row(i) = verts[i];
    mesh.triangles_.resize(static_cast<int>(faces.size()), 3);
    for (int i = 0; i < static_cast<int>(faces.size()); ++i) mesh.triangles_.row(i) = faces[i];

    mesh.corners_.resize(faces.size());
    for (size_t t = 0; t < faces.size(); ++t)
        for (int c = 0; c < 3; ++c)
            mesh.corners_[t].row(c) = mesh.metric_scale_ * verts[faces[t][c]];

    mesh.finalize();
    return mesh;
}

SurfaceMesh SurfaceMesh::build_flat_torus(const LatticeSpec& lattice, int n)
{
    lattice.validate();
    if (n < 3)
        fail(ErrorCode::InvalidInput, "flat torus resolution must be >= 3, got n=" + std::to_string(n));
    if (n > 1024)
        fail(ErrorCode::Capacity, "flat torus resolution capped at 1024");

    SurfaceMesh mesh;
    mesh.topology_ = Topology::Torus;
    mesh.lattice_ = lattice;
    // Unit-area rescaling goes into the metric; (c, d) stay untouched.
    mesh.metric_scale_ = 1.0 / std::sqrt(lattice.cell_area());

    const double h = 1.0 / n;
    mesh.vertices_.resize(n * n, 3);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            mesh.vertices_.row(j * n + i) = Eigen::Vector3d(
                i * h + lattice.c * j * h, lattice.d * j * h, 0.0);

    auto vid = [n](int i, int j) { return ((j % n + n) % n) * n + ((i % n + n) % n); };
    auto coord = [&](int i, int j) {
        return Eigen::Vector3d(i * h + lattice.c * j * h, lattice.d * j * h, 0.0);
    };

    mesh.triangles_.resize(2 * n * n, 3);
    mesh.corners_.resize(2 * n * n);
    int t = 0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            // Cell split along the short diagonal B-C keeps equilateral
            // lattices exactly equilateral.
            mesh.triangles_.row(t) << vid(i, j), vid(i + 1, j), vid(i, j + 1);
            mesh.corners_[t].row(0) = mesh.metric_scale_ * coord(i, j);
            mesh.corners_[t].row(1) = mesh.metric_scale_ * coord(i + 1, j);
            mesh.corners_[t].row(2) = mesh.metric_scale_ * coord(i, j + 1);
            ++t;
            mesh.triangles_.row(t) << vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1);
            mesh.corners_[t].row(0) = mesh.metric_scale_ * coord(i + 1, j);
            mesh.corners_[t].row(1) = mesh.metric_scale_ * coord(i + 1, j + 1);
            mesh.corners_[t].row(2) = mesh.metric_scale_ * coord(i, j + 1);
            ++t;
        }
    }

    mesh.finalize();
    return mesh;
}

void SurfaceMesh::finalize()
{
    const int nf = triangle_count();
    tri_areas_.resize(nf);
    hat_grads_.resize(nf);
    vertex_areas_ = Eigen::VectorXd::Zero(vertex_count());
    vertex_tris_.assign(vertex_count(), {});
    total_area_ = 0.0;

    for (int t = 0; t < nf; ++t) {
        const Eigen::Vector3d p0 = corners_[t].row(0);
        const Eigen::Vector3d p1 = corners_[t].row(1);
        const Eigen::Vector3d p2 = corners_[t].row(2);
        const Eigen::Vector3d n = (p1 - p0).cross(p2 - p0);
        const double area = 0.5 * n.norm();
        if (!(area > 1e-14 * metric_scale_ * metric_scale_))
            fail(ErrorCode::InvalidInput, "degenerate triangle " + std::to_string(t));
        tri_areas_[t] = area;
        total_area_ += area;
        const Eigen::Vector3d nn = n / n.norm();
        hat_grads_[t].row(0) = nn.cross(p2 - p1) / (2.0 * area);
        hat_grads_[t].row(1) = nn.cross(p0 - p2) / (2.0 * area);
        hat_grads_[t].row(2) = nn.cross(p1 - p0) / (2.0 * area);
        for (int c = 0; c < 3; ++c) {
            vertex_areas_[triangles_(t, c)] += area / 3.0;
            vertex_tris_[triangles_(t, c)].push_back(t);
        }
    }

    validate_manifold();
}

void SurfaceMesh::validate_manifold()
{
    struct EdgeUse {
        int count = 0;
        int forward = 0;  // times traversed as (min, max)
        int tris[2] = {-1, -1};
        int slots[2] = {-1, -1};
    };
    std::unordered_map<std::uint64_t, EdgeUse> edges;
    edges.reserve(triangle_count() * 2);

    for (int t = 0; t < triangle_count(); ++t) {
        for (int c = 0; c < 3; ++c) {
            const int a = triangles_(t, c);
            const int b = triangles_(t, (c + 1) % 3);
            if (a == b)
                fail(ErrorCode::InvalidInput, "triangle " + std::to_string(t) + " repeats a vertex");
            auto& e = edges[edge_key(a, b)];
            if (e.count < 2) {
                e.tris[e.count] = t;
                e.slots[e.count] = c;
            }
            e.count++;
            if (a < b) e.forward++;
        }
    }

    tri_neighbors_ = Eigen::MatrixXi::Constant(triangle_count(), 3, -1);
    for (const auto& [key, e] : edges) {
        (void)key;
        if (e.count != 2)
            fail(ErrorCode::InvalidInput,
                 "mesh is not a closed surface: an edge is used " + std::to_string(e.count) + " times");
        if (e.forward != 1)
            fail(ErrorCode::InvalidInput, "inconsistent triangle orientation across a shared edge");
        tri_neighbors_(e.tris[0], e.slots[0]) = e.tris[1];
        tri_neighbors_(e.tris[1], e.slots[1]) = e.tris[0];
    }
    edge_count_ = static_cast<int>(edges.size());

    const int chi = euler_characteristic();
    const int expected = topology_ == Topology::Sphere ? 2 : 0;
    if (chi != expected)
        fail(ErrorCode::InvalidInput,
             "Euler characteristic " + std::to_string(chi) + " does not match topology");

    if (topology_ == Topology::Sphere) {
        for (int i = 0; i < vertex_count(); ++i)
            if (std::abs(vertices_.row(i).norm() - 1.0) > 1e-12)
                fail(ErrorCode::InvalidInput, "sphere vertex " + std::to_string(i) + " is not on the unit sphere");
    }
}

double SurfaceMesh::geodesic_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& y) const
{
    if (topology_ == Topology::Sphere) {
        const double angle = std::atan2(x.cross(y).norm(), x.dot(y));
        return metric_scale_ * angle;
    }
    const auto& lat = *lattice_;
    double best = std::numeric_limits<double>::infinity();
    for (int k = -1; k <= 1; ++k) {
        for (int l = -1; l <= 1; ++l) {
            const double dx = x[0] - y[0] + k + l * lat.c;
            const double dy = x[1] - y[1] + l * lat.d;
            best = std::min(best, dx * dx + dy * dy);
        }
    }
    return metric_scale_ * std::sqrt(best);
}

double SurfaceMesh::vertex_distance(int i, int j) const
{
    return geodesic_distance(vertices_.row(i), vertices_.row(j));
}

int SurfaceMesh::nearest_vertex(const Eigen::Vector3d& x) const
{
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    if (topology_ == Topology::Sphere) {
        for (int i = 0; i < vertex_count(); ++i) {
            const double d = (vertices_.row(i).transpose() - x).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
    } else {
        for (int i = 0; i < vertex_count(); ++i) {
            const double d = geodesic_distance(vertices_.row(i), x);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
    }
    return best;
}

SurfaceMesh::PointLocation SurfaceMesh::locate_on_sphere(const Eigen::Vector3d& x) const
{
    if (topology_ != Topology::Sphere)
        fail(ErrorCode::UnsupportedTopology, "point location requires a sphere mesh");

    const Eigen::Vector3d dir = x.normalized();

    // Greedy descent on the vertex graph gets near the closest vertex in
    // O(sqrt V); the BFS below absorbs any remaining slack.
    int seed = 0;
    double seed_d = (vertices_.row(0).transpose() - dir).squaredNorm();
    for (bool improved = true; improved;) {
        improved = false;
        for (const int t : vertex_tris_[seed]) {
            for (int c = 0; c < 3; ++c) {
                const int v = triangles_(t, c);
                const double d = (vertices_.row(v).transpose() - dir).squaredNorm();
                if (d < seed_d - 1e-300) {
                    seed_d = d;
                    seed = v;
                    improved = true;
                }
            }
        }
    }

    auto barycentric = [&](int t, Eigen::Vector3d& bary) {
        Eigen::Matrix3d A;
        for (int c = 0; c < 3; ++c) A.col(c) = vertices_.row(triangles_(t, c)).transpose();
        const Eigen::Vector3d w = A.partialPivLu().solve(dir);
        const double s = w.sum();
        if (std::abs(s) < 1e-300) return -1e9;
        bary = w / s;
        return bary.minCoeff();
    };

    // Walk outward from the star of the seed; the hat basis is continuous
    // so a marginally misclassified boundary point is harmless.
    std::deque<int> queue(vertex_tris_[seed].begin(), vertex_tris_[seed].end());
    std::unordered_set<int> seen(queue.begin(), queue.end());
    PointLocation best;
    double best_min = -std::numeric_limits<double>::infinity();
    int expansions = 0;
    while (!queue.empty() && expansions < 4096) {
        const int t = queue.front();
        queue.pop_front();
        ++expansions;
        Eigen::Vector3d bary;
        const double m = barycentric(t, bary);
        if (m > best_min) {
            best_min = m;
            best.tri = t;
            best.bary = bary;
            if (m >= -1e-12) return best;
        }
        for (int c = 0; c < 3; ++c) {
            const int nb = tri_neighbors_(t, c);
            if (nb >= 0 && seen.insert(nb).second) queue.push_back(nb);
        }
    }
    if (best.tri < 0)
        fail(ErrorCode::Numeric, "sphere point location failed");
    // Clamp to the closest triangle found; project weights to the simplex.
    for (int c = 0; c < 3; ++c) best.bary[c] = std::max(best.bary[c], 0.0);
    best.bary /= best.bary.sum();
    return best;
}

namespace {

nlohmann::json vertices_to_json(const SurfaceMesh& mesh)
{
    nlohmann::json verts = nlohmann::json::array();
    const bool torus = mesh.topology() == Topology::Torus;
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        if (torus)
            verts.push_back({mesh.vertices()(i, 0), mesh.vertices()(i, 1)});
        else
            verts.push_back({mesh.vertices()(i, 0), mesh.vertices()(i, 1), mesh.vertices()(i, 2)});
    }
    return verts;
}

}  // namespace

void SurfaceMesh::save(const std::string& path) const
{
    nlohmann::json doc;
    doc["topology"] = topology_ == Topology::Sphere ? "sphere" : "torus";
    if (lattice_) doc["lattice"] = {{"c", lattice_->c}, {"d", lattice_->d}};
    if (unit_area_sphere()) doc["unit_area"] = true;
    doc["vertices"] = vertices_to_json(*this);
    nlohmann::json tris = nlohmann::json::array();
    for (int t = 0; t < triangle_count(); ++t)
        tris.push_back({triangles_(t, 0), triangles_(t, 1), triangles_(t, 2)});
    doc["triangles"] = tris;

    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write mesh file: " + path);
    out << doc.dump(1) << "\n";
}

SurfaceMesh SurfaceMesh::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open mesh file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail(ErrorCode::Io, std::string("malformed mesh file: ") + e.what());
    }

    SurfaceMesh mesh;
    const std::string topo = doc.value("topology", "");
    if (topo == "sphere") {
        mesh.topology_ = Topology::Sphere;
        mesh.metric_scale_ = doc.value("unit_area", false) ? 1.0 / std::sqrt(4.0 * kPi) : 1.0;
    } else if (topo == "torus") {
        mesh.topology_ = Topology::Torus;
        if (!doc.contains("lattice"))
            fail(ErrorCode::InvalidInput, "torus mesh file must carry a lattice");
        LatticeSpec lat{doc["lattice"].value("c", 0.0), doc["lattice"].value("d", 0.0)};
        lat.validate();
        mesh.lattice_ = lat;
        mesh.metric_scale_ = 1.0 / std::sqrt(lat.cell_area());
    } else {
        fail(ErrorCode::InvalidInput, "mesh topology must be 'sphere' or 'torus'");
    }

    const auto& jv = doc.at("vertices");
    const auto& jt = doc.at("triangles");
    mesh.vertices_ = Eigen::MatrixXd::Zero(static_cast<int>(jv.size()), 3);
    for (int i = 0; i < static_cast<int>(jv.size()); ++i) {
        const auto& row = jv[i];
        if (row.size() < 2 || row.size() > 3)
            fail(ErrorCode::InvalidInput, "vertex rows must have 2 or 3 coordinates");
        for (int c = 0; c < static_cast<int>(row.size()); ++c)
            mesh.vertices_(i, c) = row[c].get<double>();
    }
    mesh.triangles_.resize(static_cast<int>(jt.size()), 3);
    for (int t = 0; t < static_cast<int>(jt.size()); ++t) {
        for (int c = 0; c < 3; ++c) {
            const int idx = jt[t][c].get<int>();
            if (idx < 0 || idx >= mesh.vertex_count())
                fail(ErrorCode::InvalidInput, "triangle index out of range");
            mesh.triangles_(t, c) = idx;
        }
    }

    mesh.corners_.resize(mesh.triangle_count());
    if (mesh.topology_ == Topology::Sphere) {
        for (int t = 0; t < mesh.triangle_count(); ++t)
            for (int c = 0; c < 3; ++c)
                mesh.corners_[t].row(c) = mesh.metric_scale_ * mesh.vertices_.row(mesh.triangles_(t, c));
    } else {
        // Unwrap each triangle by the minimal lattice image of its corners
        // relative to corner 0, so periodic triangles get consistent
        // coordinates.
        const auto& lat = *mesh.lattice_;
        const double diam = 0.5 * std::min(1.0, std::hypot(lat.c, lat.d));
        for (int t = 0; t < mesh.triangle_count(); ++t) {
            const Eigen::Vector3d p0 = mesh.vertices_.row(mesh.triangles_(t, 0));
            mesh.corners_[t].row(0) = mesh.metric_scale_ * p0;
            for (int c = 1; c < 3; ++c) {
                const Eigen::Vector3d p = mesh.vertices_.row(mesh.triangles_(t, c));
                double best = std::numeric_limits<double>::infinity();
                Eigen::Vector3d rep = p;
                for (int k = -1; k <= 1; ++k) {
                    for (int l = -1; l <= 1; ++l) {
                        Eigen::Vector3d q = p + Eigen::Vector3d(k + l * lat.c, l * lat.d, 0.0);
                        const double d2 = (q - p0).squaredNorm();
                        if (d2 < best) {
                            best = d2;
                            rep = q;
                        }
                    }
                }
                if (std::sqrt(best) > diam)
                    fail(ErrorCode::InvalidInput, "torus triangle spans more than half the lattice cell");
                mesh.corners_[t].row(c) = mesh.metric_scale_ * rep;
            }
        }
    }

    mesh.finalize();
    return mesh;
}

}  // namespace specstab
