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
#include "harmonic_maps.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>

#include "numerics.hpp"
#include "quadrature.hpp"

namespace specstab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_lattice(const SurfaceMesh& mesh, const LatticeSpec& lattice)
{
    if (mesh.topology() != Topology::Torus || !mesh.lattice())
        fail(ErrorCode::InvalidInput, "torus eigenmaps require a flat-torus mesh");
    if (std::abs(mesh.lattice()->c - lattice.c) > 1e-12 ||
        std::abs(mesh.lattice()->d - lattice.d) > 1e-12)
        fail(ErrorCode::InvalidInput, "mesh lattice does not match the requested eigenmap");
}

double gram_area(const Eigen::VectorXd& f0, const Eigen::VectorXd& f1, const Eigen::VectorXd& f2)
{
    const Eigen::VectorXd e1 = f1 - f0;
    const Eigen::VectorXd e2 = f2 - f0;
    const double g11 = e1.squaredNorm();
    const double g22 = e2.squaredNorm();
    const double g12 = e1.dot(e2);
    return 0.5 * std::sqrt(std::max(g11 * g22 - g12 * g12, 0.0));
}

Eigen::VectorXd map_value_at(const SurfaceMesh& mesh, const SphereValuedMap& map,
                             const Eigen::Vector3d& ref,
                             const Eigen::VectorXd& fallback)
{
    if (map.analytic) {
        Eigen::Vector3d p = ref;
        if (mesh.topology() == Topology::Sphere) p.normalize();
        return map.analytic(p);
    }
    return fallback;
}

}  // namespace

SphereValuedMap torus_eigenmap(const LatticeSpec& lattice, const SurfaceMesh& mesh)
{
    require_lattice(mesh, lattice);
    const double c = lattice.c, d = lattice.d;
    auto eval = [c, d](const Eigen::Vector3d& p) -> Eigen::VectorXd {
        const double x = p[0], y = p[1];
        const double t1 = 2.0 * kPi * y / d;
        const double t2 = 2.0 * kPi * (c / d * y - x);
        Eigen::VectorXd v(4);
        v << std::sin(t1), std::cos(t1), std::sin(t2), std::cos(t2);
        return v / std::sqrt(2.0);
    };
    SphereValuedMap map;
    map.values.resize(mesh.vertex_count(), 4);
    for (int i = 0; i < mesh.vertex_count(); ++i)
        map.values.row(i) = eval(mesh.vertices().row(i)).transpose();
    map.analytic = eval;
    map.analytic_tag = "torus_eigenmap";
    return map;
}

double torus_eigenmap_eigenvalue(const LatticeSpec& lattice)
{
    // flat eigenvalue 4π²/d² rescaled to the unit-area metric
    return 4.0 * kPi * kPi / lattice.d;
}

SphereValuedMap equilateral_s5_map(const SurfaceMesh& mesh)
{
    const LatticeSpec equilateral{0.5, std::sqrt(3.0) / 2.0};
    require_lattice(mesh, equilateral);
    auto eval = [](const Eigen::Vector3d& p) -> Eigen::VectorXd {
        const double x = p[0], y = p[1];
        const double s3 = std::sqrt(3.0);
        const double t1 = 2.0 * kPi * (x - y / s3);
        const double t2 = 4.0 * kPi * y / s3;
        const double t3 = 2.0 * kPi * (x + y / s3);
        Eigen::VectorXd v(6);
        v << std::cos(t1), std::sin(t1), std::cos(t2), std::sin(t2), std::cos(t3), std::sin(t3);
        return v / std::sqrt(3.0);
    };
    SphereValuedMap map;
    map.values.resize(mesh.vertex_count(), 6);
    for (int i = 0; i < mesh.vertex_count(); ++i)
        map.values.row(i) = eval(mesh.vertices().row(i)).transpose();
    map.analytic = eval;
    map.analytic_tag = "equilateral_s5";
    return map;
}

SphereValuedMap sphere_identity_map(const SurfaceMesh& mesh)
{
    if (mesh.topology() != Topology::Sphere)
        fail(ErrorCode::InvalidInput, "identity map requires a sphere mesh");
    SphereValuedMap map;
    map.values = mesh.vertices();
    map.analytic = [](const Eigen::Vector3d& p) -> Eigen::VectorXd { return p.normalized(); };
    map.analytic_tag = "sphere_identity";
    return map;
}

double tension_residual(const SurfaceMesh& mesh, const SphereValuedMap& u,
                        const MeasureOnMesh& mu, double lambda)
{
    if (u.values.rows() != mesh.vertex_count())
        fail(ErrorCode::InvalidInput, "map does not match mesh");
    const SparseOperator stiffness = assemble_stiffness(mesh);
    const SparseOperator mass = assemble_mass(mesh, mu);
    double acc = 0.0;
    for (int c = 0; c < u.values.cols(); ++c) {
        const Eigen::VectorXd r = stiffness * u.values.col(c) - lambda * (mass * u.values.col(c));
        const double s = dual_gradient_seminorm(stiffness, r);
        acc += s * s;
    }
    return std::sqrt(acc);
}

Eigen::MatrixXd conservation_residual(const SurfaceMesh& mesh, const SphereValuedMap& u)
{
    if (u.values.rows() != mesh.vertex_count())
        fail(ErrorCode::InvalidInput, "map does not match mesh");
    const int dim = static_cast<int>(u.values.cols());
    const SparseOperator stiffness = assemble_stiffness(mesh);
    const auto& tri = mesh.triangles();

    Eigen::MatrixXd residuals = Eigen::MatrixXd::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) {
        for (int b = a + 1; b < dim; ++b) {
            Eigen::VectorXd functional = Eigen::VectorXd::Zero(mesh.vertex_count());
            for (int t = 0; t < mesh.triangle_count(); ++t) {
                const Eigen::Matrix3d& grads = mesh.hat_gradients(t);
                Eigen::Vector3d ga = Eigen::Vector3d::Zero(), gb = Eigen::Vector3d::Zero();
                double ua = 0.0, ub = 0.0;
                for (int k = 0; k < 3; ++k) {
                    const int v = tri(t, k);
                    ga += u.values(v, a) * grads.row(k).transpose();
                    gb += u.values(v, b) * grads.row(k).transpose();
                    ua += u.values(v, a) / 3.0;
                    ub += u.values(v, b) / 3.0;
                }
                const Eigen::Vector3d alpha = ua * gb - ub * ga;
                const double area = mesh.triangle_areas()[t];
                for (int k = 0; k < 3; ++k)
                    functional[tri(t, k)] += area * alpha.dot(grads.row(k).transpose());
            }
            const double r = dual_gradient_seminorm(stiffness, functional);
            residuals(a, b) = r;
            residuals(b, a) = r;
        }
    }
    return residuals;
}

double jacobi_form(const SurfaceMesh& mesh, const SphereValuedMap& u,
                   const VectorField& v, const VectorField& w, bool* projected)
{
    if (v.rows() != mesh.vertex_count() || w.rows() != mesh.vertex_count() ||
        v.cols() != u.values.cols() || w.cols() != u.values.cols())
        fail(ErrorCode::InvalidInput, "jacobi form fields do not match the map");

    auto orthogonalize = [&](VectorField f) {
        bool changed = false;
        for (int i = 0; i < f.rows(); ++i) {
            const double dot = f.row(i).dot(u.values.row(i));
            if (std::abs(dot) > 1e-8) {
                f.row(i) -= dot * u.values.row(i);
                changed = true;
            }
        }
        if (changed && projected) *projected = true;
        return f;
    };
    if (projected) *projected = false;
    const VectorField vp = orthogonalize(v);
    const VectorField wp = orthogonalize(w);

    const SparseOperator stiffness = assemble_stiffness(mesh);
    const SparseOperator weighted =
        assemble_mass_triangle_weights(mesh, map_energy_density(mesh, u.values));
    double value = 0.0;
    for (int c = 0; c < vp.cols(); ++c)
        value += vp.col(c).dot(stiffness * wp.col(c)) - vp.col(c).dot(weighted * wp.col(c));
    return value;
}

namespace {

/// Flat reference corners of a triangle (metric scaling removed).
Eigen::Matrix3d reference_corners(const SurfaceMesh& mesh, int t)
{
    return mesh.corner_positions(t) / mesh.metric_scale();
}

}  // namespace

double jacobi_form_quadrature(const SurfaceMesh& mesh,
                              const std::function<double(const Eigen::Vector3d&)>& du_sq,
                              const AnalyticField& v, const AnalyticField& w)
{
    if (mesh.topology() != Topology::Torus)
        fail(ErrorCode::UnsupportedTopology,
             "closed-form jacobi quadrature is implemented for flat tori");
    const auto& rule = tri_quadrature_deg5();
    double acc = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const Eigen::Matrix3d corners = reference_corners(mesh, t);
        const double flat_area =
            0.5 * ((corners.row(1) - corners.row(0)).head<2>().x() *
                       (corners.row(2) - corners.row(0)).head<2>().y() -
                   (corners.row(1) - corners.row(0)).head<2>().y() *
                       (corners.row(2) - corners.row(0)).head<2>().x());
        const double area = std::abs(flat_area);
        for (const auto& q : rule) {
            const Eigen::Vector3d p = q.b0 * corners.row(0).transpose() +
                                      q.b1 * corners.row(1).transpose() +
                                      q.b2 * corners.row(2).transpose();
            // conformal invariance: flat gradients against the flat area
            const Eigen::MatrixXd gv = v.gradient(p);
            const Eigen::MatrixXd gw = w.gradient(p);
            const double grad_term = (gv.leftCols<2>().cwiseProduct(gw.leftCols<2>())).sum();
            const double mass_term = du_sq(p) * v.value(p).dot(w.value(p));
            acc += q.w * area * (grad_term - mass_term);
        }
    }
    return acc;
}

double jacobi_residual_form_norm(const SurfaceMesh& mesh,
                                 const std::function<double(const Eigen::Vector3d&)>& du_sq,
                                 const AnalyticField& v)
{
    if (mesh.topology() != Topology::Torus)
        fail(ErrorCode::UnsupportedTopology,
             "closed-form jacobi quadrature is implemented for flat tori");
    const auto& rule = tri_quadrature_deg5();
    const int dim = v.dim;
    Eigen::MatrixXd functional = Eigen::MatrixXd::Zero(mesh.vertex_count(), dim);

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const Eigen::Matrix3d corners = reference_corners(mesh, t);
        const Eigen::Vector3d e1 = corners.row(1) - corners.row(0);
        const Eigen::Vector3d e2 = corners.row(2) - corners.row(0);
        const double area = 0.5 * std::abs(e1.x() * e2.y() - e1.y() * e2.x());
        // flat hat gradients
        Eigen::Matrix<double, 3, 2> hat;
        const Eigen::Vector2d p0 = corners.row(0).head<2>(), p1 = corners.row(1).head<2>(),
                              p2 = corners.row(2).head<2>();
        const auto perp = [](const Eigen::Vector2d& e) { return Eigen::Vector2d(-e.y(), e.x()); };
        const double twice = 2.0 * area;
        const double orient = ((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x()) > 0
                                  ? 1.0 : -1.0;
        hat.row(0) = orient * perp(p2 - p1).transpose() / twice;
        hat.row(1) = orient * perp(p0 - p2).transpose() / twice;
        hat.row(2) = orient * perp(p1 - p0).transpose() / twice;

        for (const auto& q : rule) {
            const double bary[3] = {q.b0, q.b1, q.b2};
            const Eigen::Vector3d p = q.b0 * corners.row(0).transpose() +
                                      q.b1 * corners.row(1).transpose() +
                                      q.b2 * corners.row(2).transpose();
            const Eigen::VectorXd val = v.value(p);
            const Eigen::MatrixXd grad = v.gradient(p);
            const double weight = du_sq(p);
            for (int k = 0; k < 3; ++k) {
                const int vert = mesh.triangles()(t, k);
                for (int c = 0; c < dim; ++c) {
                    const double grad_term = grad.row(c).head<2>().dot(hat.row(k));
                    const double mass_term = weight * val[c] * bary[k];
                    functional(vert, c) += q.w * area * (grad_term - mass_term);
                }
            }
        }
    }

    const SparseOperator stiffness = assemble_stiffness(mesh);
    const SparseOperator background = assemble_background_mass(mesh);
    Eigen::SimplicialLDLT<SparseOperator> solver(stiffness + background);
    double acc = 0.0;
    for (int c = 0; c < dim; ++c) {
        const Eigen::VectorXd r = functional.col(c);
        acc += r.dot(solver.solve(r));
    }
    return std::sqrt(std::max(acc, 0.0));
}

double map_area(const SurfaceMesh& mesh, const SphereValuedMap& map)
{
    double area = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles();
        area += gram_area(map.values.row(tri(t, 0)), map.values.row(tri(t, 1)),
                          map.values.row(tri(t, 2)));
    }
    return area;
}

double mean_curvature_sup(const SurfaceMesh& mesh, const SphereValuedMap& map)
{
    const int nv = mesh.vertex_count();
    const int dim = static_cast<int>(map.values.cols());
    Eigen::MatrixXd laplace = Eigen::MatrixXd::Zero(nv, dim);
    Eigen::VectorXd induced_area = Eigen::VectorXd::Zero(nv);
    const auto& tri = mesh.triangles();

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const int i0 = tri(t, 0), i1 = tri(t, 1), i2 = tri(t, 2);
        const double area = gram_area(map.values.row(i0), map.values.row(i1), map.values.row(i2));
        if (!(area > 1e-14))
            fail(ErrorCode::InvalidInput, "map is not an immersion: induced triangle " +
                                              std::to_string(t) + " is degenerate");
        const double l01 = (map.values.row(i0) - map.values.row(i1)).squaredNorm();
        const double l12 = (map.values.row(i1) - map.values.row(i2)).squaredNorm();
        const double l20 = (map.values.row(i2) - map.values.row(i0)).squaredNorm();
        // cot at corner opposite to each edge, from squared lengths
        const double cot0 = (l01 + l20 - l12) / (4.0 * area);  // at corner 0, opposite edge 1-2
        const double cot1 = (l01 + l12 - l20) / (4.0 * area);  // at corner 1, opposite edge 2-0
        const double cot2 = (l12 + l20 - l01) / (4.0 * area);  // at corner 2, opposite edge 0-1
        const auto add_edge = [&](int a, int b, double w) {
            laplace.row(a) += 0.5 * w * (map.values.row(a) - map.values.row(b));
            laplace.row(b) += 0.5 * w * (map.values.row(b) - map.values.row(a));
        };
        add_edge(i1, i2, cot0);
        add_edge(i2, i0, cot1);
        add_edge(i0, i1, cot2);
        // mixed Voronoi corner areas
        if (cot0 <= 0.0 || cot1 <= 0.0 || cot2 <= 0.0) {
            induced_area[i0] += cot0 <= 0.0 ? area / 2.0 : area / 4.0;
            induced_area[i1] += cot1 <= 0.0 ? area / 2.0 : area / 4.0;
            induced_area[i2] += cot2 <= 0.0 ? area / 2.0 : area / 4.0;
        } else {
            induced_area[i0] += (l01 * cot2 + l20 * cot1) / 8.0;
            induced_area[i1] += (l01 * cot2 + l12 * cot0) / 8.0;
            induced_area[i2] += (l12 * cot0 + l20 * cot1) / 8.0;
        }
    }

    double sup = 0.0;
    for (int i = 0; i < nv; ++i)
        sup = std::max(sup, laplace.row(i).norm() / induced_area[i]);
    return sup;
}

namespace {

struct SublevelIntegrator {
    const SurfaceMesh& mesh;
    const SphereValuedMap& map;
    const Eigen::VectorXd& y;
    double radius;
    int max_depth;

    double recurse(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Eigen::Vector3d& p2,
                   const Eigen::VectorXd& f0, const Eigen::VectorXd& f1, const Eigen::VectorXd& f2,
                   int depth) const
    {
        const double d0 = (f0 - y).norm();
        const double d1 = (f1 - y).norm();
        const double d2 = (f2 - y).norm();
        const double diam = std::max({(f0 - f1).norm(), (f1 - f2).norm(), (f2 - f0).norm()});
        const double area = gram_area(f0, f1, f2);
        if (std::max({d0, d1, d2}) + 1.5 * diam < radius) return area;
        if (std::min({d0, d1, d2}) - 1.5 * diam > radius) return 0.0;
        if (depth >= max_depth) {
            const Eigen::VectorXd centroid = (f0 + f1 + f2) / 3.0;
            return (centroid - y).norm() < radius ? area : 0.0;
        }
        const auto midref = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
            Eigen::Vector3d m = 0.5 * (a + b);
            if (mesh.topology() == Topology::Sphere) m.normalize();
            return m;
        };
        const Eigen::Vector3d m01 = midref(p0, p1), m12 = midref(p1, p2), m20 = midref(p2, p0);
        const auto value = [&](const Eigen::Vector3d& ref, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b) {
            return map_value_at(mesh, map, ref, 0.5 * (a + b));
        };
        const Eigen::VectorXd g01 = value(m01, f0, f1);
        const Eigen::VectorXd g12 = value(m12, f1, f2);
        const Eigen::VectorXd g20 = value(m20, f2, f0);
        return recurse(p0, m01, m20, f0, g01, g20, depth + 1) +
               recurse(p1, m12, m01, f1, g12, g01, depth + 1) +
               recurse(p2, m20, m12, f2, g20, g12, depth + 1) +
               recurse(m01, m12, m20, g01, g12, g20, depth + 1);
    }
};

}  // namespace

double area_density(const SurfaceMesh& mesh, const SphereValuedMap& map,
                    const Eigen::VectorXd& y, double r, int depth)
{
    if (!(r > 0.0)) fail(ErrorCode::InvalidInput, "area density radius must be positive");
    if (y.size() != map.values.cols())
        fail(ErrorCode::InvalidInput, "query point dimension does not match the map target");

    const SublevelIntegrator integrator{mesh, map, y, r, depth};
    double area = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles();
        const Eigen::Matrix3d corners = reference_corners(mesh, t);
        area += integrator.recurse(corners.row(0), corners.row(1), corners.row(2),
                                   map.values.row(tri(t, 0)), map.values.row(tri(t, 1)),
                                   map.values.row(tri(t, 2)), 0);
    }
    return area / (r * r);
}

namespace {

struct WeightedAreaIntegrator {
    const SurfaceMesh& mesh;
    const SphereValuedMap& map;
    Eigen::VectorXd a;
    int max_depth;

    double weight(const Eigen::VectorXd& f) const
    {
        const double ratio = (1.0 - a.squaredNorm()) / (f + a).squaredNorm();
        return ratio * ratio;
    }

    double recurse(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Eigen::Vector3d& p2,
                   const Eigen::VectorXd& f0, const Eigen::VectorXd& f1, const Eigen::VectorXd& f2,
                   int depth) const
    {
        const double w0 = weight(f0), w1 = weight(f1), w2 = weight(f2);
        const double wmax = std::max({w0, w1, w2});
        const double wmin = std::min({w0, w1, w2});
        const double area = gram_area(f0, f1, f2);
        if (depth >= max_depth || wmax <= 1.2 * wmin || wmax * area < 1e-14)
            return area * (w0 + w1 + w2) / 3.0;
        const auto midref = [&](const Eigen::Vector3d& x, const Eigen::Vector3d& yv) {
            Eigen::Vector3d m = 0.5 * (x + yv);
            if (mesh.topology() == Topology::Sphere) m.normalize();
            return m;
        };
        const Eigen::Vector3d m01 = midref(p0, p1), m12 = midref(p1, p2), m20 = midref(p2, p0);
        const auto value = [&](const Eigen::Vector3d& ref, const Eigen::VectorXd& va,
                               const Eigen::VectorXd& vb) {
            return map_value_at(mesh, map, ref, 0.5 * (va + vb));
        };
        const Eigen::VectorXd g01 = value(m01, f0, f1);
        const Eigen::VectorXd g12 = value(m12, f1, f2);
        const Eigen::VectorXd g20 = value(m20, f2, f0);
        return recurse(p0, m01, m20, f0, g01, g20, depth + 1) +
               recurse(p1, m12, m01, f1, g12, g01, depth + 1) +
               recurse(p2, m20, m12, f2, g20, g12, depth + 1) +
               recurse(m01, m12, m20, g01, g12, g20, depth + 1);
    }
};

}  // namespace

MoebiusAreaLimit moebius_area_limit(const SurfaceMesh& mesh, const SphereValuedMap& map,
                                    const Eigen::VectorXd& alpha,
                                    const std::vector<double>& t_grid, int depth)
{
    if (std::abs(alpha.norm() - 1.0) > 1e-10)
        fail(ErrorCode::InvalidInput, "Moebius limit direction must be a unit vector");
    if (t_grid.size() < 2) fail(ErrorCode::InvalidInput, "need at least two t samples");

    const double h_sup = mean_curvature_sup(mesh, map);
    const double total_area = map_area(mesh, map);
    const Eigen::VectorXd target = -alpha;  // Θ is evaluated at -α

    // Θ(-α, 0) by quadratic Richardson from two small radii.
    const double r_big = 0.25, r_small = 0.125;
    const double theta_big = area_density(mesh, map, target, r_big, depth + 3);
    const double theta_small = area_density(mesh, map, target, r_small, depth + 3);
    const double theta0 = (r_big * r_big * theta_small - r_small * r_small * theta_big) /
                          (r_big * r_big - r_small * r_small);

    MoebiusAreaLimit out;
    out.four_theta = 4.0 * theta0;

    Eigen::VectorXd s_values(t_grid.size()), areas(t_grid.size());
    for (size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        if (!(t > 0.0) || !(t < 1.0)) fail(ErrorCode::InvalidInput, "t grid must lie in (0,1)");
        WeightedAreaIntegrator integrator{mesh, map, t * alpha, depth + 10};
        double area = 0.0;
        for (int tr = 0; tr < mesh.triangle_count(); ++tr) {
            const auto& tri = mesh.triangles();
            const Eigen::Matrix3d corners = reference_corners(mesh, tr);
            area += integrator.recurse(corners.row(0), corners.row(1), corners.row(2),
                                       map.values.row(tri(tr, 0)), map.values.row(tri(tr, 1)),
                                       map.values.row(tri(tr, 2)), 0);
        }

        const double delta = std::cbrt(1.0 - t);
        const double theta_delta = area_density(mesh, map, target, delta, depth + 2);
        const double tail = (delta * delta / (t * t)) * total_area;
        const double low_main = 1.0 / (2.0 * t * (1.0 - t) * (1.0 - t)) - 1.0 / (t * t * delta * delta);
        const double one_m_t2 = (1.0 - t * t);
        MoebiusAreaSample sample;
        sample.t = t;
        sample.area = area;
        sample.bracket_low =
            2.0 * one_m_t2 * one_m_t2 * std::exp(-h_sup * delta) * theta0 * std::max(low_main, 0.0) -
            (4.0 + delta * delta * std::exp(2.0 * h_sup)) * tail;
        sample.bracket_high = (1.0 + t) * (1.0 + t) / t * std::exp(h_sup * delta) * theta_delta +
                              4.0 * (1.0 + delta * delta * std::exp(2.0 * h_sup)) * tail;
        out.samples.push_back(sample);
        s_values[i] = 1.0 - t;
        areas[i] = area;
    }

    out.extrapolated = neville_extrapolate_to_zero(s_values, areas);
    const double spread = std::abs(areas[areas.size() - 1] - areas[0]);
    out.conclusive = std::isfinite(out.extrapolated) &&
                     std::abs(out.extrapolated - areas[areas.size() - 1]) <= std::max(spread, 0.2 * std::abs(areas[areas.size() - 1]));
    return out;
}

}  // namespace specstab
