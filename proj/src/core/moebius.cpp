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
#include "moebius.hpp"

#include <cmath>
#include <numbers>

#include "numerics.hpp"

namespace specstab {

namespace {
constexpr double kPi = std::numbers::pi;
}

MoebiusParam::MoebiusParam(Eigen::VectorXd param) : a(std::move(param))
{
    if (a.size() < 3)
        fail(ErrorCode::InvalidInput, "Moebius parameter needs an ambient dimension of at least 3");
    if (!(a.norm() < 1.0))
        fail(ErrorCode::InvalidInput, "Moebius parameter must lie in the open unit ball");
}

MoebiusParam MoebiusParam::identity(int ambient_dim)
{
    return MoebiusParam(Eigen::VectorXd::Zero(ambient_dim));
}

MoebiusParam MoebiusParam::inverse() const
{
    return MoebiusParam(-a);
}

Eigen::VectorXd apply_moebius(const MoebiusParam& param, const Eigen::VectorXd& x)
{
    if (x.size() != param.a.size())
        fail(ErrorCode::InvalidInput, "Moebius parameter and point dimensions differ");
    if (std::abs(x.squaredNorm() - 1.0) > 2.1e-10)
        fail(ErrorCode::InvalidInput, "Moebius map arguments must lie on the unit sphere");
    const Eigen::VectorXd xa = x + param.a;
    const double denom = xa.squaredNorm();
    return ((1.0 - param.a.squaredNorm()) / denom) * xa + param.a;
}

double moebius_conformal_factor(const MoebiusParam& param, const Eigen::VectorXd& x)
{
    const double denom = (x + param.a).squaredNorm();
    return (1.0 - param.a.squaredNorm()) / denom;
}

SphereValuedMap compose_moebius(const MoebiusParam& param, const SphereValuedMap& u)
{
    SphereValuedMap out;
    out.values.resizeLike(u.values);
    for (int i = 0; i < u.values.rows(); ++i)
        out.values.row(i) = apply_moebius(param, u.values.row(i).transpose()).transpose();
    if (u.analytic) {
        const auto inner = u.analytic;
        out.analytic = [param, inner](const Eigen::Vector3d& p) {
            return apply_moebius(param, inner(p));
        };
    }
    return out;
}

double pair_with_pushforward(const SurfaceMesh& mesh, const MeasureOnMesh& mu,
                             const MoebiusParam& phi, const FEFunction& f)
{
    if (mesh.topology() != Topology::Sphere)
        fail(ErrorCode::UnsupportedTopology, "pushforward pairing requires a sphere mesh");
    if (f.size() != mesh.vertex_count())
        fail(ErrorCode::InvalidInput, "function does not match mesh");
    const Eigen::VectorXd w = mu.pairing_vector(mesh);
    double acc = 0.0;
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        if (w[i] == 0.0) continue;
        const Eigen::VectorXd y = apply_moebius(phi, mesh.vertices().row(i).transpose());
        const auto loc = mesh.locate_on_sphere(y.head<3>());
        double fv = 0.0;
        for (int c = 0; c < 3; ++c) fv += loc.bary[c] * f[mesh.triangles()(loc.tri, c)];
        acc += w[i] * fv;
    }
    return acc;
}

Eigen::VectorXd pushforward_pairing_vector(const SurfaceMesh& mesh, const MeasureOnMesh& mu,
                                           const MoebiusParam& phi)
{
    if (mesh.topology() != Topology::Sphere)
        fail(ErrorCode::UnsupportedTopology, "pushforward pairing requires a sphere mesh");
    const Eigen::VectorXd w = mu.pairing_vector(mesh);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        if (w[i] == 0.0) continue;
        const Eigen::VectorXd y = apply_moebius(phi, mesh.vertices().row(i).transpose());
        const auto loc = mesh.locate_on_sphere(y.head<3>());
        for (int c = 0; c < 3; ++c) out[mesh.triangles()(loc.tri, c)] += w[i] * loc.bary[c];
    }
    return out;
}

MeasureOnMesh pushforward_resample(const SurfaceMesh& mesh, const MeasureOnMesh& mu,
                                   const MoebiusParam& phi)
{
    const Eigen::VectorXd m = pushforward_pairing_vector(mesh, mu, phi);
    std::vector<Atom> atoms;
    atoms.reserve(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i)
        if (m[i] > 0.0) atoms.push_back({i, m[i]});
    return MeasureOnMesh(mesh, Eigen::VectorXd::Zero(mesh.vertex_count()), std::move(atoms));
}

BalanceResult hersch_balance(const SurfaceMesh& mesh, const MeasureOnMesh& mu,
                             const BalanceOptions& options)
{
    if (mesh.topology() != Topology::Sphere)
        fail(ErrorCode::UnsupportedTopology, "Hersch balancing requires a sphere mesh");
    const Eigen::VectorXd w = mu.pairing_vector(mesh);
    const double mass = w.sum();
    if (!(mass > 0.0)) fail(ErrorCode::InvalidInput, "measure has no mass");
    if (w.maxCoeff() >= mass * (1.0 - 1e-12))
        fail(ErrorCode::BalanceFailure,
             "degenerate measure: all mass at one vertex, balancing point escapes to the boundary");

    auto F = [&](const Eigen::Vector3d& a) {
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        const double one_m = 1.0 - a.squaredNorm();
        for (int i = 0; i < mesh.vertex_count(); ++i) {
            if (w[i] == 0.0) continue;
            const Eigen::Vector3d xa = mesh.vertices().row(i).transpose() + a;
            acc += w[i] * ((one_m / xa.squaredNorm()) * xa + a);
        }
        return Eigen::Vector3d(acc / mass);
    };

    auto clamp_ball = [](Eigen::Vector3d a) {
        const double n = a.norm();
        if (n >= 1.0 - 1e-9) a *= (1.0 - 1e-9) / n;
        return a;
    };

    const Eigen::Vector3d f0 = F(Eigen::Vector3d::Zero());
    std::vector<Eigen::Vector3d> starts = {Eigen::Vector3d::Zero()};
    if (f0.norm() > 0) {
        const Eigen::Vector3d ray = -f0.normalized();
        for (const double t : {0.2, 0.5, 0.8, 0.95}) starts.push_back(t * ray);
    }

    int total_iterations = 0;
    double best_residual = std::numeric_limits<double>::infinity();
    Eigen::Vector3d best_a = Eigen::Vector3d::Zero();

    for (const auto& start : starts) {
        Eigen::Vector3d a = start;
        Eigen::Vector3d r = F(a);
        while (total_iterations < options.max_iterations) {
            if (r.norm() <= options.tol) break;
            ++total_iterations;
            Eigen::Matrix3d jac;
            const double h = 1e-7;
            for (int k = 0; k < 3; ++k) {
                Eigen::Vector3d ap = clamp_ball(a + h * Eigen::Vector3d::Unit(k));
                Eigen::Vector3d am = clamp_ball(a - h * Eigen::Vector3d::Unit(k));
                jac.col(k) = (F(ap) - F(am)) / (ap[k] - am[k]);
            }
            Eigen::Vector3d step = jac.partialPivLu().solve(-r);
            if (!step.allFinite()) break;
            if (step.norm() > 0.2) step *= 0.2 / step.norm();  // step cap in ball coordinates
            bool improved = false;
            for (int bt = 0; bt < 15; ++bt) {
                const Eigen::Vector3d cand = clamp_ball(a + step);
                const Eigen::Vector3d rc = F(cand);
                if (rc.norm() < r.norm()) {
                    a = cand;
                    r = rc;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!improved) break;
        }
        if (r.norm() < best_residual) {
            best_residual = r.norm();
            best_a = a;
        }
        if (best_residual <= options.tol) break;
    }

    if (best_residual > options.tol)
        fail(ErrorCode::BalanceFailure,
             "Hersch balancing did not converge; best residual " + std::to_string(best_residual));
    return {MoebiusParam(best_a), best_residual, total_iterations};
}

void SphericalCap::validate() const
{
    if (!(radius > 0.0) || !(radius < kPi))
        fail(ErrorCode::InvalidInput, "spherical cap radius must lie in (0, pi)");
    if (std::abs(center.norm() - 1.0) > 1e-10)
        fail(ErrorCode::InvalidInput, "spherical cap center must be a unit vector");
}

namespace {

Eigen::Matrix3d rotation_to_north(const Eigen::Vector3d& p)
{
    const Eigen::Vector3d north(0, 0, 1);
    const double c = p.dot(north);
    if (c > 1.0 - 1e-14) return Eigen::Matrix3d::Identity();
    if (c < -1.0 + 1e-14) {
        Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
        flip(1, 1) = -1.0;
        flip(2, 2) = -1.0;
        return flip;
    }
    const Eigen::Vector3d axis = p.cross(north).normalized();
    const double angle = std::acos(std::clamp(c, -1.0, 1.0));
    return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

}  // namespace

Eigen::Vector3d cap_reflect_point(const SphericalCap& cap, const Eigen::Vector3d& x)
{
    const Eigen::Matrix3d rot = rotation_to_north(cap.center);
    const Eigen::Vector3d y = rot * x;
    const double r = std::tan(cap.radius / 2.0);
    // stereographic projection from the south pole
    const Eigen::Vector2d z = y.head<2>() / (1.0 + y[2]);
    const double zn = z.squaredNorm();
    Eigen::Vector3d lifted;
    if (zn < 1e-300) {
        lifted = Eigen::Vector3d(0, 0, -1);
    } else {
        const Eigen::Vector2d inv = (r * r / zn) * z;  // circle inversion across |z| = r
        const double in = inv.squaredNorm();
        lifted << 2.0 * inv[0], 2.0 * inv[1], 1.0 - in;
        lifted /= 1.0 + in;
    }
    return rot.transpose() * lifted;
}

Eigen::Vector3d cap_fold_point(const SphericalCap& cap, const Eigen::Vector3d& x)
{
    const double angle = std::atan2(cap.center.cross(x).norm(), cap.center.dot(x));
    if (angle < cap.radius) return cap_reflect_point(cap, x);
    return x;
}

SphereValuedMap cap_reflection_map(const SphericalCap& cap, const SurfaceMesh& mesh)
{
    if (mesh.topology() != Topology::Sphere)
        fail(ErrorCode::UnsupportedTopology, "cap reflection requires a sphere mesh");
    cap.validate();
    SphereValuedMap map;
    map.values.resize(mesh.vertex_count(), 3);
    for (int i = 0; i < mesh.vertex_count(); ++i)
        map.values.row(i) = cap_fold_point(cap, mesh.vertices().row(i).transpose()).transpose();
    map.analytic = [cap](const Eigen::Vector3d& p) -> Eigen::VectorXd {
        return cap_fold_point(cap, p);
    };
    map.analytic_tag = "cap_reflection";
    return map;
}

namespace {

struct NadirashviliParams {
    MoebiusParam a;
    SphericalCap cap;
};

NadirashviliParams decode_nadirashvili(const Eigen::VectorXd& q)
{
    const Eigen::Vector3d raw = q.head<3>();
    const double rn = raw.norm();
    const double shrink = rn > 1e-12 ? std::tanh(rn) / rn : 1.0 - rn * rn / 3.0;
    Eigen::VectorXd a = shrink * raw;
    SphericalCap cap;
    cap.center = Eigen::Vector3d(std::sin(q[3]) * std::cos(q[4]),
                                 std::sin(q[3]) * std::sin(q[4]), std::cos(q[3]));
    cap.radius = kPi / (1.0 + std::exp(-q[5]));
    cap.radius = std::clamp(cap.radius, 1e-6, kPi - 1e-6);
    return {MoebiusParam(a), cap};
}

SphericalCap image_cap_under_moebius(const MoebiusParam& phi, const SphericalCap& cap)
{
    // Moebius maps send caps to caps: push three boundary points and the
    // center through and rebuild the cap from the image circle.
    Eigen::Vector3d e1 = cap.center.unitOrthogonal();
    Eigen::Vector3d e2 = cap.center.cross(e1);
    std::array<Eigen::Vector3d, 3> img;
    for (int k = 0; k < 3; ++k) {
        const double t = 2.0 * kPi * k / 3.0;
        const Eigen::Vector3d b =
            std::cos(cap.radius) * cap.center + std::sin(cap.radius) * (std::cos(t) * e1 + std::sin(t) * e2);
        img[k] = apply_moebius(phi, b).head<3>();
    }
    Eigen::Vector3d n = (img[1] - img[0]).cross(img[2] - img[0]);
    if (n.norm() < 1e-300) fail(ErrorCode::Numeric, "degenerate image cap");
    n.normalize();
    double h = n.dot(img[0]);
    const Eigen::Vector3d inside = apply_moebius(phi, cap.center).head<3>();
    if (inside.dot(n) < h) {
        n = -n;
        h = -h;
    }
    SphericalCap out;
    out.center = n;
    out.radius = std::acos(std::clamp(h, -1.0, 1.0));
    return out;
}

}  // namespace

NadirashviliResult nadirashvili_balance(const SurfaceMesh& mesh, const MeasureOnMesh& mu,
                                        const FEFunction& phi1, const NadirashviliOptions& options)
{
    if (mesh.topology() != Topology::Sphere)
        fail(ErrorCode::UnsupportedTopology, "Nadirashvili balancing requires a sphere mesh");
    if (phi1.size() != mesh.vertex_count())
        fail(ErrorCode::InvalidInput, "eigenfunction does not match mesh");

    const Eigen::VectorXd w = mu.pairing_vector(mesh);
    const double mass = w.sum();

    auto residual = [&](const Eigen::VectorXd& q) -> Eigen::VectorXd {
        const auto params = decode_nadirashvili(q);
        Eigen::VectorXd r = Eigen::VectorXd::Zero(6);
        for (int i = 0; i < mesh.vertex_count(); ++i) {
            if (w[i] == 0.0) continue;
            const Eigen::Vector3d folded =
                cap_fold_point(params.cap, mesh.vertices().row(i).transpose());
            const Eigen::Vector3d mapped = apply_moebius(params.a, folded).head<3>();
            r.head<3>() += w[i] * mapped;
            r.tail<3>() += (w[i] * phi1[i]) * mapped;
        }
        return r / mass;
    };

    // deterministic multi-start: icosahedron directions × two radii
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> dirs = {
        {-1, golden, 0}, {1, golden, 0}, {-1, -golden, 0}, {1, -golden, 0},
        {0, -1, golden}, {0, 1, golden}, {0, -1, -golden}, {0, 1, -golden},
        {golden, 0, -1}, {golden, 0, 1}, {-golden, 0, -1}, {-golden, 0, 1}};
    for (auto& d : dirs) d.normalize();

    LMOptions lm;
    lm.max_iterations = options.max_iterations;
    lm.tol = options.tol * 0.5;
    lm.fd_step = 1e-7;

    Eigen::VectorXd best_q;
    double best_res = std::numeric_limits<double>::infinity();
    int used_starts = 0;
    for (const double rho0 : {kPi / 3.0, kPi / 2.0}) {
        for (const auto& dir : dirs) {
            if (used_starts >= options.coarse_starts * 2) break;
            ++used_starts;
            Eigen::VectorXd q(6);
            const double theta = std::acos(std::clamp(dir[2], -1.0, 1.0));
            const double phi_angle = std::atan2(dir[1], dir[0]);
            q << 0.0, 0.0, 0.0, theta, phi_angle, std::log(rho0 / (kPi - rho0));
            const auto result = levenberg_marquardt(residual, q, lm);
            if (result.residual_norm < best_res) {
                best_res = result.residual_norm;
                best_q = result.x;
            }
            if (best_res <= options.tol) break;
        }
        if (best_res <= options.tol) break;
    }

    const auto params = decode_nadirashvili(best_q);
    NadirashviliResult out;
    out.phi = params.a;
    out.inner_cap = params.cap;
    out.image_cap = image_cap_under_moebius(params.a, params.cap);
    out.residual = best_res;
    out.balanced = best_res <= options.tol;

    const MoebiusParam inv = params.a.inverse();
    out.folded_map.values.resize(mesh.vertex_count(), 3);
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const Eigen::Vector3d pre = apply_moebius(inv, mesh.vertices().row(i).transpose()).head<3>();
        const Eigen::Vector3d folded = cap_fold_point(params.cap, pre);
        out.folded_map.values.row(i) = apply_moebius(params.a, folded).transpose();
    }
    out.energy_times_two = 2.0 * dirichlet_energy(assemble_stiffness(mesh), out.folded_map.values);
    return out;
}

double canonical_family_energy(const SurfaceMesh& mesh, const SphereValuedMap& u,
                               const MoebiusParam& param)
{
    if (u.values.rows() != mesh.vertex_count())
        fail(ErrorCode::InvalidInput, "map does not match mesh");
    if (u.values.cols() != param.a.size())
        fail(ErrorCode::InvalidInput, "Moebius parameter dimension does not match the map target");

    const Eigen::VectorXd density = map_energy_density(mesh, u.values);
    const double a2 = param.a.squaredNorm();
    Eigen::VectorXd vertex_weight(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const double denom = a2 + 2.0 * u.values.row(i).dot(param.a) + 1.0;
        const double ratio = (1.0 - a2) / denom;
        vertex_weight[i] = ratio * ratio;
    }
    double energy = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles();
        const double wav =
            (vertex_weight[tri(t, 0)] + vertex_weight[tri(t, 1)] + vertex_weight[tri(t, 2)]) / 3.0;
        energy += wav * density[t] * mesh.triangle_areas()[t];
    }
    return 0.5 * energy;
}

HessianH0 hessian_H0(const SurfaceMesh& mesh, const SphereValuedMap& u, const Eigen::VectorXd& v)
{
    if (u.values.rows() != mesh.vertex_count())
        fail(ErrorCode::InvalidInput, "map does not match mesh");
    if (v.size() != u.values.cols())
        fail(ErrorCode::InvalidInput, "direction dimension does not match the map target");
    if (std::abs(v.norm() - 1.0) > 1e-8)
        fail(ErrorCode::InvalidInput, "Hessian direction must be a unit vector");

    const Eigen::VectorXd density = map_energy_density(mesh, u.values);
    const auto& tri = mesh.triangles();

    HessianH0 out;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const double area = mesh.triangle_areas()[t];
        double moment = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double dot = u.values.row(tri(t, c)).dot(v);
            moment += 3.0 * dot * dot - 1.0;
        }
        moment /= 3.0;
        out.moment_form += 4.0 * moment * density[t] * area;

        // normal component of the constant field v against the image
        // triangle plane and the radial direction
        const int dim = static_cast<int>(u.values.cols());
        Eigen::MatrixXd frame(dim, 3);
        frame.col(0) = (u.values.row(tri(t, 1)) - u.values.row(tri(t, 0))).transpose();
        frame.col(1) = (u.values.row(tri(t, 2)) - u.values.row(tri(t, 0))).transpose();
        frame.col(2) = (u.values.row(tri(t, 0)) + u.values.row(tri(t, 1)) + u.values.row(tri(t, 2)))
                           .transpose() / 3.0;
        // Gram-Schmidt
        Eigen::VectorXd vp = v;
        for (int k = 0; k < 3; ++k) {
            Eigen::VectorXd b = frame.col(k);
            for (int j = 0; j < k; ++j) b -= frame.col(j).dot(b) * frame.col(j);
            const double nb = b.norm();
            if (nb < 1e-14) continue;
            b /= nb;
            frame.col(k) = b;
            vp -= b.dot(vp) * b;
        }
        out.normal_form += -4.0 * vp.squaredNorm() * density[t] * area;
    }
    out.discrepancy = std::abs(out.moment_form - out.normal_form);

    // light harmonicity audit: dual-norm residual of Δu = |du|²u
    const SparseOperator stiffness = assemble_stiffness(mesh);
    const SparseOperator weighted = assemble_mass_triangle_weights(mesh, density);
    const SparseOperator background = assemble_background_mass(mesh);
    Eigen::SimplicialLDLT<SparseOperator> solver(stiffness + background);
    double res2 = 0.0;
    for (int c = 0; c < u.values.cols(); ++c) {
        Eigen::VectorXd r = stiffness * u.values.col(c) - weighted * u.values.col(c);
        r.array() -= r.mean();
        res2 += r.dot(solver.solve(r));
    }
    const double energy2 = dirichlet_energy(stiffness, u.values) * 2.0;
    out.harmonic_input = std::sqrt(std::max(res2, 0.0)) <= 0.05 * std::sqrt(std::max(energy2, 1e-30));
    return out;
}

}  // namespace specstab
