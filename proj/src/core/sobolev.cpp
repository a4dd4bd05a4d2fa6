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
#include "sobolev.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "numerics.hpp"
#include "quadrature.hpp"

namespace specstab {

namespace {
constexpr double kPi = std::numbers::pi;
}

BackgroundOperators::BackgroundOperators(const SurfaceMesh& mesh)
    : mesh_(&mesh),
      stiffness_(assemble_stiffness(mesh)),
      mass_(assemble_background_mass(mesh))
{
    SparseOperator sum = stiffness_ + mass_;
    solver_.compute(sum);
    if (solver_.info() != Eigen::Success)
        fail(ErrorCode::Numeric, "factorization of K + M_g failed");
}

Eigen::VectorXd BackgroundOperators::solve_w12(const Eigen::VectorXd& rhs) const
{
    Eigen::VectorXd x = solver_.solve(rhs);
    if (solver_.info() != Eigen::Success)
        fail(ErrorCode::Numeric, "W^{1,2} Riesz solve failed");
    return x;
}

double BackgroundOperators::w12_norm_sq(const Eigen::VectorXd& f) const
{
    return f.dot(stiffness_ * f) + f.dot(mass_ * f);
}

SignedMeasureFunctional::SignedMeasureFunctional(const SurfaceMesh& mesh, Eigen::VectorXd pairing)
    : pairing_(std::move(pairing))
{
    if (pairing_.size() != mesh.vertex_count())
        fail(ErrorCode::InvalidInput, "pairing vector does not match mesh");
}

SignedMeasureFunctional SignedMeasureFunctional::difference(const SurfaceMesh& mesh,
                                                            const MeasureOnMesh& mu,
                                                            const MeasureOnMesh& nu)
{
    return SignedMeasureFunctional(mesh, mu.pairing_vector(mesh) - nu.pairing_vector(mesh));
}

double w_minus12_norm(const BackgroundOperators& ops, const SignedMeasureFunctional& m)
{
    const Eigen::VectorXd riesz = ops.solve_w12(m.pairing());
    return std::sqrt(std::max(m.pairing().dot(riesz), 0.0));
}

Eigen::VectorXd w_minus12_riesz(const BackgroundOperators& ops, const SignedMeasureFunctional& m)
{
    return ops.solve_w12(m.pairing());
}

std::vector<DictionaryElement> build_c0w12_dictionary(const SurfaceMesh& mesh, int degree,
                                                      const std::vector<Eigen::Vector3d>& bump_centers,
                                                      const std::vector<double>& bump_radii)
{
    std::vector<DictionaryElement> dict;
    const int nv = mesh.vertex_count();

    if (mesh.topology() == Topology::Sphere) {
        const SphericalHarmonicBasis basis(degree);
        for (int k = 0; k < basis.size(); ++k) {
            if (basis.degree(k) == 0) continue;
            DictionaryElement e;
            e.values.resize(nv);
            for (int i = 0; i < nv; ++i)
                e.values[i] = basis.value(k, mesh.vertices().row(i).transpose());
            e.sup_norm = basis.sup_value(k);
            e.label = "harmonic_l" + std::to_string(basis.degree(k)) + "_m" +
                      std::to_string(basis.order(k));
            dict.push_back(std::move(e));
        }
    } else {
        for (int kx = 0; kx <= degree; ++kx) {
            for (int ky = (kx == 0 ? 1 : 0); ky <= degree; ++ky) {
                for (const bool sine : {false, true}) {
                    DictionaryElement e;
                    e.values.resize(nv);
                    for (int i = 0; i < nv; ++i) {
                        const double phase = 2.0 * kPi * (kx * mesh.vertices()(i, 0) +
                                                          ky * mesh.vertices()(i, 1));
                        e.values[i] = sine ? std::sin(phase) : std::cos(phase);
                    }
                    e.sup_norm = 1.0;
                    e.label = std::string(sine ? "sin" : "cos") + "_" + std::to_string(kx) + "_" +
                              std::to_string(ky);
                    dict.push_back(std::move(e));
                }
            }
        }
    }

    for (size_t c = 0; c < bump_centers.size(); ++c) {
        const double radius = bump_radii.at(std::min(c, bump_radii.size() - 1));
        DictionaryElement e;
        e.values.resize(nv);
        for (int i = 0; i < nv; ++i) {
            const double d = mesh.geodesic_distance(mesh.vertices().row(i), bump_centers[c]);
            const double s = d / radius;
            e.values[i] = s < 1.0 ? std::cos(0.5 * kPi * s) * std::cos(0.5 * kPi * s) : 0.0;
        }
        e.sup_norm = 1.0;
        e.label = "bump_" + std::to_string(c);
        dict.push_back(std::move(e));
    }
    return dict;
}

double dual_c0w12_norm_lb(const BackgroundOperators& ops, const SignedMeasureFunctional& m,
                          const std::vector<DictionaryElement>& dictionary)
{
    if (dictionary.empty())
        fail(ErrorCode::InvalidInput, "dictionary for the dual bound is empty");
    double best = 0.0;
    for (const auto& psi : dictionary) {
        const double pairing = std::abs(m.pairing().dot(psi.values));
        const double denom_sq =
            psi.sup_norm * psi.sup_norm + psi.values.dot(ops.stiffness() * psi.values);
        if (denom_sq <= 0.0) continue;
        best = std::max(best, pairing / std::sqrt(denom_sq));
    }
    return best;
}

double dual_c1_norm_lb(const SurfaceMesh& mesh, const SignedMeasureFunctional& m, int max_degree)
{
    if (mesh.topology() != Topology::Sphere)
        fail(ErrorCode::UnsupportedTopology, "the (C1)* bound is defined on sphere meshes");
    const SphericalHarmonicBasis basis(max_degree);
    double best = 0.0;
    for (int k = 0; k < basis.size(); ++k) {
        if (basis.degree(k) == 0) continue;
        Eigen::VectorXd values(mesh.vertex_count());
        for (int i = 0; i < mesh.vertex_count(); ++i)
            values[i] = basis.value(k, mesh.vertices().row(i).transpose());
        const double pairing = std::abs(m.pairing().dot(values));
        const double c1 = basis.sup_value(k) + basis.sup_gradient(k) / mesh.metric_scale();
        best = std::max(best, pairing / c1);
    }
    return best;
}

namespace {

/// ∫ |f/η|² / log(2 + |f/η|) dv for a PL f, degree-5 quadrature.
double luxemburg_functional(const SurfaceMesh& mesh, const FEFunction& f, double eta)
{
    const auto& rule = tri_quadrature_deg5();
    const auto& tri = mesh.triangles();
    double acc = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const double area = mesh.triangle_areas()[t];
        const double f0 = f[tri(t, 0)], f1 = f[tri(t, 1)], f2 = f[tri(t, 2)];
        for (const auto& q : rule) {
            const double v = std::abs(q.b0 * f0 + q.b1 * f1 + q.b2 * f2) / eta;
            acc += q.w * area * v * v / std::log(2.0 + v);
        }
    }
    return acc;
}

/// Same functional for the per-triangle-constant |df|.
double luxemburg_gradient_functional(const SurfaceMesh& mesh, const FEFunction& f, double eta)
{
    double acc = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const double g = triangle_gradient(mesh, t, f).norm() / eta;
        acc += mesh.triangle_areas()[t] * g * g / std::log(2.0 + g);
    }
    return acc;
}

double luxemburg_solve(const SurfaceMesh& mesh, const FEFunction& f,
                       const std::function<double(double)>& functional)
{
    double l2 = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles();
        const double avg2 = (f[tri(t, 0)] * f[tri(t, 0)] + f[tri(t, 1)] * f[tri(t, 1)] +
                             f[tri(t, 2)] * f[tri(t, 2)]) / 3.0;
        l2 += mesh.triangle_areas()[t] * avg2;
    }
    l2 = std::sqrt(l2);
    if (l2 == 0.0) return 0.0;
    const double lo = l2 / std::sqrt(std::log(2.0) + 10.0);
    const double hi = l2 * 10.0;
    return bisect_decreasing(functional, 1.0, lo, hi, 1e-10);
}

}  // namespace

double orlicz_norm(const SurfaceMesh& mesh, const FEFunction& f)
{
    if (f.size() != mesh.vertex_count())
        fail(ErrorCode::InvalidInput, "function does not match mesh");
    if (f.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    return luxemburg_solve(mesh, f, [&](double eta) { return luxemburg_functional(mesh, f, eta); });
}

double orlicz_w12_norm(const SurfaceMesh& mesh, const FEFunction& f)
{
    if (f.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    double grad_part = 0.0;
    bool has_gradient = false;
    for (int t = 0; t < mesh.triangle_count() && !has_gradient; ++t)
        has_gradient = triangle_gradient(mesh, t, f).norm() > 0.0;
    if (has_gradient) {
        grad_part = luxemburg_solve(
            mesh, f, [&](double eta) { return luxemburg_gradient_functional(mesh, f, eta); });
    }
    return orlicz_norm(mesh, f) + grad_part;
}

double orlicz_dual_lb(const SurfaceMesh& mesh, const SignedMeasureFunctional& m,
                      const std::vector<FEFunction>& candidates)
{
    if (candidates.empty())
        fail(ErrorCode::InvalidInput, "orlicz dual bound needs candidate profiles");
    double best = 0.0;
    for (const auto& phi : candidates) {
        if (phi.size() != m.pairing().size())
            fail(ErrorCode::InvalidInput, "candidate profile does not match mesh");
        const Eigen::VectorXd phi_sq = phi.array().square();
        const double numerator = m.pairing().dot(phi_sq);
        const double denom = orlicz_w12_norm(mesh, phi_sq);
        if (denom <= 0.0) continue;
        best = std::max(best, numerator / denom);
    }
    return best;
}

std::vector<FEFunction> concentration_profiles(const SurfaceMesh& mesh,
                                               const std::vector<double>& radii)
{
    if (mesh.topology() != Topology::Sphere)
        fail(ErrorCode::UnsupportedTopology, "concentration profiles live on the sphere");
    const Eigen::Vector3d north(0, 0, 1), south(0, 0, -1);
    const double outer = 0.45 * mesh.metric_scale() * kPi;
    std::vector<FEFunction> out;
    for (const double delta : radii) {
        if (!(delta > 0.0) || delta >= outer) continue;
        FEFunction phi(mesh.vertex_count());
        for (int i = 0; i < mesh.vertex_count(); ++i) {
            const Eigen::Vector3d v = mesh.vertices().row(i);
            const double dn = std::max(mesh.geodesic_distance(v, north), delta);
            const double ds = std::max(mesh.geodesic_distance(v, south), delta);
            const double fn = dn < outer ? std::log(outer / dn) : 0.0;
            const double fs = ds < outer ? std::log(outer / ds) : 0.0;
            phi[i] = (fn - fs) / std::sqrt(2.0);
        }
        out.push_back(std::move(phi));
    }
    if (out.empty()) fail(ErrorCode::InvalidInput, "no admissible concentration radii");
    return out;
}

double wasserstein2_exact_small(const SurfaceMesh& mesh, const AtomicMeasure& mu,
                                const AtomicMeasure& nu)
{
    return wasserstein2_plan(mesh, mu, nu).w2;
}

TransportPlan wasserstein2_plan(const SurfaceMesh& mesh, const AtomicMeasure& mu,
                                const AtomicMeasure& nu)
{
    const int n = static_cast<int>(mu.vertices.size());
    const int m = static_cast<int>(nu.vertices.size());
    if (n == 0 || m == 0) fail(ErrorCode::InvalidInput, "empty atomic measure");
    if (n > 400 || m > 400)
        fail(ErrorCode::Capacity, "exact transport supports at most 400 points per side");
    const double mass_mu = Eigen::Map<const Eigen::VectorXd>(mu.weights.data(), n).sum();
    const double mass_nu = Eigen::Map<const Eigen::VectorXd>(nu.weights.data(), m).sum();
    if (std::abs(mass_mu - 1.0) > 1e-9 || std::abs(mass_nu - 1.0) > 1e-9)
        fail(ErrorCode::InvalidInput, "transport endpoints must have unit mass");

    Eigen::MatrixXd cost(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double d = mesh.vertex_distance(mu.vertices[i], nu.vertices[j]);
            cost(i, j) = d * d;
        }

    // Successive shortest augmenting paths with potentials, on the graph
    // source → suppliers → consumers → sink so every Dijkstra is truly
    // single-source and reduced costs stay nonnegative.
    const int total = n + m + 2;
    const int src = n + m, snk = n + m + 1;
    Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(n, m);
    std::vector<double> flow_src(n, 0.0), flow_snk(m, 0.0);
    std::vector<double> pot(total, 0.0);
    const double inf = std::numeric_limits<double>::infinity();

    const int max_augmentations = 12 * (n + m) + 64;
    int augmentations = 0;
    while (true) {
        double remaining = 0.0;
        for (int i = 0; i < n; ++i) remaining += mu.weights[i] - flow_src[i];
        if (remaining <= 1e-12) break;
        if (++augmentations > max_augmentations)
            fail(ErrorCode::Numeric, "transport solver exceeded its augmentation budget");

        std::vector<double> dist(total, inf);
        std::vector<int> parent(total, -1);
        std::vector<bool> done(total, false);
        dist[src] = 0.0;

        for (int iter = 0; iter < total; ++iter) {
            int u = -1;
            double best = inf;
            for (int x = 0; x < total; ++x)
                if (!done[x] && dist[x] < best) {
                    best = dist[x];
                    u = x;
                }
            if (u < 0 || u == snk) break;
            done[u] = true;
            const auto relax = [&](int v, double rc) {
                const double cand = dist[u] + std::max(rc, 0.0);
                if (cand < dist[v]) {
                    dist[v] = cand;
                    parent[v] = u;
                }
            };
            if (u == src) {
                for (int i = 0; i < n; ++i)
                    if (mu.weights[i] - flow_src[i] > 1e-15) relax(i, pot[src] - pot[i]);
            } else if (u < n) {
                if (flow_src[u] > 1e-15) relax(src, pot[u] - pot[src]);
                for (int j = 0; j < m; ++j) relax(n + j, cost(u, j) + pot[u] - pot[n + j]);
            } else if (u < n + m) {
                const int j = u - n;
                if (nu.weights[j] - flow_snk[j] > 1e-15) relax(snk, pot[u] - pot[snk]);
                for (int i = 0; i < n; ++i)
                    if (flow(i, j) > 1e-15) relax(i, -cost(i, j) + pot[u] - pot[i]);
            }
        }
        if (!(dist[snk] < inf)) fail(ErrorCode::Numeric, "transport network disconnected");

        double delta = inf;
        for (int x = snk; parent[x] >= 0; x = parent[x]) {
            const int p = parent[x];
            if (p == src)
                delta = std::min(delta, mu.weights[x] - flow_src[x]);
            else if (x == snk)
                delta = std::min(delta, nu.weights[p - n] - flow_snk[p - n]);
            else if (p < n && x >= n)
                ;  // forward bipartite arc, unbounded
            else if (p >= n && x < n)
                delta = std::min(delta, flow(x, p - n));
            else if (x == src)
                delta = std::min(delta, flow_src[p]);
        }
        if (!(delta > 0.0)) fail(ErrorCode::Numeric, "transport solver stalled");

        for (int x = snk; parent[x] >= 0; x = parent[x]) {
            const int p = parent[x];
            if (p == src)
                flow_src[x] += delta;
            else if (x == snk)
                flow_snk[p - n] += delta;
            else if (p < n && x >= n && x < n + m)
                flow(p, x - n) += delta;
            else if (p >= n && p < n + m && x < n)
                flow(x, p - n) -= delta;
            else if (x == src)
                flow_src[p] -= delta;
        }

        for (int x = 0; x < total; ++x)
            pot[x] += dist[x] < inf ? std::min(dist[x], dist[snk]) : dist[snk];
    }

    const double total_cost = (cost.array() * flow.array()).sum();
    TransportPlan plan;
    plan.w2 = std::sqrt(std::max(total_cost, 0.0));
    plan.flow = std::move(flow);
    plan.cost = std::move(cost);
    return plan;
}

void NormReport::save(const std::string& path) const
{
    nlohmann::json doc;
    doc["norm_name"] = norm_name;
    doc["value"] = value;
    doc["bound_type"] = bound_type;
    doc["dictionary_spec"] = dictionary_spec;
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write norm report: " + path);
    out << doc.dump(1) << "\n";
}

}  // namespace specstab
