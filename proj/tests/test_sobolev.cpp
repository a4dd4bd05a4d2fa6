#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "moebius.hpp"
#include "sobolev.hpp"

using namespace specstab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("spherical harmonic basis sanity")
{
    const SphericalHarmonicBasis basis(3);
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss;

    SUBCASE("degree-1 harmonics are scaled coordinates")
    {
        // Y_{1,0} = sqrt(3/4pi) z with sup 1*N and gradient sup N
        int k10 = -1;
        for (int k = 0; k < basis.size(); ++k)
            if (basis.degree(k) == 1 && basis.order(k) == 0) k10 = k;
        REQUIRE(k10 >= 0);
        const double n = std::sqrt(3.0 / (4.0 * kPi));
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::Vector3d x(gauss(rng), gauss(rng), gauss(rng));
            x.normalize();
            CHECK(basis.value(k10, x) == doctest::Approx(n * x[2]).epsilon(1e-12));
        }
        CHECK(basis.sup_value(k10) == doctest::Approx(n).epsilon(2e-3));
        CHECK(basis.sup_gradient(k10) == doctest::Approx(n).epsilon(2e-3));
    }

    SUBCASE("orthonormality under mesh quadrature")
    {
        const auto mesh = SurfaceMesh::build_icosphere(4);
        const auto M = assemble_background_mass(mesh);
        Eigen::MatrixXd vals(mesh.vertex_count(), basis.size());
        for (int k = 0; k < basis.size(); ++k)
            for (int i = 0; i < mesh.vertex_count(); ++i)
                vals(i, k) = basis.value(k, mesh.vertices().row(i).transpose());
        const Eigen::MatrixXd gram = vals.transpose() * M * vals;
        // PL interpolation costs O((l h)²) accuracy at degree 3
        CHECK((gram - Eigen::MatrixXd::Identity(basis.size(), basis.size()))
                  .cwiseAbs()
                  .maxCoeff() <= 0.02);
    }

    SUBCASE("tangent gradients are tangent")
    {
        for (int k = 0; k < basis.size(); ++k) {
            Eigen::Vector3d x(gauss(rng), gauss(rng), gauss(rng));
            x.normalize();
            CHECK(std::abs(basis.tangent_gradient(k, x).dot(x)) <= 1e-12);
        }
    }
}

TEST_CASE("W^{-1,2} norm")
{
    const auto mesh = SurfaceMesh::build_icosphere(4);
    const BackgroundOperators ops(mesh);
    const auto uniform = MeasureOnMesh::uniform(mesh);

    SUBCASE("zero functional")
    {
        const SignedMeasureFunctional zero(mesh, Eigen::VectorXd::Zero(mesh.vertex_count()));
        CHECK(w_minus12_norm(ops, zero) == 0.0);
    }

    SUBCASE("constant-multiple measures have norm c sqrt(area)")
    {
        for (const double c : {0.5, 1.0, 2.5}) {
            const SignedMeasureFunctional m(mesh, c * uniform.pairing_vector(mesh));
            CHECK(w_minus12_norm(ops, m) ==
                  doctest::Approx(c * std::sqrt(4.0 * kPi)).epsilon(5e-3));
        }
    }

    SUBCASE("norm axioms on random functionals")
    {
        std::mt19937 rng(11);
        std::normal_distribution<double> gauss;
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd a(mesh.vertex_count()), b(mesh.vertex_count());
            for (int i = 0; i < mesh.vertex_count(); ++i) {
                a[i] = gauss(rng);
                b[i] = gauss(rng);
            }
            const SignedMeasureFunctional ma(mesh, a), mb(mesh, b);
            const SignedMeasureFunctional msum(mesh, a + b);
            const SignedMeasureFunctional mscaled(mesh, 3.7 * a);
            const double na = w_minus12_norm(ops, ma);
            const double nb = w_minus12_norm(ops, mb);
            CHECK(w_minus12_norm(ops, msum) <= na + nb + 1e-8 * (na + nb));
            CHECK(w_minus12_norm(ops, mscaled) == doctest::Approx(3.7 * na).epsilon(1e-8));
        }
    }

    SUBCASE("duality residual of the Riesz maximizer")
    {
        Eigen::VectorXd a(mesh.vertex_count());
        for (int i = 0; i < mesh.vertex_count(); ++i) a[i] = std::sin(0.7 * i);
        const SignedMeasureFunctional m(mesh, a);
        const Eigen::VectorXd riesz = w_minus12_riesz(ops, m);
        const double norm = w_minus12_norm(ops, m);
        CHECK(m.pairing().dot(riesz) == doctest::Approx(norm * norm).epsilon(1e-8));
        CHECK(ops.w12_norm_sq(riesz) == doctest::Approx(norm * norm).epsilon(1e-8));
    }

    SUBCASE("bump-measure norm decays with the cap radius")
    {
        // one-sided reading of the (log 1/eps)^{-1/2} envelope: doubling
        // log(1/eps) must at least halve the squared norm (within 20%)
        const auto fine = SurfaceMesh::build_icosphere(5, true);
        const BackgroundOperators fine_ops(fine);
        const auto nu_big = cap_bump_measure(fine, 0.25);
        const auto nu_small = cap_bump_measure(fine, 0.0625);  // log doubles
        const double n_big =
            w_minus12_norm(fine_ops, SignedMeasureFunctional(fine, nu_big.pairing_vector(fine)));
        const double n_small = w_minus12_norm(
            fine_ops, SignedMeasureFunctional(fine, nu_small.pairing_vector(fine)));
        CHECK(n_small < n_big);
        CHECK(n_small * n_small <= 0.5 * 1.2 * n_big * n_big);
    }
}

TEST_CASE("dual norm lower bounds")
{
    const auto mesh = SurfaceMesh::build_icosphere(4);
    const BackgroundOperators ops(mesh);

    SUBCASE("zero functional gives zero bounds")
    {
        const SignedMeasureFunctional zero(mesh, Eigen::VectorXd::Zero(mesh.vertex_count()));
        const auto dict = build_c0w12_dictionary(mesh, 3, {}, {});
        CHECK(dual_c0w12_norm_lb(ops, zero, dict) == 0.0);
        CHECK(dual_c1_norm_lb(mesh, zero, 4) == 0.0);
    }

    SUBCASE("polar atom difference pairs with x3")
    {
        const int vn = mesh.nearest_vertex(Eigen::Vector3d(0, 0, 1));
        const int vs = mesh.nearest_vertex(Eigen::Vector3d(0, 0, -1));
        Eigen::VectorXd pairing = Eigen::VectorXd::Zero(mesh.vertex_count());
        pairing[vn] += 1.0;
        pairing[vs] -= 1.0;
        const SignedMeasureFunctional m(mesh, pairing);
        // ψ = x3 has C¹ norm 2 and pairing ψ(N) - ψ(S) = 2, so the bound
        // is at least ~1 (up to the nearest-vertex offset and safety factor)
        CHECK(dual_c1_norm_lb(mesh, m, 4) >= 0.95);
    }

    SUBCASE("dual bounds are monotone in the dictionary")
    {
        Eigen::VectorXd pairing = Eigen::VectorXd::Zero(mesh.vertex_count());
        const Eigen::Vector3d p = Eigen::Vector3d(0.2, -0.5, 0.84).normalized();
        const int vp = mesh.nearest_vertex(p);
        pairing[vp] = 1.0;
        pairing -= MeasureOnMesh::uniform(mesh).pairing_vector(mesh) / (4.0 * kPi);
        const SignedMeasureFunctional m(mesh, pairing);

        const auto small = build_c0w12_dictionary(mesh, 2, {}, {});
        auto large = build_c0w12_dictionary(mesh, 2, {p}, {0.4});
        const double lb_small = dual_c0w12_norm_lb(ops, m, small);
        const double lb_large = dual_c0w12_norm_lb(ops, m, large);
        CHECK(lb_large >= lb_small);
        CHECK(lb_large > lb_small + 1e-6);  // the centered bump must help

        CHECK(dual_c1_norm_lb(mesh, m, 6) >= dual_c1_norm_lb(mesh, m, 2));
    }

    SUBCASE("lower bound never exceeds the sqrt(2)-scaled W^{-1,2} surrogate")
    {
        // unit-area background keeps ψᵀMψ ≤ sup(ψ)², making the dual
        // quotient dominated by sqrt(2)·‖m‖ for every dictionary element
        const auto unit = SurfaceMesh::build_icosphere(4, true);
        const BackgroundOperators unit_ops(unit);
        std::mt19937 rng(3);
        std::normal_distribution<double> gauss;
        const auto dict = build_c0w12_dictionary(
            unit, 3, {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 0, 0)}, {0.2, 0.3});
        for (int trial = 0; trial < 5; ++trial) {
            Eigen::VectorXd a(unit.vertex_count());
            for (int i = 0; i < unit.vertex_count(); ++i) a[i] = gauss(rng);
            const SignedMeasureFunctional m(unit, a);
            CHECK(dual_c0w12_norm_lb(unit_ops, m, dict) <=
                  std::sqrt(2.0) * w_minus12_norm(unit_ops, m) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("orlicz norm")
{
    const auto mesh = SurfaceMesh::build_flat_torus({0.0, 1.0}, 24);

    SUBCASE("zero function")
    {
        CHECK(orlicz_norm(mesh, Eigen::VectorXd::Zero(mesh.vertex_count())) == 0.0);
    }

    SUBCASE("constants solve the scalar equation")
    {
        for (const double c : {0.3, 1.0, 7.0}) {
            const FEFunction f = Eigen::VectorXd::Constant(mesh.vertex_count(), c);
            const double eta = orlicz_norm(mesh, f);
            // oracle: c²/η² = log(2 + c/η) on the unit-area torus
            const double lhs = c * c / (eta * eta);
            const double rhs = std::log(2.0 + c / eta);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
        }
    }

    SUBCASE("positive homogeneity")
    {
        std::mt19937 rng(9);
        std::normal_distribution<double> gauss;
        FEFunction f(mesh.vertex_count());
        for (int i = 0; i < mesh.vertex_count(); ++i) f[i] = gauss(rng);
        const double base = orlicz_norm(mesh, f);
        for (const double t : {0.2, 3.0, 11.0})
            CHECK(orlicz_norm(mesh, t * f) == doctest::Approx(t * base).epsilon(1e-8));
        const double base_full = orlicz_w12_norm(mesh, f);
        CHECK(orlicz_w12_norm(mesh, 3.0 * f) == doctest::Approx(3.0 * base_full).epsilon(1e-8));
    }
}

TEST_CASE("orlicz dual bound separates the concentration family from W^{-1,2}")
{
    const auto mesh = SurfaceMesh::build_icosphere(5, true);
    const BackgroundOperators ops(mesh);
    const auto uniform = MeasureOnMesh::uniform(mesh).normalized_unit_mass(mesh);

    SUBCASE("small coupling: W^{-1,2} distance decays with the cap radius")
    {
        // the fluctuation norm peaks near eps ~ 0.08; the decay regime below
        // that needs a level-6 mesh to rise above indicator discretization
        const auto fine = SurfaceMesh::build_icosphere(6, true);
        const BackgroundOperators fine_ops(fine);
        const auto fine_uniform = MeasureOnMesh::uniform(fine).normalized_unit_mass(fine);
        double w_prev = std::numeric_limits<double>::infinity();
        for (const double eps : {0.05, 0.03, 0.018}) {
            const auto mu = cap_concentration_measure(fine, eps, 0.01);
            const auto diff = SignedMeasureFunctional::difference(fine, mu, fine_uniform);
            const double w_norm = w_minus12_norm(fine_ops, diff);
            CHECK(w_norm < w_prev);
            w_prev = w_norm;
        }
    }

    SUBCASE("large coupling: the Orlicz-dual bound stays bounded below")
    {
        std::vector<double> orlicz_values;
        for (const double eps : {0.12, 0.08, 0.05}) {
            const auto mu = cap_concentration_measure(mesh, eps, 20.0);
            const auto diff = SignedMeasureFunctional::difference(mesh, mu, uniform);
            const auto profiles = concentration_profiles(mesh, {0.5 * eps, eps, 2.0 * eps});
            orlicz_values.push_back(orlicz_dual_lb(mesh, diff, profiles));
        }
        const double max_lb = *std::max_element(orlicz_values.begin(), orlicz_values.end());
        CHECK(max_lb > 0.0);
        for (const double v : orlicz_values) CHECK(v >= 0.4 * max_lb);
    }
}

TEST_CASE("exact small Wasserstein distances")
{
    const auto mesh = SurfaceMesh::build_icosphere(3);

    SUBCASE("identical measures")
    {
        AtomicMeasure mu;
        mu.vertices = {3, 17, 100};
        mu.weights = {0.5, 0.25, 0.25};
        CHECK(wasserstein2_exact_small(mesh, mu, mu) == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("two unit atoms transport along the geodesic")
    {
        AtomicMeasure mu, nu;
        mu.vertices = {0};
        mu.weights = {1.0};
        nu.vertices = {100};
        nu.weights = {1.0};
        const double d = mesh.vertex_distance(0, 100);
        CHECK(wasserstein2_exact_small(mesh, mu, nu) == doctest::Approx(d).epsilon(1e-12));
    }

    SUBCASE("capacity guard")
    {
        AtomicMeasure mu, nu;
        for (int i = 0; i < 401; ++i) {
            mu.vertices.push_back(i);
            mu.weights.push_back(1.0 / 401);
        }
        nu.vertices = {0};
        nu.weights = {1.0};
        CHECK_THROWS_AS(wasserstein2_exact_small(mesh, mu, nu), Error);
    }

    SUBCASE("optimality certificates on random instances")
    {
        // feasible dual potentials with complementary slackness certify
        // the plan: u_i + v_j <= c_ij with equality on the support
        std::mt19937 rng(29);
        std::uniform_int_distribution<int> pick(0, mesh.vertex_count() - 1);
        std::uniform_real_distribution<double> mass(0.1, 1.0);
        for (int trial = 0; trial < 12; ++trial) {
            AtomicMeasure mu, nu;
            const int n_atoms = 4 + trial;
            double su = 0.0, sv = 0.0;
            for (int k = 0; k < n_atoms; ++k) {
                mu.vertices.push_back(pick(rng));
                mu.weights.push_back(mass(rng));
                su += mu.weights.back();
                nu.vertices.push_back(pick(rng));
                nu.weights.push_back(mass(rng));
                sv += nu.weights.back();
            }
            for (auto& w : mu.weights) w /= su;
            for (auto& w : nu.weights) w /= sv;

            const auto plan = wasserstein2_plan(mesh, mu, nu);
            const int n = static_cast<int>(mu.vertices.size());
            const int m2 = static_cast<int>(nu.vertices.size());

            // marginals
            for (int i = 0; i < n; ++i)
                CHECK(plan.flow.row(i).sum() == doctest::Approx(mu.weights[i]).epsilon(1e-9));
            for (int j = 0; j < m2; ++j)
                CHECK(plan.flow.col(j).sum() == doctest::Approx(nu.weights[j]).epsilon(1e-9));

            // potentials from the support graph
            std::vector<double> u(n, std::numeric_limits<double>::quiet_NaN());
            std::vector<double> v(m2, std::numeric_limits<double>::quiet_NaN());
            bool progress = true;
            u[0] = 0.0;
            while (progress) {
                progress = false;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < m2; ++j) {
                        if (plan.flow(i, j) <= 1e-12) continue;
                        if (!std::isnan(u[i]) && std::isnan(v[j])) {
                            v[j] = plan.cost(i, j) - u[i];
                            progress = true;
                        } else if (std::isnan(u[i]) && !std::isnan(v[j])) {
                            u[i] = plan.cost(i, j) - v[j];
                            progress = true;
                        }
                    }
                if (!progress) {
                    // disconnected support forest: seed another component
                    for (int i = 0; i < n && !progress; ++i)
                        if (std::isnan(u[i])) {
                            u[i] = 0.0;
                            progress = true;
                        }
                    if (progress && std::none_of(v.begin(), v.end(), [](double x) {
                            return std::isnan(x);
                        }))
                        break;
                }
            }
            // with disconnected components the certificate may be loose,
            // so only check feasibility where the potentials are defined
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m2; ++j)
                    if (!std::isnan(u[i]) && !std::isnan(v[j]))
                        CHECK(u[i] + v[j] <= plan.cost(i, j) + 1e-7);
        }
    }

    SUBCASE("peyre lower bound 2|mu-nu|_{W^{-1,2}} >= W2 on atomized densities")
    {
        // the transport bound needs the unit-area background: on an
        // area-A surface the comparison degrades like sqrt(A)/2
        const auto coarse = SurfaceMesh::build_icosphere(2, true);  // 162 supports
        const BackgroundOperators ops(coarse);
        const SphericalHarmonicBasis basis(2);
        std::mt19937 rng(31);
        std::normal_distribution<double> gauss;

        const auto atomize = [&](const Eigen::VectorXd& coeffs) {
            Eigen::VectorXd density(coarse.vertex_count());
            for (int i = 0; i < coarse.vertex_count(); ++i) {
                double val = 1.0;
                for (int k = 0; k < basis.size(); ++k)
                    val += coeffs[k] * basis.value(k, coarse.vertices().row(i).transpose());
                density[i] = std::max(val, 0.05);
            }
            const MeasureOnMesh measure =
                MeasureOnMesh(coarse, density).normalized_unit_mass(coarse);
            const Eigen::VectorXd pairing = measure.pairing_vector(coarse);
            AtomicMeasure atoms;
            for (int i = 0; i < coarse.vertex_count(); ++i)
                if (pairing[i] > 0.0) {
                    atoms.vertices.push_back(i);
                    atoms.weights.push_back(pairing[i]);
                }
            const double total =
                Eigen::Map<const Eigen::VectorXd>(atoms.weights.data(), atoms.weights.size()).sum();
            for (auto& w : atoms.weights) w /= total;
            return std::make_pair(measure, atoms);
        };

        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd ca(basis.size()), cb(basis.size());
            for (int k = 0; k < basis.size(); ++k) {
                ca[k] = 0.25 * gauss(rng);
                cb[k] = 0.25 * gauss(rng);
            }
            const auto [ma, atoms_a] = atomize(ca);
            const auto [mb, atoms_b] = atomize(cb);
            const auto diff = SignedMeasureFunctional::difference(coarse, ma, mb);
            const double w2 = wasserstein2_exact_small(coarse, atoms_a, atoms_b);
            CHECK(2.0 * w_minus12_norm(ops, diff) >= w2 - 1e-10);
        }
    }
}
