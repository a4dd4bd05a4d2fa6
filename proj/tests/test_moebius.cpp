#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eigensolve.hpp"
#include "harmonic_maps.hpp"
#include "moebius.hpp"

using namespace specstab;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::Vector3d unit_sample(std::mt19937& rng)
{
    std::normal_distribution<double> gauss;
    Eigen::Vector3d x(gauss(rng), gauss(rng), gauss(rng));
    return x.normalized();
}
}  // namespace

TEST_CASE("moebius map basics")
{
    std::mt19937 rng(3);

    SUBCASE("identity at a = 0")
    {
        const auto id = MoebiusParam::identity();
        for (int k = 0; k < 20; ++k) {
            const Eigen::Vector3d x = unit_sample(rng);
            CHECK((apply_moebius(id, x) - x).norm() <= 1e-15);
        }
    }

    SUBCASE("poles are fixed by axial parameters")
    {
        for (const double t : {0.1, 0.5, 0.9, 0.99}) {
            const MoebiusParam a(Eigen::Vector3d(0, 0, t));
            CHECK((apply_moebius(a, Eigen::Vector3d(0, 0, 1)) - Eigen::Vector3d(0, 0, 1)).norm() <= 1e-12);
            CHECK((apply_moebius(a, Eigen::Vector3d(0, 0, -1)) - Eigen::Vector3d(0, 0, -1)).norm() <= 1e-12);
        }
    }

    SUBCASE("concentration toward the parameter direction")
    {
        const Eigen::Vector3d e1(1, 0, 0), e3(0, 0, 1);
        double prev = 2.0;
        for (const double t : {0.9, 0.99, 0.999}) {
            const MoebiusParam a(t * e3);
            const double gap = (apply_moebius(a, e1) - e3).norm();
            CHECK(gap < prev);
            prev = gap;
        }
        CHECK(prev <= 2e-3);
    }

    SUBCASE("stays on the sphere")
    {
        std::mt19937 local(5);
        std::uniform_real_distribution<double> radius(0.0, 0.999);
        for (int k = 0; k < 100; ++k) {
            Eigen::Vector3d a = unit_sample(local) * radius(local);
            const Eigen::Vector3d x = unit_sample(local);
            CHECK(std::abs(apply_moebius(MoebiusParam(a), x).norm() - 1.0) <= 1e-10);
        }
    }

    SUBCASE("parameter outside the ball is rejected")
    {
        CHECK_THROWS_AS(MoebiusParam(Eigen::Vector3d(1.0, 0, 0)), Error);
        CHECK_THROWS_AS(MoebiusParam(Eigen::Vector3d(0.8, 0.8, 0)), Error);
    }
}

TEST_CASE("numerically solved inverse matches G_{-a}")
{
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> radius(0.0, 0.9);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Vector3d a = unit_sample(rng) * radius(rng);
        const MoebiusParam param{a};
        const Eigen::Vector3d x = unit_sample(rng);
        const Eigen::Vector3d y = apply_moebius(param, x);

        // damped tangent-space Gauss-Newton on |G_a(z) - y|², multi-start
        Eigen::Vector3d z = y;
        double best = std::numeric_limits<double>::infinity();
        for (const Eigen::Vector3d& start :
             {y, Eigen::Vector3d(-y), Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 0, 0)}) {
            Eigen::Vector3d zc = start;
            Eigen::Vector3d r = apply_moebius(param, zc) - y;
            for (int it = 0; it < 200 && r.norm() > 1e-13; ++it) {
                const Eigen::Vector3d t1 = zc.unitOrthogonal();
                const Eigen::Vector3d t2 = zc.cross(t1);
                Eigen::Matrix<double, 3, 2> jac;
                const double h = 1e-7;
                jac.col(0) = (apply_moebius(param, (zc + h * t1).normalized()) -
                              apply_moebius(param, (zc - h * t1).normalized())) / (2.0 * h);
                jac.col(1) = (apply_moebius(param, (zc + h * t2).normalized()) -
                              apply_moebius(param, (zc - h * t2).normalized())) / (2.0 * h);
                Eigen::Vector2d step = jac.colPivHouseholderQr().solve(-r);
                bool moved = false;
                for (int bt = 0; bt < 30; ++bt) {
                    const Eigen::Vector3d cand = (zc + step[0] * t1 + step[1] * t2).normalized();
                    const Eigen::Vector3d rc = apply_moebius(param, cand) - y;
                    if (rc.norm() < r.norm()) {
                        zc = cand;
                        r = rc;
                        moved = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!moved) break;
            }
            if (r.norm() < best) {
                best = r.norm();
                z = zc;
            }
            if (best <= 1e-13) break;
        }
        CHECK((z - x).norm() <= 1e-8);
        CHECK((apply_moebius(param.inverse(), y) - x).norm() <= 1e-10);
    }
}

TEST_CASE("hersch balancing")
{
    const auto mesh = SurfaceMesh::build_icosphere(4);

    SUBCASE("uniform measure balances at the origin")
    {
        const auto mu = MeasureOnMesh::uniform(mesh);
        const auto result = hersch_balance(mesh, mu);
        CHECK(result.residual <= 1e-10);
        CHECK(result.param.a.norm() <= 1e-8);
    }

    SUBCASE("upper hemisphere restriction balances on the axis")
    {
        Eigen::VectorXd density(mesh.vertex_count());
        for (int i = 0; i < mesh.vertex_count(); ++i)
            density[i] = mesh.vertices()(i, 2) > 0.0 ? 1.0 : 0.0;
        const MeasureOnMesh mu(mesh, density);
        const auto result = hersch_balance(mesh, mu.normalized_unit_mass(mesh));
        CHECK(result.residual <= 1e-10);
        CHECK(result.param.a.head<2>().norm() <= 5e-3);
        CHECK(result.param.a[2] < -0.05);  // pushes mass toward the south
    }

    SUBCASE("antipodal equal atoms balance at the origin")
    {
        // vertex 0 of the icosahedron layout has an antipodal partner
        const Eigen::Vector3d v0 = mesh.vertices().row(0);
        const int anti = mesh.nearest_vertex(-v0);
        REQUIRE((mesh.vertices().row(anti).transpose() + v0).norm() <= 1e-12);
        const MeasureOnMesh mu(mesh, Eigen::VectorXd::Zero(mesh.vertex_count()),
                               {{0, 1.0}, {anti, 1.0}});
        const auto result = hersch_balance(mesh, mu);
        CHECK(result.residual <= 1e-10);
        CHECK(result.param.a.norm() <= 1e-8);
    }

    SUBCASE("single atom raises a degenerate-measure error")
    {
        const MeasureOnMesh mu(mesh, Eigen::VectorXd::Zero(mesh.vertex_count()), {{7, 2.0}});
        CHECK_THROWS_AS(hersch_balance(mesh, mu), Error);
    }
}

TEST_CASE("pushforward pairing")
{
    const auto mesh = SurfaceMesh::build_icosphere(4);
    const auto mu = MeasureOnMesh::uniform(mesh);
    const double mass = mu.total_mass(mesh);
    const Eigen::VectorXd x3 = mesh.vertices().col(2);

    SUBCASE("identity parameter reduces to the plain pairing")
    {
        const double plain = mu.pairing_vector(mesh).dot(x3);
        const double pushed = pair_with_pushforward(mesh, mu, MoebiusParam::identity(), x3);
        CHECK(pushed == doctest::Approx(plain).epsilon(1e-10));
    }

    SUBCASE("constants keep the total mass for any parameter")
    {
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.vertex_count());
        for (const double t : {0.3, 0.7, 0.95}) {
            const MoebiusParam phi(Eigen::Vector3d(0.2 * t, -0.3 * t, t * 0.8));
            CHECK(pair_with_pushforward(mesh, mu, phi, ones) == doctest::Approx(mass).epsilon(1e-12));
        }
    }

    SUBCASE("axial concentration drives the x3 moment to the mass")
    {
        double prev = 0.0;
        for (const double t : {0.5, 0.9, 0.99}) {
            const MoebiusParam phi(Eigen::Vector3d(0, 0, t));
            // brute-force quadrature oracle: evaluate x3 ∘ G_a directly
            const Eigen::VectorXd w = mu.pairing_vector(mesh);
            double oracle = 0.0;
            for (int i = 0; i < mesh.vertex_count(); ++i)
                oracle += w[i] * apply_moebius(phi, mesh.vertices().row(i).transpose())[2];
            const double pushed = pair_with_pushforward(mesh, mu, phi, x3);
            CHECK(pushed == doctest::Approx(oracle).epsilon(5e-3));
            CHECK(pushed > prev);
            prev = pushed;
        }
        CHECK(prev >= 0.95 * mass);
    }

    SUBCASE("torus input is unsupported")
    {
        const auto torus = SurfaceMesh::build_flat_torus({0.0, 1.0}, 8);
        const auto nu = MeasureOnMesh::uniform(torus);
        CHECK_THROWS_AS(
            pair_with_pushforward(torus, nu, MoebiusParam::identity(), Eigen::VectorXd::Ones(64)),
            Error);
    }
}

TEST_CASE("moebius invariance of normalized eigenvalues under refinement")
{
    // not an exact discrete identity: the resampled pushforward converges
    // to the original normalized eigenvalue as the mesh refines
    const MoebiusParam phi(Eigen::Vector3d(0.2, -0.1, 0.25));
    double prev_gap = std::numeric_limits<double>::infinity();
    for (const int level : {2, 3, 4}) {
        const auto mesh = SurfaceMesh::build_icosphere(level);
        Eigen::VectorXd density(mesh.vertex_count());
        for (int i = 0; i < mesh.vertex_count(); ++i)
            density[i] = 1.0 + 0.3 * mesh.vertices()(i, 2) * mesh.vertices()(i, 2);
        const MeasureOnMesh mu(mesh, density);
        const auto base = solve_measure_spectrum(mesh, mu, 1);
        const auto pushed = pushforward_resample(mesh, mu, phi);
        const auto moved = solve_measure_spectrum(mesh, pushed, 1);
        const double gap = std::abs(moved.normalized(1) - base.normalized(1));
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap <= 0.05);
}

TEST_CASE("cap reflection map")
{
    SUBCASE("hemisphere cap mirrors the upper half")
    {
        const auto mesh = SurfaceMesh::build_icosphere(3);
        const SphericalCap cap{Eigen::Vector3d(0, 0, 1), kPi / 2};
        const auto map = cap_reflection_map(cap, mesh);
        for (int i = 0; i < mesh.vertex_count(); ++i) {
            const Eigen::Vector3d v = mesh.vertices().row(i);
            const Eigen::Vector3d expect(v[0], v[1], -std::abs(v[2]));
            CHECK((map.values.row(i).transpose() - expect).norm() <= 1e-10);
        }
    }

    SUBCASE("boundary points are fixed")
    {
        const SphericalCap cap{Eigen::Vector3d(0, 1, 0).normalized(), 0.7};
        Eigen::Vector3d e1 = cap.center.unitOrthogonal();
        Eigen::Vector3d e2 = cap.center.cross(e1);
        for (const double t : {0.0, 1.0, 2.5, 4.0}) {
            const Eigen::Vector3d b = std::cos(cap.radius) * cap.center +
                                      std::sin(cap.radius) * (std::cos(t) * e1 + std::sin(t) * e2);
            CHECK((cap_reflect_point(cap, b) - b).norm() <= 1e-10);
            CHECK((cap_fold_point(cap, b) - b).norm() <= 1e-12);
        }
    }

    SUBCASE("reflection energy identity 2E = 16pi - 4 Area(Z)")
    {
        const auto mesh = SurfaceMesh::build_icosphere(6);
        const auto K = assemble_stiffness(mesh);
        for (const double rho : {kPi / 6, kPi / 3, kPi / 2}) {
            const SphericalCap cap{Eigen::Vector3d(0.3, -0.2, 0.93).normalized(), rho};
            const auto map = cap_reflection_map(cap, mesh);
            const double expected = 16.0 * kPi - 4.0 * cap.area();
            CHECK(2.0 * dirichlet_energy(K, map.values) == doctest::Approx(expected).epsilon(0.02));
        }
    }
}

TEST_CASE("canonical family energy")
{
    const auto mesh = SurfaceMesh::build_flat_torus({0.0, 1.0}, 48);
    const auto clifford = torus_eigenmap({0.0, 1.0}, mesh);
    const auto K = assemble_stiffness(mesh);

    SUBCASE("agrees with the Dirichlet energy at a = 0")
    {
        const double direct = dirichlet_energy(K, clifford.values);
        const double family = canonical_family_energy(mesh, clifford, MoebiusParam::identity(4));
        CHECK(family == doctest::Approx(direct).epsilon(1e-12));
    }

    SUBCASE("strict radial monotonicity")
    {
        Eigen::VectorXd xi = Eigen::VectorXd::Zero(4);
        xi[0] = 1.0 / std::sqrt(2.0);
        xi[2] = -1.0 / std::sqrt(2.0);
        double prev = canonical_family_energy(mesh, clifford, MoebiusParam::identity(4));
        for (const double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double e = canonical_family_energy(mesh, clifford, MoebiusParam(t * xi));
            CHECK(e < prev);
            prev = e;
        }
    }

    SUBCASE("cross-check against the recomposed map")
    {
        Eigen::VectorXd xi = Eigen::VectorXd::Zero(4);
        xi[1] = 1.0;
        for (const double t : {0.2, 0.5}) {
            const MoebiusParam a(t * xi);
            const double closed_form = canonical_family_energy(mesh, clifford, a);
            const auto composed = compose_moebius(a, clifford);
            const double direct = dirichlet_energy(K, composed.values);
            CHECK(closed_form == doctest::Approx(direct).epsilon(5e-3));
        }
    }
}

TEST_CASE("canonical family Hessian")
{
    SUBCASE("Clifford value -4pi^2 per unit direction")
    {
        const auto mesh = SurfaceMesh::build_flat_torus({0.0, 1.0}, 64);
        const auto clifford = torus_eigenmap({0.0, 1.0}, mesh);
        for (int c = 0; c < 4; ++c) {
            const auto h = hessian_H0(mesh, clifford, Eigen::VectorXd::Unit(4, c));
            CHECK(h.moment_form == doctest::Approx(-4.0 * kPi * kPi).epsilon(0.02));
            CHECK(h.normal_form == doctest::Approx(-4.0 * kPi * kPi).epsilon(0.02));
            CHECK(h.harmonic_input);
        }
    }

    SUBCASE("equilateral S5 map is strictly negative in every basis direction")
    {
        const auto mesh = SurfaceMesh::build_flat_torus({0.5, std::sqrt(3.0) / 2.0}, 48);
        const auto map = equilateral_s5_map(mesh);
        for (int c = 0; c < 6; ++c) {
            const auto h = hessian_H0(mesh, map, Eigen::VectorXd::Unit(6, c));
            CHECK(h.moment_form < 0.0);
            CHECK(h.normal_form < 0.0);
            CHECK(std::abs(h.moment_form - h.normal_form) <=
                  0.02 * std::abs(h.moment_form));
        }
    }

    SUBCASE("identity map degenerates to zero at e3")
    {
        const auto mesh = SurfaceMesh::build_icosphere(4);
        const auto id = sphere_identity_map(mesh);
        const auto h = hessian_H0(mesh, id, Eigen::Vector3d(0, 0, 1));
        CHECK(std::abs(h.moment_form) <= 0.15);
    }
}

TEST_CASE("nadirashvili balancing on the uniform sphere")
{
    const auto mesh = SurfaceMesh::build_icosphere(3);
    const auto mu = MeasureOnMesh::uniform(mesh);
    const auto spectrum = solve_measure_spectrum(mesh, mu, 2);
    const auto result = nadirashvili_balance(mesh, mu, spectrum.eigenvectors.col(1));

    CHECK(result.balanced);
    CHECK(result.residual <= 1e-8);

    const double lambda2_bar = spectrum.normalized(2);
    CHECK(result.image_cap.area() <= 4.0 * kPi - 0.25 * lambda2_bar + 0.02 * 4.0 * kPi);
    CHECK(result.energy_times_two >= lambda2_bar - 0.05 * lambda2_bar);
    // reflection identity for the conjugated map
    CHECK(result.energy_times_two ==
          doctest::Approx(16.0 * kPi - 4.0 * result.image_cap.area()).epsilon(0.05));
}
