#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eigensolve.hpp"

using namespace specstab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("round sphere spectrum")
{
    const auto mesh = SurfaceMesh::build_icosphere(5);
    const auto mu = MeasureOnMesh::uniform(mesh);
    const auto result = solve_measure_spectrum(mesh, mu, 5);

    CHECK(result.lambdas[0] <= 1e-8 * result.lambdas[1]);
    for (int i = 1; i <= 3; ++i)
        CHECK(result.lambdas[i] == doctest::Approx(2.0).epsilon(0.01));
    CHECK(result.normalized(1) == doctest::Approx(8.0 * kPi).epsilon(0.01));
    CHECK(result.normalized(2) == doctest::Approx(8.0 * kPi).epsilon(0.01));
    // degree-2 harmonics start at index 4 and distinguish the indexing
    CHECK(result.lambdas[4] == doctest::Approx(6.0).epsilon(0.01));
    CHECK(result.normalized(4) == doctest::Approx(24.0 * kPi).epsilon(0.01));

    for (int i = 0; i < result.count(); ++i) CHECK(result.residuals[i] <= 1e-8);
}

TEST_CASE("eigenvectors are M-orthonormal")
{
    const auto mesh = SurfaceMesh::build_icosphere(3);
    const auto mu = MeasureOnMesh::uniform(mesh);
    const auto M = assemble_mass(mesh, mu);
    const auto result = solve_measure_spectrum(mesh, mu, 4);
    const Eigen::MatrixXd gram =
        result.eigenvectors.transpose() * M * result.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("square torus fundamental tone")
{
    const auto mesh = SurfaceMesh::build_flat_torus({0.0, 1.0}, 64);
    const auto mu = MeasureOnMesh::uniform(mesh);
    const auto result = solve_measure_spectrum(mesh, mu, 1);
    CHECK(result.normalized(1) == doctest::Approx(4.0 * kPi * kPi).epsilon(0.01));
}

TEST_CASE("equilateral torus fundamental tone")
{
    const auto mesh = SurfaceMesh::build_flat_torus({0.5, std::sqrt(3.0) / 2.0}, 64);
    const auto mu = MeasureOnMesh::uniform(mesh);
    const auto result = solve_measure_spectrum(mesh, mu, 1);
    CHECK(result.normalized(1) == doctest::Approx(8.0 * kPi * kPi / std::sqrt(3.0)).epsilon(0.01));
}

TEST_CASE("normalized eigenvalues are scale invariant")
{
    const auto mesh = SurfaceMesh::build_icosphere(3);
    Eigen::VectorXd density(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i)
        density[i] = 1.0 + 0.3 * mesh.vertices()(i, 2) * mesh.vertices()(i, 2);
    const MeasureOnMesh mu(mesh, density);
    const auto base = solve_measure_spectrum(mesh, mu, 2);
    const auto scaled = solve_measure_spectrum(mesh, mu.scaled(37.0), 2);
    for (int i = 1; i <= 2; ++i) {
        CHECK(std::abs(scaled.normalized(i) - base.normalized(i)) <=
              1e-10 * base.normalized(i));
        CHECK(scaled.lambdas[i] == doctest::Approx(base.lambdas[i] / 37.0).epsilon(1e-9));
    }
}

TEST_CASE("single atom cannot support a first eigenvalue")
{
    const auto mesh = SurfaceMesh::build_icosphere(2);
    const MeasureOnMesh atom(mesh, Eigen::VectorXd::Zero(mesh.vertex_count()), {{5, 1.0}});
    CHECK_THROWS_AS(solve_measure_spectrum(mesh, atom, 1), Error);
    try {
        solve_measure_spectrum(mesh, atom, 1);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
    }
}

TEST_CASE("atomic measures at all vertices are solvable")
{
    // lumped(ish) measure: atoms only, no density
    const auto mesh = SurfaceMesh::build_icosphere(2);
    std::vector<Atom> atoms;
    for (int i = 0; i < mesh.vertex_count(); ++i)
        atoms.push_back({i, mesh.vertex_areas()[i]});
    const MeasureOnMesh mu(mesh, Eigen::VectorXd::Zero(mesh.vertex_count()), atoms);
    const auto result = solve_measure_spectrum(mesh, mu, 3);
    CHECK(result.lambdas[1] == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("adding an atom never increases a fixed Rayleigh quotient")
{
    const auto mesh = SurfaceMesh::build_icosphere(3);
    const auto mu = MeasureOnMesh::uniform(mesh);
    const auto K = assemble_stiffness(mesh);
    const auto M0 = assemble_mass(mesh, mu);
    std::mt19937 rng(11);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd f(mesh.vertex_count());
        for (int i = 0; i < f.size(); ++i) f[i] = gauss(rng);
        const int v = static_cast<int>(rng() % mesh.vertex_count());
        const auto M1 = assemble_mass(mesh, mu.with_atom(v, 0.5));
        const double num = f.dot(K * f);
        CHECK(num / f.dot(M1 * f) <= num / f.dot(M0 * f) + 1e-14);
    }
}

TEST_CASE("solver is deterministic under a fixed seed")
{
    const auto mesh = SurfaceMesh::build_icosphere(3);
    const auto mu = MeasureOnMesh::uniform(mesh);
    EigOptions opts;
    opts.seed = 424242;
    const auto a = solve_measure_spectrum(mesh, mu, 3, opts);
    const auto b = solve_measure_spectrum(mesh, mu, 3, opts);
    for (int i = 0; i < a.count(); ++i) {
        CHECK(a.lambdas[i] == b.lambdas[i]);
        CHECK((a.eigenvectors.col(i) - b.eigenvectors.col(i)).cwiseAbs().maxCoeff() == 0.0);
    }
}
