#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "fem.hpp"

using namespace specstab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("stiffness kernel, symmetry, row sums")
{
    const auto mesh = SurfaceMesh::build_flat_torus({0.3, 0.8}, 12);
    const auto K = assemble_stiffness(mesh);

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.vertex_count());
    CHECK((K * ones).cwiseAbs().maxCoeff() <= 1e-12);

    const Eigen::MatrixXd dense(K);
    CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("torus cotan weights are translation invariant")
{
    const auto mesh = SurfaceMesh::build_flat_torus({0.5, std::sqrt(3.0) / 2.0}, 8);
    const auto K = assemble_stiffness(mesh);
    const int n = 8;
    // weight of the horizontal edge (i,j)-(i+1,j) must be identical everywhere
    const double w00 = K.coeff(0, 1);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            CHECK(K.coeff(j * n + i, j * n + (i + 1) % n) == doctest::Approx(w00).epsilon(1e-12));
}

TEST_CASE("fourier mode Rayleigh quotient on the unit square torus")
{
    const auto mesh = SurfaceMesh::build_flat_torus({0.0, 1.0}, 64);
    const auto K = assemble_stiffness(mesh);
    const auto M = assemble_background_mass(mesh);
    Eigen::VectorXd f(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i)
        f[i] = std::sin(2.0 * kPi * mesh.vertices()(i, 0));
    const double rayleigh = f.dot(K * f) / f.dot(M * f);
    CHECK(rayleigh == doctest::Approx(4.0 * kPi * kPi).epsilon(0.01));
}

TEST_CASE("coordinate function Rayleigh quotient on the sphere")
{
    const auto mesh = SurfaceMesh::build_icosphere(5);
    const auto K = assemble_stiffness(mesh);
    const auto M = assemble_background_mass(mesh);
    const Eigen::VectorXd f = mesh.vertices().col(2);
    CHECK(f.dot(K * f) / f.dot(M * f) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("mass matrix pairings")
{
    const auto mesh = SurfaceMesh::build_icosphere(4);
    const auto mu = MeasureOnMesh::uniform(mesh);
    const auto M = assemble_mass(mesh, mu);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.vertex_count());

    SUBCASE("1ᵀM1 equals the area")
    {
        CHECK(ones.dot(M * ones) == doctest::Approx(mesh.total_area()).epsilon(1e-12));
    }

    SUBCASE("second moment of a coordinate")
    {
        const Eigen::VectorXd x1 = mesh.vertices().col(0);
        CHECK(x1.dot(M * x1) == doctest::Approx(4.0 * kPi / 3.0).epsilon(0.01));
    }

    SUBCASE("pure atom quadratic form")
    {
        const MeasureOnMesh atom(mesh, Eigen::VectorXd::Zero(mesh.vertex_count()), {{11, 2.5}});
        const auto Ma = assemble_mass(mesh, atom);
        Eigen::VectorXd f = mesh.vertices().col(1);
        CHECK(f.dot(Ma * f) == doctest::Approx(2.5 * f[11] * f[11]).epsilon(1e-14));
    }

    SUBCASE("consistency with the measure pairing vector")
    {
        const Eigen::VectorXd p = mu.pairing_vector(mesh);
        CHECK(((M * ones) - p).cwiseAbs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("dirichlet energy of reference maps")
{
    SUBCASE("constant map has zero energy")
    {
        const auto mesh = SurfaceMesh::build_flat_torus({0.0, 1.0}, 8);
        const auto K = assemble_stiffness(mesh);
        VectorField u = VectorField::Zero(mesh.vertex_count(), 3);
        u.col(0).setConstant(1.0);
        CHECK(dirichlet_energy(K, u) == doctest::Approx(0.0).epsilon(1e-14));
    }

    SUBCASE("identity map on the sphere: 2E -> 8pi")
    {
        const auto mesh = SurfaceMesh::build_icosphere(5);
        const auto K = assemble_stiffness(mesh);
        const VectorField u = mesh.vertices();
        CHECK(2.0 * dirichlet_energy(K, u) == doctest::Approx(8.0 * kPi).epsilon(0.01));
    }

    SUBCASE("Clifford-type map on the unit square torus: 2E -> 4pi^2")
    {
        const auto mesh = SurfaceMesh::build_flat_torus({0.0, 1.0}, 64);
        const auto K = assemble_stiffness(mesh);
        VectorField u(mesh.vertex_count(), 4);
        for (int i = 0; i < mesh.vertex_count(); ++i) {
            const double x = mesh.vertices()(i, 0), y = mesh.vertices()(i, 1);
            u.row(i) << std::sin(2 * kPi * y), std::cos(2 * kPi * y),
                std::sin(-2 * kPi * x), std::cos(-2 * kPi * x);
            u.row(i) /= std::sqrt(2.0);
        }
        CHECK(2.0 * dirichlet_energy(K, u) == doctest::Approx(4.0 * kPi * kPi).epsilon(0.01));
    }

    SUBCASE("energy is translation invariant")
    {
        const auto mesh = SurfaceMesh::build_icosphere(3);
        const auto K = assemble_stiffness(mesh);
        VectorField u = mesh.vertices();
        const double e0 = dirichlet_energy(K, u);
        u.col(1).array() += 3.7;
        CHECK(dirichlet_energy(K, u) == doctest::Approx(e0).epsilon(1e-12));
    }
}

TEST_CASE("energy density pairing sums to 2E")
{
    const auto mesh = SurfaceMesh::build_icosphere(3);
    const auto K = assemble_stiffness(mesh);
    const VectorField u = mesh.vertices();
    const Eigen::VectorXd pairing = energy_density_pairing(mesh, u);
    CHECK(pairing.sum() == doctest::Approx(2.0 * dirichlet_energy(K, u)).epsilon(1e-12));
}

TEST_CASE("degenerate triangle rejected with its index")
{
    const std::string path = "test_degenerate_mesh.json";
    {
        std::ofstream out(path);
        out << R"({"topology":"torus","lattice":{"c":0.0,"d":1.0},
                 "vertices":[[0,0],[0.2,0],[0,0.2],[0.1,0]],
                 "triangles":[[0,1,2],[1,3,2],[3,0,2],[0,3,1]]})";
    }
    CHECK_THROWS_WITH_AS(SurfaceMesh::load(path), doctest::Contains("degenerate triangle"), Error);
    std::remove(path.c_str());
}

TEST_CASE("operator coordinate-list export")
{
    const auto mesh = SurfaceMesh::build_flat_torus({0.0, 1.0}, 4);
    const auto K = assemble_stiffness(mesh);
    const std::string path = "test_operator.coo";
    save_operator_coo(K, path);
    std::ifstream in(path);
    int rows, cols;
    long nnz;
    in >> rows >> cols >> nnz;
    CHECK(rows == mesh.vertex_count());
    CHECK(nnz == K.nonZeros());
    std::remove(path.c_str());
}
