#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "surface_mesh.hpp"

using namespace specstab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("icosahedron base mesh")
{
    const auto mesh = SurfaceMesh::build_icosphere(0);
    CHECK(mesh.vertex_count() == 12);
    CHECK(mesh.triangle_count() == 20);
    CHECK(mesh.euler_characteristic() == 2);
}

TEST_CASE("icosphere counts at subdivision 2")
{
    const auto mesh = SurfaceMesh::build_icosphere(2);
    CHECK(mesh.vertex_count() == 10 * 16 + 2);
    CHECK(mesh.triangle_count() == 20 * 16);
    for (int i = 0; i < mesh.vertex_count(); ++i)
        CHECK(std::abs(mesh.vertices().row(i).norm() - 1.0) <= 1e-12);
}

TEST_CASE("icosphere area converges to 4pi monotonically")
{
    double prev_area = 0.0;
    int prev_tris = 0;
    for (int s = 0; s <= 5; ++s) {
        const auto mesh = SurfaceMesh::build_icosphere(s);
        if (s > 0) {
            CHECK(mesh.triangle_count() == 4 * prev_tris);
            CHECK(mesh.total_area() > prev_area);
        }
        CHECK(mesh.total_area() < 4.0 * kPi);
        prev_area = mesh.total_area();
        prev_tris = mesh.triangle_count();
    }
    CHECK(prev_area == doctest::Approx(4.0 * kPi).epsilon(1e-3));
}

TEST_CASE("icosphere capacity guard")
{
    CHECK_THROWS_AS(SurfaceMesh::build_icosphere(10), Error);
    CHECK_THROWS_AS(SurfaceMesh::build_icosphere(-1), Error);
}

TEST_CASE("unit-area sphere rescaling")
{
    const auto mesh = SurfaceMesh::build_icosphere(4, true);
    CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(mesh.unit_area_sphere());
}

TEST_CASE("square torus grid")
{
    const auto mesh = SurfaceMesh::build_flat_torus({0.0, 1.0}, 4);
    CHECK(mesh.vertex_count() == 16);
    CHECK(mesh.triangle_count() == 32);
    CHECK(mesh.euler_characteristic() == 0);
    CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equilateral torus has exact unit area")
{
    const auto mesh = SurfaceMesh::build_flat_torus({0.5, std::sqrt(3.0) / 2.0}, 32);
    CHECK(std::abs(mesh.total_area() - 1.0) <= 1e-12);
    // every triangle of the rhombic-unit lattice is equilateral
    const auto& p = mesh.corner_positions(17);
    const double e0 = (p.row(1) - p.row(0)).norm();
    const double e1 = (p.row(2) - p.row(1)).norm();
    const double e2 = (p.row(0) - p.row(2)).norm();
    CHECK(e0 == doctest::Approx(e1).epsilon(1e-12));
    CHECK(e1 == doctest::Approx(e2).epsilon(1e-12));
}

TEST_CASE("degenerate lattice rejected")
{
    CHECK_THROWS_AS(SurfaceMesh::build_flat_torus({0.0, 0.0}, 8), Error);
    CHECK_THROWS_AS(SurfaceMesh::build_flat_torus({0.0, -1.0}, 8), Error);
    CHECK_THROWS_AS(SurfaceMesh::build_flat_torus({0.0, 1.0}, 2), Error);
}

TEST_CASE("sphere geodesic distance")
{
    const auto mesh = SurfaceMesh::build_icosphere(1);
    const Eigen::Vector3d n(0, 0, 1), s(0, 0, -1), e(1, 0, 0);
    CHECK(mesh.geodesic_distance(n, s) == doctest::Approx(kPi));
    CHECK(mesh.geodesic_distance(n, e) == doctest::Approx(kPi / 2));
}

TEST_CASE("torus minimal-image distance")
{
    const auto mesh = SurfaceMesh::build_flat_torus({0.0, 1.0}, 8);
    const Eigen::Vector3d a(0.05, 0.5, 0), b(0.95, 0.5, 0);
    CHECK(mesh.geodesic_distance(a, b) == doctest::Approx(0.1));
}

TEST_CASE("sphere point location reproduces barycentric samples")
{
    const auto mesh = SurfaceMesh::build_icosphere(3);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::Vector3d x(unit(rng), unit(rng), unit(rng));
        if (x.norm() < 1e-3) continue;
        x.normalize();
        const auto loc = mesh.locate_on_sphere(x);
        REQUIRE(loc.tri >= 0);
        CHECK(loc.bary.minCoeff() >= -1e-9);
        CHECK(loc.bary.sum() == doctest::Approx(1.0).epsilon(1e-9));
        Eigen::Vector3d recon = Eigen::Vector3d::Zero();
        for (int c = 0; c < 3; ++c)
            recon += loc.bary[c] * mesh.vertices().row(mesh.triangles()(loc.tri, c)).transpose();
        // radial projection of x onto the flat triangle
        CHECK((recon.normalized() - x).norm() <= 1e-9);
    }
}

TEST_CASE("mesh file round trip and validation")
{
    const auto sphere = SurfaceMesh::build_icosphere(2);
    const std::string path = "test_mesh_roundtrip.json";
    sphere.save(path);
    const auto loaded = SurfaceMesh::load(path);
    CHECK(loaded.vertex_count() == sphere.vertex_count());
    CHECK(loaded.triangle_count() == sphere.triangle_count());
    CHECK(loaded.total_area() == doctest::Approx(sphere.total_area()).epsilon(1e-14));

    const auto torus = SurfaceMesh::build_flat_torus({0.25, 0.9}, 8);
    torus.save(path);
    const auto loaded_torus = SurfaceMesh::load(path);
    CHECK(loaded_torus.total_area() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(loaded_torus.lattice()->c == doctest::Approx(0.25));

    CHECK_THROWS_AS(SurfaceMesh::load("does_not_exist.json"), Error);
    std::remove(path.c_str());
}
