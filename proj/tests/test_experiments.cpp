#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "eigensolve.hpp"
#include "experiments.hpp"
#include "sobolev.hpp"

using namespace specstab;

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("spec string builders")
{
    const auto sphere = mesh_from_spec("icosphere:2");
    CHECK(sphere.vertex_count() == 162);
    const auto unit = mesh_from_spec("icosphere_unit:2");
    CHECK(unit.unit_area_sphere());
    const auto torus = mesh_from_spec("torus:0.5,0.866025403784:16");
    CHECK(torus.topology() == Topology::Torus);
    CHECK_THROWS_AS(mesh_from_spec("icosahedron"), Error);

    const auto mu = measure_from_spec(sphere, "uniform", 1);
    CHECK(mu.total_mass(sphere) > 12.0);
    const auto unit_mu = measure_from_spec(sphere, "unit", 1);
    CHECK(unit_mu.total_mass(sphere) == doctest::Approx(1.0));
    const auto pert = measure_from_spec(sphere, "perturb:3:0:0.2", 1);
    CHECK(pert.density().minCoeff() > 0.0);
    CHECK_THROWS_AS(measure_from_spec(sphere, "perturb:3:0:2.0", 1), Error);
}

TEST_CASE("experiment registry")
{
    CHECK(experiment_names().size() == 9);
    RunConfig cfg;
    CHECK_THROWS_WITH_AS(run_experiment("nope", cfg), doctest::Contains("registered"), Error);
}

TEST_CASE("config parsing and hashing")
{
    const auto cfg = RunConfig::parse_text("level = 4\n# comment\nsweep=0.1,0.2,0.3\nflag=true\n");
    CHECK(cfg.get_int("level", 0) == 4);
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.get_list("sweep", {}).size() == 3);
    CHECK(cfg.get("missing", "fallback") == "fallback");
    const auto cfg2 = RunConfig::parse_text("flag=true\nlevel=4\nsweep=0.1,0.2,0.3\n");
    CHECK(cfg.hash() == cfg2.hash());
}

TEST_CASE("lemma21 audit on a coarse mesh")
{
    RunConfig cfg;
    cfg.set("level", "3");
    cfg.set("trials", "6");
    cfg.set("tol", "5e-3");
    const auto report = lemma21_audit(cfg);
    CHECK(report.passed);
    CHECK(report.rows.size() >= 12);
}

TEST_CASE("sharpness audit slope at moderate resolution")
{
    RunConfig cfg;
    cfg.set("level", "5");
    cfg.set("sweep", "0.05,0.08,0.126,0.2");
    const auto restricted = sharpness_audit(cfg);
    CHECK(restricted.passed);

    cfg.set("kind", "prop72_generic");
    const auto generic = sharpness_audit(cfg);
    CHECK(generic.passed);
}

TEST_CASE("canonical audit at reduced resolution")
{
    RunConfig cfg;
    cfg.set("n", "48");
    const auto report = canonical_audit(cfg);
    CHECK(report.passed);
}

TEST_CASE("jacobi audit")
{
    RunConfig cfg;
    cfg.set("n", "96");
    const auto report = jacobi_audit(cfg);
    CHECK(report.passed);
}

TEST_CASE("density audit at reduced resolution")
{
    RunConfig cfg;
    cfg.set("n", "48");
    const auto report = density_audit(cfg);
    CHECK(report.passed);
}

TEST_CASE("robin audit without the mesh stage")
{
    RunConfig cfg;
    cfg.set("eps", "1e-3,1e-4");
    cfg.set("with_mesh_check", "false");
    const auto report = robin_audit(cfg);
    CHECK(report.passed);
    // the asymptotic ratio rows carry |ratio - 1|
    for (const auto& row : report.rows)
        if (row.param.rfind("eig:", 0) == 0) CHECK(row.rhs <= 0.1);
}

TEST_CASE("audit margins contract across refinement levels")
{
    // |margin(l+1) - margin(l)| shrinks with l for the round-maximum margin
    std::vector<double> margins;
    for (const int level : {3, 4, 5}) {
        const auto mesh = SurfaceMesh::build_icosphere(level);
        const auto spectrum = solve_measure_spectrum(mesh, MeasureOnMesh::uniform(mesh), 1);
        margins.push_back(8.0 * std::numbers::pi - spectrum.normalized(1));
    }
    CHECK(std::abs(margins[2] - margins[1]) < std::abs(margins[1] - margins[0]));
}

TEST_CASE("norm report files")
{
    NormReport report{"w_minus12", 0.25, "exact", ""};
    report.save("norm_report.json");
    const std::string text = slurp("norm_report.json");
    CHECK(text.find("\"bound_type\": \"exact\"") != std::string::npos);
    std::remove("norm_report.json");
}

TEST_CASE("reports serialize and rerun byte-identically")
{
    RunConfig cfg;
    cfg.set("level", "2");
    cfg.set("trials", "3");
    cfg.set("tol", "1e-2");
    cfg.set("with_k2", "false");
    cfg.set("seed", "777");

    const auto a = lemma21_audit(cfg);
    const auto b = lemma21_audit(cfg);
    a.save_json("report_a.json");
    b.save_json("report_b.json");
    a.save_csv("report_a.csv");
    b.save_csv("report_b.csv");
    CHECK(slurp("report_a.json") == slurp("report_b.json"));
    CHECK(slurp("report_a.csv") == slurp("report_b.csv"));
    const std::string csv = slurp("report_a.csv");
    CHECK(csv.rfind("param,lhs,rhs,margin,pass\n", 0) == 0);
    std::remove("report_a.json");
    std::remove("report_b.json");
    std::remove("report_a.csv");
    std::remove("report_b.csv");
}
