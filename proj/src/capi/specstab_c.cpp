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
#include "specstab.h"

#include <json.hpp>

#include <fstream>
#include <string>

#include "eigensolve.hpp"
#include "experiments.hpp"
#include "moebius.hpp"
#include "report.hpp"

namespace {

thread_local std::string g_last_error;

specstab_status map_code(specstab::ErrorCode code)
{
    using specstab::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidInput: return SPECSTAB_ERR_INVALID_INPUT;
        case ErrorCode::Capacity: return SPECSTAB_ERR_CAPACITY;
        case ErrorCode::Resolution: return SPECSTAB_ERR_RESOLUTION;
        case ErrorCode::Numeric: return SPECSTAB_ERR_NUMERIC;
        case ErrorCode::BalanceFailure: return SPECSTAB_ERR_BALANCE;
        case ErrorCode::RankDeficient: return SPECSTAB_ERR_RANK_DEFICIENT;
        case ErrorCode::UnsupportedTopology: return SPECSTAB_ERR_UNSUPPORTED;
        case ErrorCode::Io: return SPECSTAB_ERR_IO;
    }
    return SPECSTAB_ERR_UNKNOWN;
}

template <typename Fn>
specstab_status guarded(Fn&& fn)
{
    try {
        fn();
        g_last_error.clear();
        return SPECSTAB_OK;
    } catch (const specstab::Error& e) {
        g_last_error = e.what();
        return map_code(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SPECSTAB_ERR_UNKNOWN;
    }
}

}  // namespace

struct specstab_mesh {
    specstab::SurfaceMesh mesh;
};

struct specstab_measure {
    specstab::MeasureOnMesh measure;
    int vertex_count;
};

struct specstab_spectrum {
    specstab::SpectralResult result;
};

struct specstab_report {
    specstab::StabilityReport report;
    std::string summary;
};

extern "C" {

const char* specstab_version(void)
{
    return "specstab 1.0.0";
}

const char* specstab_last_error(void)
{
    return g_last_error.c_str();
}

specstab_status specstab_mesh_create(const char* spec, specstab_mesh** out)
{
    if (!spec || !out) {
        g_last_error = "null argument";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    *out = nullptr;
    return guarded([&] { *out = new specstab_mesh{specstab::mesh_from_spec(spec)}; });
}

specstab_status specstab_mesh_save(const specstab_mesh* mesh, const char* path)
{
    if (!mesh || !path) {
        g_last_error = "null argument";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    return guarded([&] { mesh->mesh.save(path); });
}

int specstab_mesh_vertex_count(const specstab_mesh* mesh)
{
    return mesh ? mesh->mesh.vertex_count() : 0;
}

int specstab_mesh_triangle_count(const specstab_mesh* mesh)
{
    return mesh ? mesh->mesh.triangle_count() : 0;
}

double specstab_mesh_area(const specstab_mesh* mesh)
{
    return mesh ? mesh->mesh.total_area() : 0.0;
}

void specstab_mesh_free(specstab_mesh* mesh)
{
    delete mesh;
}

specstab_status specstab_measure_create(const specstab_mesh* mesh, const char* spec,
                                        uint64_t seed, specstab_measure** out)
{
    if (!mesh || !spec || !out) {
        g_last_error = "null argument";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    *out = nullptr;
    return guarded([&] {
        *out = new specstab_measure{specstab::measure_from_spec(mesh->mesh, spec, seed),
                                    mesh->mesh.vertex_count()};
    });
}

specstab_status specstab_measure_save(const specstab_measure* measure, const char* path)
{
    if (!measure || !path) {
        g_last_error = "null argument";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    return guarded([&] { measure->measure.save(path); });
}

double specstab_measure_total_mass(const specstab_mesh* mesh, const specstab_measure* measure)
{
    if (!mesh || !measure) return 0.0;
    try {
        return measure->measure.total_mass(mesh->mesh);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return 0.0;
    }
}

void specstab_measure_free(specstab_measure* measure)
{
    delete measure;
}

specstab_status specstab_solve(const specstab_mesh* mesh, const specstab_measure* measure, int k,
                               uint64_t seed, specstab_spectrum** out)
{
    if (!mesh || !measure || !out) {
        g_last_error = "null argument";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    *out = nullptr;
    return guarded([&] {
        specstab::EigOptions opts;
        opts.seed = seed;
        *out = new specstab_spectrum{
            specstab::solve_measure_spectrum(mesh->mesh, measure->measure, k, opts)};
    });
}

int specstab_spectrum_count(const specstab_spectrum* spectrum)
{
    return spectrum ? spectrum->result.count() : 0;
}

double specstab_spectrum_lambda(const specstab_spectrum* spectrum, int index)
{
    if (!spectrum || index < 0 || index >= spectrum->result.count()) return 0.0;
    return spectrum->result.lambdas[index];
}

double specstab_spectrum_normalized(const specstab_spectrum* spectrum, int index)
{
    if (!spectrum || index < 0 || index >= spectrum->result.count()) return 0.0;
    return spectrum->result.normalized(index);
}

double specstab_spectrum_mass(const specstab_spectrum* spectrum)
{
    return spectrum ? spectrum->result.mass : 0.0;
}

double specstab_spectrum_residual(const specstab_spectrum* spectrum, int index)
{
    if (!spectrum || index < 0 || index >= spectrum->result.count()) return 0.0;
    return spectrum->result.residuals[index];
}

specstab_status specstab_spectrum_save(const specstab_spectrum* spectrum, const char* path)
{
    if (!spectrum || !path) {
        g_last_error = "null argument";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    return guarded([&] { spectrum->result.save(path); });
}

void specstab_spectrum_free(specstab_spectrum* spectrum)
{
    delete spectrum;
}

specstab_status specstab_hersch_balance(const specstab_mesh* mesh,
                                        const specstab_measure* measure, double a_out[3],
                                        double* residual, int* iterations)
{
    if (!mesh || !measure || !a_out) {
        g_last_error = "null argument";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    return guarded([&] {
        const auto result = specstab::hersch_balance(mesh->mesh, measure->measure);
        for (int c = 0; c < 3; ++c) a_out[c] = result.param.a[c];
        if (residual) *residual = result.residual;
        if (iterations) *iterations = result.iterations;
    });
}

specstab_status specstab_run_audit(const char* name, const char* config_text,
                                   specstab_report** out)
{
    if (!name || !out) {
        g_last_error = "null argument";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    *out = nullptr;
    return guarded([&] {
        const auto cfg = specstab::RunConfig::parse_text(config_text ? config_text : "");
        auto report = specstab::run_experiment(name, cfg);
        int passes = 0;
        for (const auto& row : report.rows) passes += row.pass ? 1 : 0;
        std::string summary = report.experiment + ": " +
                              (report.passed ? "PASS" : "FAIL") +
                              (report.informational ? " (informational)" : "") + " [" +
                              std::to_string(passes) + "/" + std::to_string(report.rows.size()) +
                              " checks]";
        *out = new specstab_report{std::move(report), std::move(summary)};
    });
}

int specstab_report_passed(const specstab_report* report)
{
    return report && report->report.passed ? 1 : 0;
}

int specstab_report_informational(const specstab_report* report)
{
    return report && report->report.informational ? 1 : 0;
}

int specstab_report_row_count(const specstab_report* report)
{
    return report ? static_cast<int>(report->report.rows.size()) : 0;
}

const char* specstab_report_summary(const specstab_report* report)
{
    return report ? report->summary.c_str() : "";
}

specstab_status specstab_report_save_json(const specstab_report* report, const char* path)
{
    if (!report || !path) {
        g_last_error = "null argument";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    return guarded([&] { report->report.save_json(path); });
}

specstab_status specstab_report_save_csv(const specstab_report* report, const char* path)
{
    if (!report || !path) {
        g_last_error = "null argument";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    return guarded([&] { report->report.save_csv(path); });
}

void specstab_report_free(specstab_report* report)
{
    delete report;
}

specstab_status specstab_plotdata(const char* const* report_paths, int count, const char* out_csv)
{
    if (!report_paths || count <= 0 || !out_csv) {
        g_last_error = "plotdata needs at least one report and an output path";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    return guarded([&] {
        std::ofstream out(out_csv);
        if (!out) specstab::fail(specstab::ErrorCode::Io, std::string("cannot write ") + out_csv);
        out << "param,lhs,rhs,margin,pass\n";
        for (int i = 0; i < count; ++i) {
            std::ifstream in(report_paths[i]);
            if (!in)
                specstab::fail(specstab::ErrorCode::Io,
                               std::string("cannot open report ") + report_paths[i]);
            nlohmann::json doc;
            try {
                in >> doc;
            } catch (const std::exception& e) {
                specstab::fail(specstab::ErrorCode::Io,
                               std::string("malformed report ") + report_paths[i] + ": " +
                                   e.what());
            }
            if (!doc.contains("rows") || !doc.contains("experiment"))
                specstab::fail(specstab::ErrorCode::InvalidInput,
                               std::string("not a report file: ") + report_paths[i]);
            const std::string experiment = doc["experiment"].get<std::string>();
            for (const auto& row : doc["rows"]) {
                out << experiment << ":" << row.at("param").get<std::string>() << ","
                    << row.at("lhs").get<std::string>() << ","
                    << row.at("rhs").get<std::string>() << ","
                    << row.at("margin").get<std::string>() << ","
                    << (row.at("pass").get<bool>() ? "true" : "false") << "\n";
            }
        }
    });
}

specstab_status specstab_write_manifest(const char* config_text, uint64_t seed,
                                        int deterministic, const char* path)
{
    if (!path) {
        g_last_error = "null argument";
        return SPECSTAB_ERR_INVALID_INPUT;
    }
    return guarded([&] {
        const auto cfg = specstab::RunConfig::parse_text(config_text ? config_text : "");
        nlohmann::json doc;
        doc["version"] = specstab_version();
        doc["config_hash"] = cfg.hash();
        doc["config"] = cfg.canonical_text();
        doc["seed"] = seed;
        doc["deterministic"] = deterministic != 0;
        std::ofstream out(path);
        if (!out) specstab::fail(specstab::ErrorCode::Io, std::string("cannot write ") + path);
        out << doc.dump(1) << "\n";
    });
}

}  // extern "C"
