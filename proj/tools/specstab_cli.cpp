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

// Command-line front end. Everything goes through the shared C API; the
// CLI owns argument parsing, file placement and exit codes only.
//
// Exit codes: 0 success, 1 check failure, 2 usage/input error, 3 numeric
// failure.

#include <CLI11.hpp>

#include <specstab.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

int exit_code_for(specstab_status status)
{
    switch (status) {
        case SPECSTAB_OK: return 0;
        case SPECSTAB_ERR_CHECK_FAILED: return 1;
        case SPECSTAB_ERR_INVALID_INPUT:
        case SPECSTAB_ERR_CAPACITY:
        case SPECSTAB_ERR_RESOLUTION:
        case SPECSTAB_ERR_UNSUPPORTED:
        case SPECSTAB_ERR_IO: return 2;
        default: return 3;
    }
}

int report_failure(specstab_status status)
{
    std::cerr << "error: " << specstab_last_error() << "\n";
    return exit_code_for(status);
}

struct MeshHandle {
    specstab_mesh* ptr = nullptr;
    ~MeshHandle() { specstab_mesh_free(ptr); }
};

struct MeasureHandle {
    specstab_measure* ptr = nullptr;
    ~MeasureHandle() { specstab_measure_free(ptr); }
};

struct SpectrumHandle {
    specstab_spectrum* ptr = nullptr;
    ~SpectrumHandle() { specstab_spectrum_free(ptr); }
};

struct ReportHandle {
    specstab_report* ptr = nullptr;
    ~ReportHandle() { specstab_report_free(ptr); }
};

std::string config_text_from(const std::string& config_path,
                             const std::vector<std::string>& overrides, uint64_t seed,
                             bool deterministic)
{
    std::string text;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config file " << config_path << "\n";
            std::exit(2);
        }
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
        if (!text.empty() && text.back() != '\n') text += '\n';
    }
    for (const auto& kv : overrides) {
        if (kv.find('=') == std::string::npos) {
            std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
            std::exit(2);
        }
        text += kv + "\n";
    }
    text += "seed=" + std::to_string(seed) + "\n";
    text += std::string("deterministic=") + (deterministic ? "true" : "false") + "\n";
    return text;
}

int thread_budget()
{
    if (const char* env = std::getenv("SPECSTAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

int run_audits(const std::vector<std::string>& names, const std::string& config_text,
               const std::string& out_dir, uint64_t seed, bool deterministic)
{
    std::filesystem::create_directories(out_dir);

    struct Job {
        std::string name;
        specstab_status status = SPECSTAB_OK;
        specstab_report* report = nullptr;
        std::string error;  // captured on the worker thread
    };
    std::vector<Job> jobs;
    for (const auto& n : names) jobs.push_back({n});

    const int budget = thread_budget();
    std::mutex cursor_mutex;
    size_t cursor = 0;
    auto worker = [&] {
        while (true) {
            size_t mine;
            {
                std::lock_guard<std::mutex> lock(cursor_mutex);
                if (cursor >= jobs.size()) return;
                mine = cursor++;
            }
            jobs[mine].status =
                specstab_run_audit(jobs[mine].name.c_str(), config_text.c_str(),
                                   &jobs[mine].report);
            if (jobs[mine].status != SPECSTAB_OK) jobs[mine].error = specstab_last_error();
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::max(1, std::min<int>(budget, static_cast<int>(jobs.size()))); ++t)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    int exit_code = 0;
    for (auto& job : jobs) {
        if (job.status != SPECSTAB_OK) {
            std::cerr << "error: audit " << job.name << ": " << job.error << "\n";
            exit_code = std::max(exit_code, exit_code_for(job.status));
            continue;
        }
        ReportHandle report{job.report};
        const std::string base = out_dir + "/" + job.name + "_report";
        specstab_status rc = specstab_report_save_json(report.ptr, (base + ".json").c_str());
        if (rc == SPECSTAB_OK) rc = specstab_report_save_csv(report.ptr, (base + ".csv").c_str());
        if (rc == SPECSTAB_OK)
            rc = specstab_write_manifest(config_text.c_str(), seed, deterministic ? 1 : 0,
                                         (out_dir + "/" + job.name + "_manifest.json").c_str());
        if (rc != SPECSTAB_OK) {
            std::cerr << "error: " << specstab_last_error() << "\n";
            exit_code = std::max(exit_code, exit_code_for(rc));
            continue;
        }
        std::cout << specstab_report_summary(report.ptr) << "  -> " << base << ".{json,csv}\n";
        const bool ok = specstab_report_passed(report.ptr) != 0 ||
                        specstab_report_informational(report.ptr) != 0;
        if (!ok) exit_code = std::max(exit_code, 1);
    }
    return exit_code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"spectral-geometry toolkit: eigenvalues of measures on surfaces and "
                 "stability diagnostics"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    uint64_t seed = 20260808;
    bool deterministic = false;
    app.add_option("--seed", seed, "random seed for measures and solvers");
    app.add_flag("--deterministic", deterministic,
                 "fixed-seed mode: identical runs are byte-identical");

    // mesh-gen
    auto* mesh_gen = app.add_subcommand("mesh-gen", "construct a mesh and write it to a file");
    std::string mg_spec, mg_out;
    mesh_gen->add_option("--spec", mg_spec, "icosphere:L | icosphere_unit:L | torus:c,d:n")
        ->required();
    mesh_gen->add_option("--out", mg_out, "output mesh file")->required();

    // measure-gen
    auto* measure_gen =
        app.add_subcommand("measure-gen", "construct a measure on a mesh and write it to a file");
    std::string sg_mesh, sg_spec, sg_out;
    measure_gen->add_option("--mesh", sg_mesh, "mesh spec or file")->required();
    measure_gen->add_option("--spec", sg_spec, "uniform | unit | caps:eps:M | perturb:l:m:t | random:amp | file")
        ->required();
    measure_gen->add_option("--out", sg_out, "output measure file")->required();

    // eig
    auto* eig = app.add_subcommand("eig", "solve for the smallest eigenvalues of a measure");
    std::string eig_mesh, eig_measure = "uniform", eig_out;
    int eig_k = 1;
    eig->add_option("--mesh", eig_mesh, "mesh spec or file")->required();
    eig->add_option("--measure", eig_measure, "measure spec or file");
    eig->add_option("--k", eig_k, "number of nonzero eigenvalues");
    eig->add_option("--out", eig_out, "output spectrum file");

    // balance
    auto* balance = app.add_subcommand("balance", "Hersch-balance a sphere measure");
    std::string bal_mesh, bal_measure = "uniform";
    balance->add_option("--mesh", bal_mesh, "sphere mesh spec or file")->required();
    balance->add_option("--measure", bal_measure, "measure spec or file");

    // audit
    auto* audit = app.add_subcommand("audit", "run a registered stability audit");
    std::string audit_name, audit_config, audit_out_dir = ".";
    std::string audit_measure, audit_eps, audit_kind;
    std::vector<std::string> audit_sets;
    audit->add_option("name", audit_name,
                      "lemma21 | hersch | sharpness | concentration | robin | bubbling | "
                      "canonical | jacobi | density | all")
        ->required();
    audit->add_option("--config", audit_config, "key=value config file");
    audit->add_option("--set", audit_sets, "config override key=value (repeatable)");
    audit->add_option("--measure", audit_measure, "measure spec or file for the audited measure");
    audit->add_option("--eps", audit_eps, "comma-separated radius grid");
    audit->add_option("--kind", audit_kind, "audit variant, e.g. prop72_restricted");
    audit->add_option("--out-dir", audit_out_dir, "report output directory");

    // plotdata
    auto* plotdata = app.add_subcommand("plotdata", "flatten report files into one tidy CSV");
    std::vector<std::string> plot_reports;
    std::string plot_out;
    plotdata->add_option("--reports", plot_reports, "report JSON files")->required();
    plotdata->add_option("--out", plot_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (mesh_gen->parsed()) {
        MeshHandle mesh;
        specstab_status rc = specstab_mesh_create(mg_spec.c_str(), &mesh.ptr);
        if (rc != SPECSTAB_OK) return report_failure(rc);
        rc = specstab_mesh_save(mesh.ptr, mg_out.c_str());
        if (rc != SPECSTAB_OK) return report_failure(rc);
        std::printf("mesh %s: %d vertices, %d triangles, area %.12g -> %s\n", mg_spec.c_str(),
                    specstab_mesh_vertex_count(mesh.ptr), specstab_mesh_triangle_count(mesh.ptr),
                    specstab_mesh_area(mesh.ptr), mg_out.c_str());
        return 0;
    }

    if (measure_gen->parsed()) {
        MeshHandle mesh;
        specstab_status rc = specstab_mesh_create(sg_mesh.c_str(), &mesh.ptr);
        if (rc != SPECSTAB_OK) return report_failure(rc);
        MeasureHandle measure;
        rc = specstab_measure_create(mesh.ptr, sg_spec.c_str(), seed, &measure.ptr);
        if (rc != SPECSTAB_OK) return report_failure(rc);
        rc = specstab_measure_save(measure.ptr, sg_out.c_str());
        if (rc != SPECSTAB_OK) return report_failure(rc);
        std::printf("measure %s: total mass %.12g -> %s\n", sg_spec.c_str(),
                    specstab_measure_total_mass(mesh.ptr, measure.ptr), sg_out.c_str());
        return 0;
    }

    if (eig->parsed()) {
        MeshHandle mesh;
        specstab_status rc = specstab_mesh_create(eig_mesh.c_str(), &mesh.ptr);
        if (rc != SPECSTAB_OK) return report_failure(rc);
        MeasureHandle measure;
        rc = specstab_measure_create(mesh.ptr, eig_measure.c_str(), seed, &measure.ptr);
        if (rc != SPECSTAB_OK) return report_failure(rc);
        SpectrumHandle spectrum;
        rc = specstab_solve(mesh.ptr, measure.ptr, eig_k, seed, &spectrum.ptr);
        if (rc != SPECSTAB_OK) return report_failure(rc);
        std::printf("mass = %.12g\n", specstab_spectrum_mass(spectrum.ptr));
        for (int i = 0; i < specstab_spectrum_count(spectrum.ptr); ++i) {
            std::printf("lambda[%d] = %.12g   lambda_bar[%d] = %.12g   residual %.3g\n", i,
                        specstab_spectrum_lambda(spectrum.ptr, i), i,
                        specstab_spectrum_normalized(spectrum.ptr, i),
                        specstab_spectrum_residual(spectrum.ptr, i));
        }
        if (!eig_out.empty()) {
            rc = specstab_spectrum_save(spectrum.ptr, eig_out.c_str());
            if (rc != SPECSTAB_OK) return report_failure(rc);
            std::printf("spectrum -> %s\n", eig_out.c_str());
        }
        return 0;
    }

    if (balance->parsed()) {
        MeshHandle mesh;
        specstab_status rc = specstab_mesh_create(bal_mesh.c_str(), &mesh.ptr);
        if (rc != SPECSTAB_OK) return report_failure(rc);
        MeasureHandle measure;
        rc = specstab_measure_create(mesh.ptr, bal_measure.c_str(), seed, &measure.ptr);
        if (rc != SPECSTAB_OK) return report_failure(rc);
        double a[3] = {0, 0, 0};
        double residual = 0.0;
        int iterations = 0;
        rc = specstab_hersch_balance(mesh.ptr, measure.ptr, a, &residual, &iterations);
        if (rc != SPECSTAB_OK) return report_failure(rc);
        std::printf("a = [%.12g, %.12g, %.12g]\nresidual = %.12g\niterations = %d\n", a[0], a[1],
                    a[2], residual, iterations);
        return 0;
    }

    if (audit->parsed()) {
        if (!audit_measure.empty()) audit_sets.push_back("measure=" + audit_measure);
        if (!audit_eps.empty()) audit_sets.push_back("eps=" + audit_eps);
        if (!audit_kind.empty()) audit_sets.push_back("kind=" + audit_kind);
        const std::string config_text =
            config_text_from(audit_config, audit_sets, seed, deterministic);
        std::vector<std::string> names;
        if (audit_name == "all") {
            names = {"lemma21", "hersch",    "sharpness", "concentration", "robin",
                     "bubbling", "canonical", "jacobi",    "density"};
        } else {
            names = {audit_name};
        }
        return run_audits(names, config_text, audit_out_dir, seed, deterministic);
    }

    if (plotdata->parsed()) {
        std::vector<const char*> paths;
        for (const auto& p : plot_reports) paths.push_back(p.c_str());
        const specstab_status rc =
            specstab_plotdata(paths.data(), static_cast<int>(paths.size()), plot_out.c_str());
        if (rc != SPECSTAB_OK) return report_failure(rc);
        std::printf("plot data -> %s\n", plot_out.c_str());
        return 0;
    }

    return 2;
}
