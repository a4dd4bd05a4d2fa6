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
#pragma once

#include <map>
#include <string>
#include <vector>

#include "errors.hpp"

namespace specstab {

/// Every floating-point value printed by the toolkit carries 12
/// significant digits so regression diffs stay meaningful.
std::string format_g12(double value);

struct ReportRow {
    std::string param;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // lhs - rhs
    bool pass = false;
};

/// Two sides of one of the quantitative statements, with enough
/// provenance to reproduce the numbers.
struct StabilityReport {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<ReportRow> rows;
    double tolerance = 0.0;
    bool passed = false;
    bool informational = false;
    std::vector<std::string> notes;

    void add_row(const std::string& param, double lhs, double rhs, bool pass);
    void add_note(const std::string& note) { notes.push_back(note); }
    void set_param(const std::string& key, const std::string& value);
    void finalize_pass();  // passed = all rows pass (or informational)

    void save_json(const std::string& path) const;
    void save_csv(const std::string& path) const;
};

/// Flat key=value configuration with typed getters; unknown keys are
/// kept verbatim so sweep drivers can round-trip them.
class RunConfig {
public:
    RunConfig() = default;
    static RunConfig parse_text(const std::string& text);  // key=value lines
    static RunConfig load(const std::string& path);

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }
    std::string canonical_text() const;
    std::string hash() const;  // FNV-1a of the canonical text

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace specstab
