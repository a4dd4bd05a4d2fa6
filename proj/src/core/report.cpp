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
#include "report.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace specstab {

std::string format_g12(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

void StabilityReport::add_row(const std::string& param, double lhs, double rhs, bool pass)
{
    rows.push_back({param, lhs, rhs, lhs - rhs, pass});
}

void StabilityReport::set_param(const std::string& key, const std::string& value)
{
    parameters.emplace_back(key, value);
}

void StabilityReport::finalize_pass()
{
    passed = true;
    for (const auto& row : rows) passed = passed && row.pass;
}

void StabilityReport::save_json(const std::string& path) const
{
    nlohmann::json doc;
    doc["experiment"] = experiment;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : parameters) params[k] = v;
    doc["parameters"] = params;
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows) {
        rows_json.push_back({{"param", row.param},
                             {"lhs", format_g12(row.lhs)},
                             {"rhs", format_g12(row.rhs)},
                             {"margin", format_g12(row.margin)},
                             {"pass", row.pass}});
    }
    doc["rows"] = rows_json;
    doc["tolerance"] = format_g12(tolerance);
    doc["passed"] = passed;
    doc["informational"] = informational;
    doc["notes"] = notes;

    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write report file: " + path);
    out << doc.dump(1) << "\n";
}

void StabilityReport::save_csv(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write report file: " + path);
    out << "param,lhs,rhs,margin,pass\n";
    for (const auto& row : rows) {
        out << row.param << "," << format_g12(row.lhs) << "," << format_g12(row.rhs) << ","
            << format_g12(row.margin) << "," << (row.pass ? "true" : "false") << "\n";
    }
}

RunConfig RunConfig::parse_text(const std::string& text)
{
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) cfg.kv_[key] = value;
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str());
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const
{
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const
{
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        fail(ErrorCode::InvalidInput, "config key '" + key + "' is not a number: " + it->second);
    }
}

int RunConfig::get_int(const std::string& key, int fallback) const
{
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        fail(ErrorCode::InvalidInput, "config key '" + key + "' is not an integer: " + it->second);
    }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const
{
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    fail(ErrorCode::InvalidInput, "config key '" + key + "' is not a boolean: " + it->second);
}

std::vector<double> RunConfig::get_list(const std::string& key,
                                        const std::vector<double>& fallback) const
{
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            fail(ErrorCode::InvalidInput, "config key '" + key + "' has a bad list entry: " + item);
        }
    }
    if (out.empty()) return fallback;
    return out;
}

std::string RunConfig::canonical_text() const
{
    std::string out;
    for (const auto& [k, v] : kv_) out += k + "=" + v + "\n";
    return out;
}

std::string RunConfig::hash() const
{
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : canonical_text()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace specstab
