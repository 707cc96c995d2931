#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "scenlab/errors.hpp"

namespace scenlab {

using Json = nlohmann::ordered_json;

inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 1469598103934665603ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Hash of the config text plus the effective seed; echoed in every report
/// so outputs can be traced back to their inputs.
inline std::string config_hash(const std::string& text, std::uint64_t seed) {
    std::uint64_t h = fnv1a(text.data(), text.size());
    h = fnv1a(&seed, sizeof(seed), h);
    return hash_hex(h);
}

/// Fixed decimal rendering so reruns write byte-identical files.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(std::int64_t v) { return std::to_string(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "1" : "0"; }

struct RowFile {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct ExperimentReport {
    Json document;
    std::vector<RowFile> files;
    std::string error; // empty on success; failures still carry partial data
    std::vector<std::string> notes; // stderr-only provenance (cache hits etc.)
    bool ok() const { return error.empty(); }
};

inline std::string csv_text(const RowFile& f) {
    std::string out;
    for (std::size_t i = 0; i < f.header.size(); ++i) {
        if (i) out += ',';
        out += f.header[i];
    }
    out += '\n';
    for (const auto& row : f.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

/// Write report.json plus every row file under `dir`, creating it if needed.
inline void write_report(const ExperimentReport& rep, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "report.json", std::ios::binary);
        if (!out) throw ConfigError("cannot write report in " + dir);
        out << rep.document.dump(2) << '\n';
    }
    for (const RowFile& f : rep.files) {
        std::ofstream out(fs::path(dir) / f.name, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + f.name + " in " + dir);
        out << csv_text(f);
    }
}

} // namespace scenlab
