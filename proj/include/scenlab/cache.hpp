#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "scenlab/dyadic_measure.hpp"
#include "scenlab/ifs.hpp"
#include "scenlab/report.hpp"

namespace scenlab {

constexpr std::uint32_t kCacheFormatVersion = 1;

/// Content hash of (system, weights, depth, format version): any change to a
/// map coefficient, weight, transition row, depth, or the on-disk format
/// yields a different key.
inline std::string measure_cache_key(const IfsSystem& sys, int depth) {
    std::string s = "v" + std::to_string(kCacheFormatVersion) + ";d" + std::to_string(depth) +
                    ";dim" + std::to_string(sys.dimension()) + ";";
    for (std::size_t i = 0; i < sys.size(); ++i) {
        if (sys.dimension() == 2) {
            const DiagonalAffineMap2D& m = sys.map2(static_cast<int>(i));
            s += "m " + fmt(m.rho) + " " + fmt(m.lam) + " " + fmt(m.ax) + " " + fmt(m.ay) + ";";
        } else {
            const Map1D m = sys.map1(static_cast<int>(i)).raw();
            s += "m " + fmt(m.a) + " " + fmt(m.b) + " " + fmt(m.c) + " " + fmt(m.d) + ";";
        }
    }
    const WeightModel& w = sys.weights();
    s += w.kind() == WeightModel::Kind::markov ? "markov;" : "bernoulli;";
    for (double v : w.initial()) s += fmt(v) + " ";
    if (w.kind() == WeightModel::Kind::markov)
        for (std::size_t i = 0; i < w.alphabet(); ++i) {
            s += ";r";
            for (double v : w.row(static_cast<int>(i))) s += " " + fmt(v);
        }
    return hash_hex(fnv1a(s.data(), s.size()));
}

namespace detail {

template <typename T> void put(std::string& out, const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    out.append(p, sizeof(T));
}

template <typename T> bool get(const std::string& in, std::size_t* at, T* v) {
    if (*at + sizeof(T) > in.size()) return false;
    std::memcpy(v, in.data() + *at, sizeof(T));
    *at += sizeof(T);
    return true;
}

} // namespace detail

/// Serialize a measure under `dir/<key>.dyad`.  The format is a flat record
/// dump: magic, version, box, level, then (i, j, mass) triples in key order.
inline void cache_measure(const DyadicMeasure& mu, const std::string& key,
                          const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::string bytes;
    bytes += "DYAD";
    detail::put(bytes, kCacheFormatVersion);
    detail::put(bytes, static_cast<std::uint8_t>(mu.dim()));
    detail::put(bytes, static_cast<std::int32_t>(mu.level()));
    detail::put(bytes, mu.box().lo[0]);
    detail::put(bytes, mu.box().lo[1]);
    detail::put(bytes, mu.box().size);
    detail::put(bytes, static_cast<std::uint64_t>(mu.cells().size()));
    for (const auto& [k, m] : mu.cells()) {
        detail::put(bytes, static_cast<std::int64_t>(k.i));
        detail::put(bytes, static_cast<std::int64_t>(k.j));
        detail::put(bytes, m);
    }
    std::ofstream out(fs::path(dir) / (key + ".dyad"), std::ios::binary);
    if (!out) throw ConfigError("cannot write cache entry in " + dir);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

/// Load a cached measure; absent file is a silent miss, a damaged one is a
/// miss with a warning message so a rebuild can proceed.
inline std::optional<DyadicMeasure> load_measure(const std::string& key, const std::string& dir,
                                                 std::string* warning = nullptr) {
    namespace fs = std::filesystem;
    const fs::path path = fs::path(dir) / (key + ".dyad");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    auto damaged = [&](const char* why) -> std::optional<DyadicMeasure> {
        if (warning) *warning = "cache entry " + path.string() + ": " + why + "; rebuilding";
        return std::nullopt;
    };
    if (bytes.size() < 4 || bytes.compare(0, 4, "DYAD") != 0) return damaged("bad magic");
    std::size_t at = 4;
    std::uint32_t version = 0;
    if (!detail::get(bytes, &at, &version)) return damaged("truncated header");
    if (version != kCacheFormatVersion) return damaged("format version mismatch");
    std::uint8_t dim = 0;
    std::int32_t level = 0;
    double lo0 = 0.0, lo1 = 0.0, size = 0.0;
    std::uint64_t count = 0;
    if (!detail::get(bytes, &at, &dim) || !detail::get(bytes, &at, &level) ||
        !detail::get(bytes, &at, &lo0) || !detail::get(bytes, &at, &lo1) ||
        !detail::get(bytes, &at, &size) || !detail::get(bytes, &at, &count))
        return damaged("truncated header");
    if (dim != 1 && dim != 2) return damaged("bad dimension");
    CellTable table;
    for (std::uint64_t n = 0; n < count; ++n) {
        std::int64_t i = 0, j = 0;
        double m = 0.0;
        if (!detail::get(bytes, &at, &i) || !detail::get(bytes, &at, &j) ||
            !detail::get(bytes, &at, &m))
            return damaged("truncated records");
        table[{i, j}] = m;
    }
    if (at != bytes.size()) return damaged("trailing bytes");
    try {
        return DyadicMeasure(Box{dim, {lo0, lo1}, size}, level, std::move(table), false);
    } catch (const Error& e) {
        return damaged(e.what());
    }
}

} // namespace scenlab
