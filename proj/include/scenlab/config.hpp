#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scenlab/bigfixed.hpp"
#include "scenlab/errors.hpp"
#include "scenlab/ifs.hpp"

namespace scenlab {

/// One map line from a config file: "affine r b", "moebius a b c d", or
/// "diagonal rho lam ax ay".
struct MapSpec {
    std::string kind;
    std::vector<double> coeff;
    int line = 0;
};

struct SystemSpec {
    std::string type = "conformal"; // conformal | diagonal
    std::vector<MapSpec> maps;
    bool present = false;
    int line = 0;
};

struct WeightSpec {
    std::string type = "bernoulli"; // bernoulli | markov
    std::vector<double> p;
    std::vector<std::vector<double>> rows;
    bool present = false;
    int p_line = 0;
    int rows_line = 0;
};

/// Everything an experiment run depends on.  Zero or empty means "use the
/// kind's default"; presence flags mark values the file actually set.
struct ExperimentConfig {
    SystemSpec system, system2;
    WeightSpec weights, weights2;

    std::string kind;
    int depth = 0;
    int point_count = 0;
    int count = 0;
    int orbit_length = 0;
    int precision_bits = 0;
    int word_bound = 10;
    int multiplier_bound = 40;
    int word_length = 40;
    int truncation = 48;
    int compare_level = 0;
    int samples = 8;
    int steps = 0;
    double alpha = 0.5;
    double t0 = 1.0;
    double x = 0.0;
    bool x_set = false;
    double tolerance = 0.05;
    std::string beta;
    MapSpec h_map;
    std::vector<double> theta_list;
    std::vector<int> windows;
    std::vector<int> r_list;
    std::uint64_t seed = 0;
    bool seed_set = false;

    std::string out_dir = "out";
    std::string format = "rows";
    int threads = 1;

    std::string source_text;
};

struct ConfigParse {
    ExperimentConfig config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline bool parse_double(const std::string& s, double* out) {
    char* end = nullptr;
    *out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && !s.empty();
}

inline bool parse_int(const std::string& s, long long* out) {
    char* end = nullptr;
    *out = std::strtoll(s.c_str(), &end, 10);
    return end == s.c_str() + s.size() && !s.empty();
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

} // namespace detail

/// Parse and validate a config file.  Collects every problem it can find
/// instead of stopping at the first; each message carries a line number
/// where one applies.
inline ConfigParse parse_config(const std::string& text) {
    ConfigParse result;
    ExperimentConfig& cfg = result.config;
    cfg.source_text = text;
    std::vector<std::string>& errs = result.errors;

    const std::set<std::string> known_sections{"system",  "system2",    "weights",
                                              "weights2", "experiment", "output"};
    std::set<std::string> seen_sections;
    std::set<std::string> seen_keys; // section.key for scalar keys

    auto err = [&errs](int line, const std::string& msg) {
        errs.push_back("line " + std::to_string(line) + ": " + msg);
    };

    auto number_list = [&](int line, const std::string& key, const std::string& value,
                           std::vector<double>* out) {
        out->clear();
        for (const std::string& tok : detail::split_ws(value)) {
            double v = 0.0;
            if (!detail::parse_double(tok, &v)) {
                err(line, key + ": '" + tok + "' is not a number");
                return false;
            }
            out->push_back(v);
        }
        if (out->empty()) {
            err(line, key + ": empty value");
            return false;
        }
        return true;
    };

    auto map_value = [&](int line, const std::string& value, MapSpec* out) {
        std::vector<std::string> toks = detail::split_ws(value);
        if (toks.empty()) {
            err(line, "map: empty value");
            return false;
        }
        out->kind = toks[0];
        out->line = line;
        out->coeff.clear();
        for (std::size_t i = 1; i < toks.size(); ++i) {
            double v = 0.0;
            if (!detail::parse_double(toks[i], &v)) {
                err(line, "map: '" + toks[i] + "' is not a number");
                return false;
            }
            out->coeff.push_back(v);
        }
        const std::size_t want = out->kind == "affine"     ? 2
                                 : out->kind == "moebius"  ? 4
                                 : out->kind == "diagonal" ? 4
                                                           : 0;
        if (want == 0) {
            err(line, "map: unknown kind '" + out->kind + "' (affine, moebius, diagonal)");
            return false;
        }
        if (out->coeff.size() != want) {
            err(line, "map: " + out->kind + " takes " + std::to_string(want) + " numbers, got " +
                          std::to_string(out->coeff.size()));
            return false;
        }
        return true;
    };

    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t hash = raw.find_first_of("#;");
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string s = detail::trim(raw);
        if (s.empty()) continue;

        if (s.front() == '[') {
            if (s.back() != ']') {
                err(line, "unterminated section header");
                continue;
            }
            section = detail::trim(s.substr(1, s.size() - 2));
            if (!known_sections.count(section)) {
                err(line, "unknown section [" + section + "]");
                section.clear();
                continue;
            }
            if (!seen_sections.insert(section).second) {
                err(line, "duplicate section [" + section + "]");
                continue;
            }
            if (section == "system") cfg.system.present = true, cfg.system.line = line;
            if (section == "system2") cfg.system2.present = true, cfg.system2.line = line;
            if (section == "weights") cfg.weights.present = true;
            if (section == "weights2") cfg.weights2.present = true;
            continue;
        }

        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            err(line, "expected key = value");
            continue;
        }
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string value = detail::trim(s.substr(eq + 1));
        if (section.empty()) {
            err(line, "key '" + key + "' outside any section");
            continue;
        }
        const bool repeatable = key == "map" || key == "row";
        if (!repeatable && !seen_keys.insert(section + "." + key).second) {
            err(line, "duplicate key '" + key + "' in [" + section + "]");
            continue;
        }

        auto want_int = [&](long long lo, long long hi, auto setter) {
            long long v = 0;
            if (!detail::parse_int(value, &v))
                err(line, key + ": '" + value + "' is not an integer");
            else if (v < lo || v > hi)
                err(line, key + ": " + value + " out of range [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
            else
                setter(v);
        };
        auto want_double = [&](auto setter) {
            double v = 0.0;
            if (!detail::parse_double(value, &v))
                err(line, key + ": '" + value + "' is not a number");
            else
                setter(v);
        };

        if (section == "system" || section == "system2") {
            SystemSpec& sys = section == "system" ? cfg.system : cfg.system2;
            if (key == "type") {
                if (value != "conformal" && value != "diagonal")
                    err(line, "type: expected conformal or diagonal, got '" + value + "'");
                else
                    sys.type = value;
            } else if (key == "map") {
                MapSpec m;
                if (map_value(line, value, &m)) sys.maps.push_back(std::move(m));
            } else {
                err(line, "unknown key '" + key + "' in [" + section + "]");
            }
        } else if (section == "weights" || section == "weights2") {
            WeightSpec& w = section == "weights" ? cfg.weights : cfg.weights2;
            if (key == "type") {
                if (value != "bernoulli" && value != "markov")
                    err(line, "type: expected bernoulli or markov, got '" + value + "'");
                else
                    w.type = value;
            } else if (key == "p") {
                if (number_list(line, key, value, &w.p)) w.p_line = line;
            } else if (key == "row") {
                std::vector<double> r;
                if (number_list(line, key, value, &r)) {
                    w.rows.push_back(std::move(r));
                    w.rows_line = line;
                }
            } else {
                err(line, "unknown key '" + key + "' in [" + section + "]");
            }
        } else if (section == "experiment") {
            if (key == "kind") {
                cfg.kind = value;
            } else if (key == "depth") {
                want_int(1, 60, [&](long long v) { cfg.depth = static_cast<int>(v); });
            } else if (key == "point_count") {
                want_int(1, 4096, [&](long long v) { cfg.point_count = static_cast<int>(v); });
            } else if (key == "count") {
                want_int(1, 4096, [&](long long v) { cfg.count = static_cast<int>(v); });
            } else if (key == "orbit_length") {
                want_int(4, 1 << 24, [&](long long v) { cfg.orbit_length = static_cast<int>(v); });
            } else if (key == "precision_bits") {
                want_int(64, 1 << 22,
                         [&](long long v) { cfg.precision_bits = static_cast<int>(v); });
            } else if (key == "word_bound") {
                want_int(1, 64, [&](long long v) { cfg.word_bound = static_cast<int>(v); });
            } else if (key == "multiplier_bound") {
                want_int(1, 1 << 20,
                         [&](long long v) { cfg.multiplier_bound = static_cast<int>(v); });
            } else if (key == "word_length") {
                want_int(1, 4096, [&](long long v) { cfg.word_length = static_cast<int>(v); });
            } else if (key == "truncation") {
                want_int(2, 4096, [&](long long v) { cfg.truncation = static_cast<int>(v); });
            } else if (key == "compare_level") {
                want_int(1, 30, [&](long long v) { cfg.compare_level = static_cast<int>(v); });
            } else if (key == "samples") {
                want_int(1, 4096, [&](long long v) { cfg.samples = static_cast<int>(v); });
            } else if (key == "steps") {
                want_int(1, 60, [&](long long v) { cfg.steps = static_cast<int>(v); });
            } else if (key == "alpha") {
                want_double([&](double v) { cfg.alpha = v; });
            } else if (key == "t0") {
                want_double([&](double v) {
                    if (!(v > 0.0))
                        err(line, "t0: must be positive");
                    else
                        cfg.t0 = v;
                });
            } else if (key == "x") {
                want_double([&](double v) {
                    cfg.x = v;
                    cfg.x_set = true;
                });
            } else if (key == "tolerance") {
                want_double([&](double v) {
                    if (!(v > 0.0))
                        err(line, "tolerance: must be positive");
                    else
                        cfg.tolerance = v;
                });
            } else if (key == "beta") {
                try {
                    BetaSpec::parse(value);
                    cfg.beta = value;
                } catch (const DomainError& e) {
                    err(line, std::string("beta: ") + e.what());
                }
            } else if (key == "h") {
                MapSpec m;
                if (map_value(line, value, &m)) {
                    if (m.kind == "diagonal")
                        err(line, "h: must be a 1-D map");
                    else
                        cfg.h_map = std::move(m);
                }
            } else if (key == "theta") {
                number_list(line, key, value, &cfg.theta_list);
            } else if (key == "windows") {
                std::vector<double> vs;
                if (number_list(line, key, value, &vs)) {
                    cfg.windows.clear();
                    for (double v : vs) {
                        if (v < 1 || v != static_cast<long long>(v)) {
                            err(line, "windows: entries must be positive integers");
                            cfg.windows.clear();
                            break;
                        }
                        cfg.windows.push_back(static_cast<int>(v));
                    }
                }
            } else if (key == "r") {
                std::vector<double> vs;
                if (number_list(line, key, value, &vs)) {
                    cfg.r_list.clear();
                    for (double v : vs) {
                        if (v < 1 || v != static_cast<long long>(v)) {
                            err(line, "r: entries must be positive integers");
                            cfg.r_list.clear();
                            break;
                        }
                        cfg.r_list.push_back(static_cast<int>(v));
                    }
                }
            } else if (key == "seed") {
                long long v = 0;
                if (!detail::parse_int(value, &v) || v < 0)
                    err(line, "seed: '" + value + "' is not a non-negative integer");
                else {
                    cfg.seed = static_cast<std::uint64_t>(v);
                    cfg.seed_set = true;
                }
            } else {
                err(line, "unknown key '" + key + "' in [experiment]");
            }
        } else if (section == "output") {
            if (key == "dir") {
                cfg.out_dir = value;
            } else if (key == "format") {
                if (value != "rows" && value != "structured")
                    err(line, "format: expected rows or structured, got '" + value + "'");
                else
                    cfg.format = value;
            } else if (key == "threads") {
                want_int(1, 256, [&](long long v) { cfg.threads = static_cast<int>(v); });
            } else {
                err(line, "unknown key '" + key + "' in [output]");
            }
        }
    }

    // structural validation (still not fail-fast)
    auto check_system = [&](const SystemSpec& sys, const WeightSpec& w, const char* name) {
        if (!sys.present) return;
        if (sys.maps.empty())
            err(sys.line, std::string(name) + ": needs at least one map line");
        for (const MapSpec& m : sys.maps) {
            const bool planar = m.kind == "diagonal";
            if (planar != (sys.type == "diagonal"))
                err(m.line, std::string("map: ") + m.kind + " does not match system type " +
                                sys.type);
        }
        if (!w.present) {
            errs.push_back(std::string(name) + ": missing weights section");
            return;
        }
        if (w.p.empty()) {
            errs.push_back(std::string(name) + ": weights need a p vector");
            return;
        }
        if (w.p.size() != sys.maps.size())
            err(w.p_line, "p: " + std::to_string(w.p.size()) + " weights for " +
                              std::to_string(sys.maps.size()) + " maps");
        double sum = 0.0;
        for (double v : w.p) {
            if (!(v > 0.0)) err(w.p_line, "p: weights must be positive");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            err(w.p_line, "p: weights in [" + std::string(name == std::string("system") ? "weights" : "weights2") +
                              "] must sum to 1, got " + std::to_string(sum));
        if (w.type == "markov") {
            if (w.rows.size() != w.p.size())
                err(w.rows_line ? w.rows_line : w.p_line,
                    "row: markov weights need one row per symbol");
            for (const auto& r : w.rows) {
                if (r.size() != w.p.size()) {
                    err(w.rows_line, "row: ragged transition matrix");
                    continue;
                }
                double rs = 0.0;
                for (double v : r) rs += v;
                if (std::abs(rs - 1.0) > 1e-9)
                    err(w.rows_line, "row: transition rows must sum to 1, got " +
                                         std::to_string(rs));
            }
        } else if (!w.rows.empty()) {
            err(w.rows_line, "row: only markov weights take transition rows");
        }
    };

    if (!cfg.system.present) errs.push_back("missing [system] section");
    check_system(cfg.system, cfg.weights, "system");
    check_system(cfg.system2, cfg.weights2, "system2");
    if (cfg.weights2.present && !cfg.system2.present)
        errs.push_back("[weights2] given without [system2]");

    return result;
}

/// Requirements that depend on the experiment kind; `kind` may come from the
/// file or the command line.  Returns a list of problems (empty when valid).
inline std::vector<std::string> validate_for_kind(const ExperimentConfig& cfg,
                                                  const std::string& kind) {
    std::vector<std::string> errs;
    const std::set<std::string> kinds{"discretize",  "scenery",   "uniform-scaling",
                                      "prop31",      "dissonance", "normality",
                                      "projection",  "gap"};
    if (!kinds.count(kind)) {
        errs.push_back("unknown experiment kind '" + kind + "'");
        return errs;
    }
    auto need = [&errs, &kind](bool ok, const char* what) {
        if (!ok) errs.push_back(kind + ": missing required " + what);
    };
    if (kind == "scenery") need(cfg.x_set, "x (base point)");
    if (kind == "uniform-scaling" || kind == "normality" || kind == "projection" ||
        kind == "prop31")
        need(cfg.seed_set, "seed");
    if (kind == "uniform-scaling" || kind == "normality") need(cfg.point_count > 0, "point_count");
    if (kind == "normality") {
        need(!cfg.beta.empty(), "beta");
        need(cfg.orbit_length > 0, "orbit_length");
        need(cfg.precision_bits > 0, "precision_bits");
    }
    if (kind == "projection") need(!cfg.theta_list.empty(), "theta");
    if (kind == "gap") {
        const bool planar = cfg.system.type == "diagonal";
        if (cfg.beta.empty() && !cfg.system2.present && !planar)
            errs.push_back("gap: needs beta, a [system2], or a diagonal system");
    }
    return errs;
}

/// Build the library objects a config describes.  Throws DomainError on
/// values that pass surface checks but violate map constraints.
inline IfsSystem build_system(const SystemSpec& sys, const WeightSpec& w) {
    WeightModel model = w.type == "markov" ? WeightModel::markov(w.p, w.rows)
                                           : WeightModel::bernoulli(w.p);
    if (sys.type == "diagonal") {
        std::vector<DiagonalAffineMap2D> maps;
        for (const MapSpec& m : sys.maps)
            maps.push_back(DiagonalAffineMap2D(m.coeff[0], m.coeff[1], m.coeff[2], m.coeff[3]));
        return IfsSystem::diagonal(std::move(maps), std::move(model));
    }
    std::vector<ConformalMap1D> maps;
    for (const MapSpec& m : sys.maps) {
        if (m.kind == "affine")
            maps.push_back(ConformalMap1D::affine(m.coeff[0], m.coeff[1]));
        else
            maps.push_back(ConformalMap1D::moebius(m.coeff[0], m.coeff[1], m.coeff[2],
                                                   m.coeff[3]));
    }
    return IfsSystem::conformal(std::move(maps), std::move(model));
}

inline Map1D build_h(const MapSpec& m) {
    if (m.kind.empty()) return Map1D::identity();
    if (m.kind == "affine") return Map1D::affine(m.coeff[0], m.coeff[1]);
    return Map1D::moebius(m.coeff[0], m.coeff[1], m.coeff[2], m.coeff[3]);
}

} // namespace scenlab
