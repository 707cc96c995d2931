#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scenlab/cache.hpp"
#include "scenlab/config.hpp"
#include "scenlab/discretize.hpp"
#include "scenlab/experiments.hpp"
#include "scenlab/report.hpp"
#include "scenlab/sampling.hpp"
#include "scenlab/scenery.hpp"

namespace scenlab {

namespace detail {

inline Json slope_json(const SlopeEstimate& s) {
    Json j;
    j["slope"] = s.slope;
    j["levels"] = s.levels;
    j["values"] = s.values;
    j["ratios"] = s.ratios;
    return j;
}

inline Json gap_json(const GapResult& g) {
    Json j;
    j["gap"] = g.gap;
    std::string wa, wb;
    for (int k : g.word_a) wa += std::to_string(k);
    for (int k : g.word_b) wb += std::to_string(k);
    j["word_a"] = wa;
    j["word_b"] = wb;
    j["multiplier"] = g.multiplier;
    j["doubled_gap"] = g.doubled_gap;
    j["shrank_on_doubling"] = g.shrank_on_doubling;
    return j;
}

inline std::vector<std::string> provenance_header(std::initializer_list<const char*> payload) {
    std::vector<std::string> h{"experiment", "depth", "scale", "point_id", "seed"};
    for (const char* c : payload) h.push_back(c);
    return h;
}

struct RowFiller {
    const ExperimentConfig& cfg;
    RowFile& file;
    int depth;
    template <typename Scale, typename... Fields>
    void add(Scale scale, int point_id, Fields... payload) {
        std::vector<std::string> row{cfg.kind, fmt(depth), fmt(scale), fmt(point_id),
                                     fmt(cfg.seed)};
        (row.push_back(fmt(payload)), ...);
        file.rows.push_back(std::move(row));
    }
};

inline void run_discretize(const ExperimentConfig& cfg, const IfsSystem& sys,
                           ExperimentReport& rep) {
    const int depth = cfg.depth ? cfg.depth : 16;
    const std::string key = measure_cache_key(sys, depth);
    const std::string cache_dir = cfg.out_dir + "/cache";
    std::string warn;
    std::optional<DyadicMeasure> cached = load_measure(key, cache_dir, &warn);
    if (!warn.empty()) rep.notes.push_back(warn);
    rep.notes.push_back(cached ? "cache hit " + key : "cache miss " + key);
    const DyadicMeasure mu = cached ? *cached : discretize(sys, depth).measure;
    if (!cached) cache_measure(mu, key, cache_dir);

    Json& doc = rep.document;
    doc["depth"] = depth;
    doc["cache_key"] = key;
    doc["level"] = mu.level();
    doc["dim"] = mu.dim();
    doc["support"] = mu.support_size();
    doc["total_mass"] = mu.total_mass();

    RowFile f{"cells.csv", provenance_header({"i", "j", "mass"}), {}};
    RowFiller rows{cfg, f, depth};
    for (const auto& [k, m] : mu.cells()) rows.add(mu.cell_side(), 0, k.i, k.j, m);
    rep.files.push_back(std::move(f));
}

inline void run_scenery(const ExperimentConfig& cfg, const IfsSystem& sys,
                        ExperimentReport& rep) {
    const int compare = cfg.compare_level ? cfg.compare_level : kFrameCompareLevel;
    const int count = cfg.count ? cfg.count : 8;
    const MeasureDistribution d = t0_scenery(sys, cfg.x, cfg.t0, count, compare);

    double mean = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) {
            mean += lp_distance(d.atoms[i], d.atoms[j]);
            ++pairs;
        }
    if (pairs) mean /= pairs;

    Json& doc = rep.document;
    doc["x"] = cfg.x;
    doc["t0"] = cfg.t0;
    doc["frames"] = count;
    doc["compare_level"] = compare;
    doc["mean_pairwise_lp"] = mean;

    RowFile f{"frames.csv", provenance_header({"time", "i", "mass"}), {}};
    RowFiller rows{cfg, f, compare};
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double u = static_cast<double>(k + 1) * cfg.t0;
        for (const auto& [key, m] : d.atoms[k].cells())
            rows.add(d.atoms[k].cell_side(), static_cast<int>(k), u, key.i, m);
    }
    rep.files.push_back(std::move(f));
}

inline void run_uniform_scaling(const ExperimentConfig& cfg, const IfsSystem& sys,
                                ExperimentReport& rep) {
    const int compare = cfg.compare_level ? cfg.compare_level : kFrameCompareLevel;
    const std::vector<int> windows = cfg.windows.empty() ? std::vector<int>{8, 16, 32}
                                                         : cfg.windows;
    const auto words = sample_words(sys, cfg.word_length, cfg.point_count, cfg.seed);
    std::vector<double> xs;
    for (const auto& w : words) xs.push_back(w.x);

    Json& doc = rep.document;
    doc["point_count"] = cfg.point_count;
    doc["compare_level"] = compare;
    doc["points"] = xs;

    RowFile f{"meta.csv", provenance_header({"j", "distance"}), {}};
    RowFiller rows{cfg, f, compare};
    std::vector<double> means;
    Json per_window = Json::array();
    for (int T : windows) {
        const UniformScalingResult r = uniform_scaling_statistic(sys, xs, T, compare);
        means.push_back(r.mean);
        Json w;
        w["T"] = T;
        w["mean"] = r.mean;
        per_window.push_back(std::move(w));
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = i + 1; j < xs.size(); ++j)
                rows.add(T, static_cast<int>(i), static_cast<int>(j), r.pairwise[i][j]);
    }
    doc["windows"] = per_window;
    bool decreasing = means.size() > 1;
    for (std::size_t i = 1; i < means.size(); ++i)
        if (!(means[i] < means[i - 1])) decreasing = false;
    doc["strictly_decreasing"] = decreasing;
    doc["final_below_half_first"] =
        means.size() > 1 && means.back() < 0.5 * means.front();
    rep.files.push_back(std::move(f));
}

inline void run_prop31(const ExperimentConfig& cfg, const IfsSystem& sys,
                       ExperimentReport& rep) {
    const int depth = cfg.depth ? cfg.depth : 14;
    const int n = cfg.steps ? cfg.steps : 8;
    const DyadicMeasure mu = discretize(sys, depth).measure;
    Prop31Options opt;
    opt.samples = cfg.samples;
    opt.seed = cfg.seed;
    if (cfg.compare_level) opt.compare_level = cfg.compare_level;
    const Prop31Certificate c = prop31_certificate(mu, MapMixture::identity_atom(), n,
                                                   cfg.alpha, opt);

    Json& doc = rep.document;
    doc["depth"] = depth;
    doc["n"] = n;
    doc["alpha"] = cfg.alpha;
    doc["samples"] = cfg.samples;
    doc["condition1"] = c.condition1;
    doc["condition2"] = c.condition2;
    doc["kl_total"] = c.kl_total;
    doc["identity_residual"] = c.identity_residual;
    doc["scenery_gap"] = c.scenery_gap;
    doc["scenery_gap_stderr"] = c.scenery_gap_stderr;

    RowFile f{"certificate.csv", provenance_header({"mass"}), {}};
    RowFiller rows{cfg, f, depth};
    for (std::size_t i = 0; i < c.condition1_masses.size(); ++i)
        rows.add(cfg.alpha, static_cast<int>(i), c.condition1_masses[i]);
    rep.files.push_back(std::move(f));
}

inline void run_dissonance(const ExperimentConfig& cfg, const IfsSystem& sys,
                           ExperimentReport& rep) {
    const int depth = cfg.depth ? cfg.depth : 16;
    const IfsSystem sys_b =
        cfg.system2.present ? build_system(cfg.system2, cfg.weights2) : sys;
    const DissonanceReport r =
        dissonance_experiment(sys, sys_b, depth, cfg.tolerance, cfg.word_bound);

    Json& doc = rep.document;
    doc["depth"] = depth;
    doc["tolerance"] = cfg.tolerance;
    doc["self_convolution"] = !cfg.system2.present;
    doc["dim_a"] = slope_json(r.dim_a);
    doc["dim_b"] = slope_json(r.dim_b);
    doc["dim_conv"] = slope_json(r.dim_conv);
    doc["predicted"] = r.predicted;
    doc["dissonate"] = r.dissonate;
    doc["gap"] = gap_json(r.gap);

    RowFile f{"dims.csv", provenance_header({"entropy", "ratio"}), {}};
    RowFiller rows{cfg, f, depth};
    const SlopeEstimate* est[3] = {&r.dim_a, &r.dim_b, &r.dim_conv};
    for (int which = 0; which < 3; ++which)
        for (std::size_t i = 0; i < est[which]->levels.size(); ++i)
            rows.add(est[which]->levels[i], which, est[which]->values[i],
                     est[which]->ratios[i]);
    rep.files.push_back(std::move(f));
}

inline void run_normality(const ExperimentConfig& cfg, const IfsSystem& sys,
                          ExperimentReport& rep) {
    const NormalityReport r = normality_experiment(
        sys, build_h(cfg.h_map), BetaSpec::parse(cfg.beta), cfg.point_count, cfg.orbit_length,
        cfg.precision_bits, cfg.seed, cfg.word_length, cfg.truncation);

    Json& doc = rep.document;
    doc["beta"] = cfg.beta;
    doc["parry_reference"] = r.parry_reference;
    doc["precision_bits"] = r.precision_bits;
    doc["orbit_length"] = r.orbit_length;
    doc["improved"] = r.improved;
    doc["gap"] = gap_json(r.gap);
    Json points = Json::array();
    for (const auto& row : r.rows) {
        Json p;
        p["point_id"] = row.point_id;
        p["start"] = row.start;
        p["extreme"] = row.extreme;
        p["probes"] = row.probes;
        points.push_back(std::move(p));
    }
    doc["points"] = points;

    RowFile f{"points.csv", provenance_header({"star"}), {}};
    RowFiller rows{cfg, f, cfg.word_length};
    for (const auto& row : r.rows)
        for (std::size_t k = 0; k < row.lengths.size(); ++k)
            rows.add(row.lengths[k], row.point_id, row.star[k]);
    rep.files.push_back(std::move(f));
}

inline void run_projection(const ExperimentConfig& cfg, const IfsSystem& sys,
                           ExperimentReport& rep) {
    const int depth = cfg.depth ? cfg.depth : 16;
    const int points = cfg.point_count ? cfg.point_count : 8;
    const std::vector<int> r_list = cfg.r_list.empty() ? std::vector<int>{2, 4, 6} : cfg.r_list;
    const ProjectionReport r = projection_experiment(sys, cfg.theta_list, depth, cfg.tolerance,
                                                     points, cfg.seed, r_list);

    Json& doc = rep.document;
    doc["depth"] = depth;
    doc["tolerance"] = cfg.tolerance;
    doc["ssc_separated"] = r.ssc.separated;
    doc["chi_x"] = r.spectrum.chi_x;
    doc["chi_y"] = r.spectrum.chi_y;
    doc["spectrum_simple"] = r.spectrum.simple;
    doc["axis_gap"] = gap_json(r.axis_gap);
    doc["dim2d"] = slope_json(r.dim2d);
    int passed = 0, decreasing = 0;
    for (const auto& a : r.angles) passed += a.pass;
    for (const auto& s : r.slices) decreasing += s.decreasing;
    doc["angles_passed"] = passed;
    doc["slices_decreasing"] = decreasing;

    RowFile fa{"angles.csv", provenance_header({"theta", "dim", "principal", "pass"}), {}};
    RowFiller ra{cfg, fa, depth};
    for (std::size_t i = 0; i < r.angles.size(); ++i)
        ra.add(r.angles[i].theta, static_cast<int>(i), r.angles[i].theta,
               r.angles[i].dim.slope, r.angles[i].principal, r.angles[i].pass);
    rep.files.push_back(std::move(fa));

    RowFile fs{"slices.csv", provenance_header({"x", "distance", "decreasing"}), {}};
    RowFiller rs{cfg, fs, depth};
    for (const auto& row : r.slices)
        for (std::size_t k = 0; k < row.r_list.size(); ++k)
            rs.add(row.r_list[k], row.point_id, row.x, row.distances[k], row.decreasing);
    rep.files.push_back(std::move(fs));
}

inline void run_gap(const ExperimentConfig& cfg, const IfsSystem& sys, ExperimentReport& rep) {
    GapResult g;
    std::string mode;
    if (!cfg.beta.empty()) {
        g = independence_gap_beta(sys, BetaSpec::parse(cfg.beta).value, cfg.word_bound,
                                  cfg.multiplier_bound);
        mode = "beta";
    } else if (cfg.system2.present) {
        g = independence_gap_pair(sys, build_system(cfg.system2, cfg.weights2), cfg.word_bound);
        mode = "pair";
    } else {
        g = independence_gap_axes(sys, cfg.word_bound);
        mode = "axes";
    }
    Json& doc = rep.document;
    doc["mode"] = mode;
    if (!cfg.beta.empty()) doc["beta"] = cfg.beta;
    doc["word_bound"] = cfg.word_bound;
    doc["multiplier_bound"] = cfg.multiplier_bound;
    doc["result"] = gap_json(g);

    RowFile f{"gap.csv", provenance_header({"gap", "doubled_gap", "shrank"}), {}};
    RowFiller rows{cfg, f, cfg.word_bound};
    rows.add(cfg.multiplier_bound, 0, g.gap, g.doubled_gap, g.shrank_on_doubling);
    rep.files.push_back(std::move(f));
}

} // namespace detail

/// Execute the configured experiment.  Library refusals are caught and
/// recorded so partial output still reaches disk; the caller turns a
/// non-empty `error` into exit status 3.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    rep.document["experiment"] = cfg.kind;
    rep.document["config_hash"] = config_hash(cfg.source_text, cfg.seed);
    rep.document["seed"] = cfg.seed;
    try {
        const IfsSystem sys = build_system(cfg.system, cfg.weights);
        if (cfg.kind == "discretize")
            detail::run_discretize(cfg, sys, rep);
        else if (cfg.kind == "scenery")
            detail::run_scenery(cfg, sys, rep);
        else if (cfg.kind == "uniform-scaling")
            detail::run_uniform_scaling(cfg, sys, rep);
        else if (cfg.kind == "prop31")
            detail::run_prop31(cfg, sys, rep);
        else if (cfg.kind == "dissonance")
            detail::run_dissonance(cfg, sys, rep);
        else if (cfg.kind == "normality")
            detail::run_normality(cfg, sys, rep);
        else if (cfg.kind == "projection")
            detail::run_projection(cfg, sys, rep);
        else if (cfg.kind == "gap")
            detail::run_gap(cfg, sys, rep);
        else
            throw ConfigError("unknown experiment kind '" + cfg.kind + "'");
    } catch (const Error& e) {
        rep.error = e.what();
        rep.document["error"] = rep.error;
    }
    return rep;
}

} // namespace scenlab
