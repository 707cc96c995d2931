#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "scenlab/discretize.hpp"
#include "scenlab/dyadic_measure.hpp"
#include "scenlab/errors.hpp"
#include "scenlab/ifs.hpp"
#include "scenlab/metrics.hpp"
#include "scenlab/sampling.hpp"

namespace scenlab {

/// Default resolution at which scenery frames are compared.  Frames are
/// coarsened to this level so that distances between frames from different
/// scales (or different base measures) see the same grid.
constexpr int kFrameCompareLevel = 6;

/// Magnification frames of one measure around one point across scales.
/// Times are in log-2 units: time t views the ball B(x, 2^-t).
struct SceneryTrack {
    std::array<double, 2> x{0.0, 0.0};
    std::vector<double> times;
    std::vector<DyadicMeasure> frames;
};

namespace detail {

inline DyadicMeasure frame_at_scale(const DyadicMeasure& mu, std::array<double, 2> x, int k,
                                    int compare_level) {
    DyadicMeasure f = magnify(mu, x, k);
    if (f.level() > compare_level) f = coarsen(f, compare_level);
    return f;
}

inline DyadicMeasure frame_at_time(const IfsSystem& sys, double x, double t, int compare_level) {
    DyadicMeasure f = ifs_frame(sys, x, t, compare_level).measure;
    if (f.level() > compare_level) f = coarsen(f, compare_level);
    return f;
}

} // namespace detail

/// Frames mu_{x, k log 2} for k = first..first+count-1, all at the compare
/// resolution.  Resolution must leave compare_level levels of headroom below
/// the deepest frame.
inline SceneryTrack scenery_track(const DyadicMeasure& mu, std::array<double, 2> x, int count,
                                  int compare_level = kFrameCompareLevel, int first = 1) {
    if (count < 1) throw DomainError("scenery_track: need at least one frame");
    if (first < 1) throw DomainError("scenery_track: scales start at 1");
    const int deepest = first + count - 1;
    if (deepest > mu.level() - compare_level)
        throw ResolutionError("scenery_track: frames exceed the usable depth of the measure");
    SceneryTrack out;
    out.x = x;
    out.times.reserve(static_cast<std::size_t>(count));
    out.frames.reserve(static_cast<std::size_t>(count));
    for (int k = first; k <= deepest; ++k) {
        out.times.push_back(static_cast<double>(k));
        out.frames.push_back(detail::frame_at_scale(mu, x, k, compare_level));
    }
    return out;
}

/// Empirical scenery flow <mu>_{x,T}: the uniform distribution over the
/// frames at scales k = 1..T (grid discretization of the time average).
inline MeasureDistribution scenery_flow(const DyadicMeasure& mu, std::array<double, 2> x, int T,
                                        int compare_level = kFrameCompareLevel) {
    return MeasureDistribution::uniform(scenery_track(mu, x, T, compare_level).frames);
}

inline MeasureDistribution scenery_flow(const DyadicMeasure& mu, double x, int T,
                                        int compare_level = kFrameCompareLevel) {
    return scenery_flow(mu, {x, 0.0}, T, compare_level);
}

/// System-driven scenery flow: each frame is re-discretized inside its own
/// window, so depth is limited by arithmetic (t <= 48) rather than by the
/// resolution of a global measure.
inline MeasureDistribution scenery_flow(const IfsSystem& sys, double x, int T,
                                        int compare_level = kFrameCompareLevel) {
    if (T < 1) throw DomainError("scenery_flow: need at least one frame");
    std::vector<DyadicMeasure> frames;
    frames.reserve(static_cast<std::size_t>(T));
    for (int k = 1; k <= T; ++k)
        frames.push_back(detail::frame_at_time(sys, x, static_cast<double>(k), compare_level));
    return MeasureDistribution::uniform(std::move(frames));
}

/// Frames at times k*t0, k = 1..count, snapped to the nearest dyadic scale
/// (the measure only supports power-of-two magnification).
inline MeasureDistribution t0_scenery(const DyadicMeasure& mu, std::array<double, 2> x, double t0,
                                      int count, int compare_level = kFrameCompareLevel) {
    if (count < 1) throw DomainError("t0_scenery: need at least one frame");
    if (!(t0 > 0.0)) throw DomainError("t0_scenery: t0 must be positive");
    std::vector<DyadicMeasure> frames;
    frames.reserve(static_cast<std::size_t>(count));
    for (int j = 1; j <= count; ++j) {
        const int k = std::max<int>(1, static_cast<int>(std::llround(static_cast<double>(j) * t0)));
        if (k > mu.level() - compare_level)
            throw ResolutionError("t0_scenery: frames exceed the usable depth of the measure");
        frames.push_back(detail::frame_at_scale(mu, x, k, compare_level));
    }
    return MeasureDistribution::uniform(std::move(frames));
}

inline MeasureDistribution t0_scenery(const DyadicMeasure& mu, double x, double t0, int count,
                                      int compare_level = kFrameCompareLevel) {
    return t0_scenery(mu, {x, 0.0}, t0, count, compare_level);
}

/// Exact real-time variant: frames at t = k*t0 computed from the system, no
/// grid snapping.
inline MeasureDistribution t0_scenery(const IfsSystem& sys, double x, double t0, int count,
                                      int compare_level = kFrameCompareLevel) {
    if (count < 1) throw DomainError("t0_scenery: need at least one frame");
    if (!(t0 > 0.0)) throw DomainError("t0_scenery: t0 must be positive");
    std::vector<DyadicMeasure> frames;
    frames.reserve(static_cast<std::size_t>(count));
    for (int j = 1; j <= count; ++j)
        frames.push_back(detail::frame_at_time(sys, x, static_cast<double>(j) * t0, compare_level));
    return MeasureDistribution::uniform(std::move(frames));
}

struct UniformScalingResult {
    double mean;                               // mean pairwise distance, i < j
    std::vector<std::vector<double>> pairwise; // symmetric, zero diagonal
};

namespace detail {

inline UniformScalingResult pairwise_scenery_distance(const std::vector<MeasureDistribution>& d) {
    const std::size_t n = d.size();
    if (n < 2) throw ShapeError("uniform_scaling_statistic: need at least two points");
    UniformScalingResult out;
    out.pairwise.assign(n, std::vector<double>(n, 0.0));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = meta_lp_distance(d[i], d[j]);
            out.pairwise[i][j] = out.pairwise[j][i] = v;
            total += v;
        }
    out.mean = total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
    return out;
}

} // namespace detail

/// Mean pairwise meta-LP distance between the empirical sceneries of the
/// sample points.  The uniform scaling prediction is mean -> 0 as T grows.
inline UniformScalingResult uniform_scaling_statistic(const DyadicMeasure& mu,
                                                      const std::vector<std::array<double, 2>>& points,
                                                      int T,
                                                      int compare_level = kFrameCompareLevel) {
    std::vector<MeasureDistribution> d;
    d.reserve(points.size());
    for (const auto& x : points) d.push_back(scenery_flow(mu, x, T, compare_level));
    return detail::pairwise_scenery_distance(d);
}

inline UniformScalingResult uniform_scaling_statistic(const IfsSystem& sys,
                                                      const std::vector<double>& points, int T,
                                                      int compare_level = kFrameCompareLevel) {
    std::vector<MeasureDistribution> d;
    d.reserve(points.size());
    for (double x : points) d.push_back(scenery_flow(sys, x, T, compare_level));
    return detail::pairwise_scenery_distance(d);
}

/// Distance between the scenery averaged over [0,T] and over [s, T+s]; small
/// values are consistent with invariance of the limit under the frame shift.
inline double shift_invariance_diagnostic(const DyadicMeasure& mu, std::array<double, 2> x, int T,
                                          int s, int compare_level = kFrameCompareLevel) {
    if (s < 0) throw DomainError("shift_invariance_diagnostic: shift must be nonnegative");
    const SceneryTrack a = scenery_track(mu, x, T, compare_level, 1);
    const SceneryTrack b = scenery_track(mu, x, T, compare_level, 1 + s);
    return meta_lp_distance(MeasureDistribution::uniform(a.frames),
                            MeasureDistribution::uniform(b.frames));
}

inline double shift_invariance_diagnostic(const IfsSystem& sys, double x, int T, int s,
                                          int compare_level = kFrameCompareLevel) {
    if (s < 0) throw DomainError("shift_invariance_diagnostic: shift must be nonnegative");
    if (T < 1) throw DomainError("shift_invariance_diagnostic: need at least one frame");
    std::vector<DyadicMeasure> a, b;
    a.reserve(static_cast<std::size_t>(T));
    b.reserve(static_cast<std::size_t>(T));
    for (int k = 1; k <= T; ++k) {
        a.push_back(detail::frame_at_time(sys, x, static_cast<double>(k), compare_level));
        b.push_back(detail::frame_at_time(sys, x, static_cast<double>(k + s), compare_level));
    }
    return meta_lp_distance(MeasureDistribution::uniform(std::move(a)),
                            MeasureDistribution::uniform(std::move(b)));
}

/// Decomposition of the magnified measure as a weighted mixture of rescaled
/// map images: nu(x,t) = C^-1 sum_{i in cover} mubar([i]) delta_{g o f_i}
/// with g(y) = 2^t (y - x), plus a cellwise comparability report against the
/// directly magnified measure.  Ratios are taken at the compare resolution
/// over cells where both sides carry mass; the smallest-mass cells are
/// dropped (worst log-ratio first) until the dropped mass would exceed the
/// trim budget, since sub-cell smearing differences make near-empty cells
/// meaningless.  Dropped plus one-sided mass is reported.
struct TangentDecomposition {
    MapMixture mixture;
    double c_constant;  // C(x,t): total word mass of the stopping cover
    double ratio_lo;
    double ratio_hi;
    double excluded_mass;
};

inline TangentDecomposition tangent_decomposition(const IfsSystem& sys, const DyadicMeasure& mu,
                                                  double x, int k, int compare_level = 4,
                                                  double trim = 1e-3) {
    if (sys.dimension() != 1 || mu.dim() != 1)
        throw ShapeError("tangent_decomposition: 1-D systems only");
    if (k < 1) throw DomainError("tangent_decomposition: scale must be at least 1");
    if (mu.level() - k < compare_level)
        throw ResolutionError("tangent_decomposition: scale too deep for the measure");
    const std::vector<Word> cover = stopping_cover(sys, x, static_cast<double>(k));
    if (cover.empty())
        throw SupportError("tangent_decomposition: stopping cover is empty at this point");

    const double zoom = std::ldexp(1.0, k);
    const Map1D g = Map1D::affine(zoom, -zoom * x);
    std::vector<double> weights;
    std::vector<Map1D> maps;
    weights.reserve(cover.size());
    maps.reserve(cover.size());
    double c_constant = 0.0;
    for (const Word& w : cover) {
        const double m = sys.weights().word_mass(w);
        weights.push_back(m);
        c_constant += m;
        maps.push_back(compose(g, compose_word(sys, w).raw()));
    }
    MapMixture mixture(std::move(weights), std::move(maps));

    const int frame_level = mu.level() - k;
    DyadicMeasure target = magnify(mu, {x, 0.0}, k);
    DyadicMeasure image = mixture_apply(mixture, mu, Box::ball1(), frame_level).measure;
    if (frame_level > compare_level) {
        target = coarsen(target, compare_level);
        image = coarsen(image, compare_level);
    }

    double uncovered = 0.0;
    struct Entry {
        double weight;
        double ratio;
    };
    std::vector<Entry> entries;
    for (const auto& [key, a] : target.cells()) {
        const double b = image.cell_mass(key);
        if (b <= 0.0)
            uncovered += a;
        else
            entries.push_back({std::max(a, b), a / b});
    }
    for (const auto& [key, b] : image.cells())
        if (target.cell_mass(key) == 0.0) uncovered += b;

    std::sort(entries.begin(), entries.end(), [](const Entry& u, const Entry& v) {
        return std::fabs(std::log(u.ratio)) > std::fabs(std::log(v.ratio));
    });
    double dropped = 0.0;
    std::size_t keep_from = 0;
    while (keep_from < entries.size() && dropped + entries[keep_from].weight <= trim)
        dropped += entries[keep_from++].weight;

    double lo = 1.0, hi = 1.0;
    if (keep_from < entries.size()) {
        lo = hi = entries[keep_from].ratio;
        for (std::size_t i = keep_from; i < entries.size(); ++i) {
            lo = std::min(lo, entries[i].ratio);
            hi = std::max(hi, entries[i].ratio);
        }
    }
    return {std::move(mixture), c_constant, lo, hi, uncovered + dropped};
}

/// Certificate for the entropy decomposition underlying the scenery
/// comparison: pushes mu through every mixture atom onto the unit ball,
/// forms the blended measure, and reports
///   - condition1: per-atom image mass of points whose average conditional
///     digit entropy over levels 1..n reaches alpha (and the nu-average),
///   - condition2: H(blend, D_n)/n - alpha,
///   - kl_total:   the nu-averaged KL divergence between atom digit laws and
///     blend digit laws over levels 0..n-1,
///   - identity_residual: |H(blend, D_n) - entropy term - kl_total|, an
///     algebraic identity at cell resolution,
///   - scenery_gap: Monte Carlo estimate over (atom, point) samples of the
///     time-averaged LP distance between blend frames and atom frames.
/// Atom weights are adjusted for mass clipped outside the ball so that the
/// blend is an exact convex combination of the normalized atom images.
struct Prop31Certificate {
    std::vector<double> condition1_masses;
    double condition1;
    double condition2;
    double kl_total;
    double identity_residual;
    double scenery_gap;
    double scenery_gap_stderr;
};

struct Prop31Options {
    int samples = 8;
    std::uint64_t seed = 1;
    int compare_level = 5;
    int target_level = -1; // defaults to mu.level()
};

inline Prop31Certificate prop31_certificate(const DyadicMeasure& mu, const MapMixture& nu, int n,
                                            double alpha, const Prop31Options& opt = {}) {
    if (mu.dim() != 1) throw ShapeError("prop31_certificate: 1-D measures only");
    if (n < 1) throw DomainError("prop31_certificate: n must be positive");
    const int L = opt.target_level > 0 ? opt.target_level : mu.level();
    if (L < n + 1)
        throw ResolutionError("prop31_certificate: target level must exceed n");

    const std::size_t atoms = nu.size();
    std::vector<DyadicMeasure> theta;
    std::vector<double> w(atoms);
    theta.reserve(atoms);
    for (std::size_t h = 0; h < atoms; ++h) {
        const PushforwardResult push = pushforward_map(mu, nu.maps[h], Box::ball1(), L);
        w[h] = nu.weights[h] * (1.0 - push.clipped_mass);
        theta.push_back(push.measure);
    }
    double wtotal = 0.0;
    for (double v : w) wtotal += v;
    for (double& v : w) v /= wtotal;

    // per-level cell tables, levels 0..n+1, for each atom and for the blend
    auto level_tables = [&](const CellTable& base) {
        std::vector<CellTable> t(static_cast<std::size_t>(n) + 2);
        for (int k = 0; k <= n + 1; ++k) {
            const int shift = L - k;
            for (const auto& [key, m] : base)
                t[static_cast<std::size_t>(k)][{key.i >> shift, key.j >> shift}] += m;
        }
        return t;
    };
    CellTable blend_base;
    std::vector<std::vector<CellTable>> atom_tables;
    atom_tables.reserve(atoms);
    for (std::size_t h = 0; h < atoms; ++h) {
        for (const auto& [key, m] : theta[h].cells()) blend_base[key] += w[h] * m;
        atom_tables.push_back(level_tables(theta[h].cells()));
    }
    const std::vector<CellTable> blend_tables = level_tables(blend_base);

    Prop31Certificate cert{};
    cert.condition1_masses.resize(atoms);
    double entropy_term = 0.0;
    for (std::size_t h = 0; h < atoms; ++h) {
        const auto& t = atom_tables[h];
        // conditional digit entropies: accumulate scores down the cell tree
        CellTable acc; // at level k: sum of split entropies along levels 1..k
        acc[{0, 0}] = 0.0;
        for (int k = 1; k <= n; ++k) {
            // split entropy of each level-k cell into its level-k+1 children
            CellTable split;
            for (const auto& [key, m] : t[static_cast<std::size_t>(k) + 1]) {
                const CellKey parent{key.i >> 1, key.j >> 1};
                const double p = m / t[static_cast<std::size_t>(k)].at(parent);
                split[parent] -= p * std::log(p);
            }
            CellTable next;
            for (const auto& [key, m] : t[static_cast<std::size_t>(k)])
                next[key] = acc.at({key.i >> 1, key.j >> 1}) + split[key];
            acc = std::move(next);
        }
        double mass_ok = 0.0;
        for (const auto& [key, m] : t[static_cast<std::size_t>(n)])
            if (acc.at(key) / static_cast<double>(n) >= alpha) mass_ok += m;
        const double total = t[0].at({0, 0});
        cert.condition1_masses[h] = mass_ok / total;
        cert.condition1 += w[h] * cert.condition1_masses[h];

        // entropy and KL terms of the decomposition, levels 0..n-1
        for (int k = 0; k < n; ++k) {
            const auto& child = t[static_cast<std::size_t>(k) + 1];
            const auto& parent = t[static_cast<std::size_t>(k)];
            const auto& bchild = blend_tables[static_cast<std::size_t>(k) + 1];
            const auto& bparent = blend_tables[static_cast<std::size_t>(k)];
            for (const auto& [key, m] : child) {
                const CellKey pk{key.i >> 1, key.j >> 1};
                const double p = m / parent.at(pk);
                const double q = bchild.at(key) / bparent.at(pk);
                entropy_term -= w[h] * m * std::log(p);
                cert.kl_total += w[h] * m * std::log(p / q);
            }
        }
    }

    double blend_entropy = 0.0;
    for (const auto& [key, m] : blend_tables[static_cast<std::size_t>(n)])
        if (m > 0.0) blend_entropy -= m * std::log(m);
    cert.condition2 = blend_entropy / static_cast<double>(n) - alpha;
    cert.identity_residual = std::fabs(blend_entropy - entropy_term - cert.kl_total);

    // Monte Carlo over (atom ~ nu, point ~ atom image) of the discretized
    // time average (1/n) sum_{k=1..n} d_LP(blend frame, atom frame)
    const DyadicMeasure blend(Box::ball1(), L, std::move(blend_base), true);
    std::vector<std::vector<double>> cell_masses(atoms);
    std::vector<std::vector<std::array<double, 2>>> cell_centers(atoms);
    for (std::size_t h = 0; h < atoms; ++h)
        for (const auto& [key, m] : theta[h].cells()) {
            cell_masses[h].push_back(m);
            cell_centers[h].push_back(theta[h].cell_center(key));
        }
    const int frames = std::min(n, L - 1);
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < opt.samples; ++s) {
        detail::Rng rng(opt.seed, static_cast<std::uint64_t>(s));
        const std::size_t h = static_cast<std::size_t>(rng.pick(w));
        const std::array<double, 2> y =
            cell_centers[h][static_cast<std::size_t>(rng.pick(cell_masses[h]))];
        double avg = 0.0;
        for (int k = 1; k <= frames; ++k) {
            const int cmp = std::min(opt.compare_level, L - k);
            DyadicMeasure a = magnify(blend, y, k);
            DyadicMeasure b = magnify(theta[h], y, k);
            if (a.level() > cmp) a = coarsen(a, cmp);
            if (b.level() > cmp) b = coarsen(b, cmp);
            avg += lp_distance(a, b);
        }
        avg /= static_cast<double>(frames);
        sum += avg;
        sumsq += avg * avg;
    }
    const double count = static_cast<double>(opt.samples);
    cert.scenery_gap = sum / count;
    if (opt.samples > 1) {
        const double var = std::max(0.0, (sumsq - sum * sum / count) / (count - 1.0));
        cert.scenery_gap_stderr = std::sqrt(var / count);
    }
    return cert;
}

/// Phase statistic |1/N sum_k e(k t0 alpha) g(frame_k)| with observable
/// g = mass of B(0, 1/2) and e(u) = exp(2 pi i u); t0 and alpha are in log-2
/// units.  Values near zero for alpha = m / log2(beta) are consistent with
/// the absence of that eigenvalue; values near g flag a candidate.
inline double spectral_phase_diagnostic(const DyadicMeasure& mu, std::array<double, 2> x,
                                        double t0, double alpha, int count) {
    if (count < 1) throw DomainError("spectral_phase_diagnostic: need at least one frame");
    if (!(t0 > 0.0)) throw DomainError("spectral_phase_diagnostic: t0 must be positive");
    double re = 0.0, im = 0.0;
    for (int k = 1; k <= count; ++k) {
        const double t = static_cast<double>(k) * t0;
        const int grid = std::max<int>(1, static_cast<int>(std::llround(t)));
        if (grid >= mu.level())
            throw ResolutionError("spectral_phase_diagnostic: frames exceed the usable depth");
        const double g = magnify(mu, x, grid).ball_mass({0.0, 0.0}, 0.5);
        const double phase = 2.0 * M_PI * t * alpha;
        re += g * std::cos(phase);
        im += g * std::sin(phase);
    }
    return std::hypot(re, im) / static_cast<double>(count);
}

inline double spectral_phase_diagnostic(const DyadicMeasure& mu, double x, double t0, double alpha,
                                        int count) {
    return spectral_phase_diagnostic(mu, {x, 0.0}, t0, alpha, count);
}

inline double spectral_phase_diagnostic(const IfsSystem& sys, double x, double t0, double alpha,
                                        int count, int rel_level = 8) {
    if (count < 1) throw DomainError("spectral_phase_diagnostic: need at least one frame");
    if (!(t0 > 0.0)) throw DomainError("spectral_phase_diagnostic: t0 must be positive");
    double re = 0.0, im = 0.0;
    for (int k = 1; k <= count; ++k) {
        const double t = static_cast<double>(k) * t0;
        const double g = ifs_frame(sys, x, t, rel_level).measure.ball_mass({0.0, 0.0}, 0.5);
        const double phase = 2.0 * M_PI * t * alpha;
        re += g * std::cos(phase);
        im += g * std::sin(phase);
    }
    return std::hypot(re, im) / static_cast<double>(count);
}

} // namespace scenlab
