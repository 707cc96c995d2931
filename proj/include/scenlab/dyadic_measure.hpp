#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "scenlab/errors.hpp"
#include "scenlab/ifs.hpp"

namespace scenlab {

/// Axis-aligned bounding box with dyadic corners: an interval [lo, lo+size)
/// in 1-D or a square in 2-D.  `size` is always a power of two.
struct Box {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    double size = 1.0;

    static Box unit1() { return Box{1, {0.0, 0.0}, 1.0}; }
    static Box ball1() { return Box{1, {-1.0, 0.0}, 2.0}; }
    static Box ball2() { return Box{2, {-1.0, -1.0}, 2.0}; }

    double hi(int axis) const { return lo[static_cast<std::size_t>(axis)] + size; }

    friend bool operator==(const Box& a, const Box& b) {
        return a.dim == b.dim && a.lo == b.lo && a.size == b.size;
    }
};

struct CellKey {
    std::int64_t i = 0;
    std::int64_t j = 0;

    auto operator<=>(const CellKey&) const = default;
};

using CellTable = std::map<CellKey, double>;

/// Sparse probability measure on the level-n dyadic grid of a bounding box.
/// Cells are half-open; cell (i, j) covers [lo_x + i s, lo_x + (i+1) s) x ...
/// with s = size * 2^-n.  Total mass is 1 within 1e-12 after construction.
class DyadicMeasure {
  public:
    DyadicMeasure(Box box, int level, CellTable cells, bool normalize = false)
        : box_(box), level_(level), cells_(std::move(cells)) {
        if (level_ < 0) throw ShapeError("DyadicMeasure: negative level");
        if (box_.dim != 1 && box_.dim != 2) throw ShapeError("DyadicMeasure: dimension must be 1 or 2");
        const std::int64_t n = std::int64_t{1} << std::min(level_, 62);
        double total = 0.0;
        for (const auto& [key, m] : cells_) {
            if (m < 0.0) throw SupportError("DyadicMeasure: negative cell mass");
            if (key.i < 0 || key.i >= n || (box_.dim == 2 && (key.j < 0 || key.j >= n)) ||
                (box_.dim == 1 && key.j != 0))
                throw IndexError("DyadicMeasure: cell index outside the bounding box");
            total += m;
        }
        if (!(total > 0.0)) throw SupportError("DyadicMeasure: zero total mass");
        if (normalize) {
            for (auto& [key, m] : cells_) m /= total;
        } else if (std::fabs(total - 1.0) > 1e-12) {
            throw SupportError("DyadicMeasure: total mass " + std::to_string(total) + " not 1");
        }
    }

    int dim() const { return box_.dim; }
    int level() const { return level_; }
    const Box& box() const { return box_; }
    const CellTable& cells() const { return cells_; }
    std::size_t support_size() const { return cells_.size(); }

    /// Side length of one cell.
    double cell_side() const { return std::ldexp(box_.size, -level_); }

    double cell_lo(std::int64_t idx, int axis) const {
        return box_.lo[static_cast<std::size_t>(axis)] + static_cast<double>(idx) * cell_side();
    }

    std::array<double, 2> cell_center(const CellKey& key) const {
        const double s = cell_side();
        std::array<double, 2> c{cell_lo(key.i, 0) + 0.5 * s, 0.0};
        if (dim() == 2) c[1] = cell_lo(key.j, 1) + 0.5 * s;
        return c;
    }

    double cell_mass(const CellKey& key) const {
        auto it = cells_.find(key);
        return it == cells_.end() ? 0.0 : it->second;
    }

    double total_mass() const {
        double t = 0.0;
        for (const auto& [k, m] : cells_) t += m;
        return t;
    }

    /// Mass of the closed ball B(x, r) in the max metric, splitting boundary
    /// cells proportionally to overlap.
    double ball_mass(std::array<double, 2> x, double r) const {
        if (!(r > 0.0)) throw DomainError("ball_mass: radius must be positive");
        const double s = cell_side();
        double total = 0.0;
        for (const auto& [key, m] : cells_) {
            const double ax = cell_lo(key.i, 0);
            double frac = overlap_fraction(ax, ax + s, x[0] - r, x[0] + r);
            if (dim() == 2) {
                const double ay = cell_lo(key.j, 1);
                frac *= overlap_fraction(ay, ay + s, x[1] - r, x[1] + r);
            }
            total += m * frac;
        }
        return total;
    }

    double ball_mass(double x, double r) const { return ball_mass({x, 0.0}, r); }

    /// Mass of [a, b) (1-D), boundary cells split proportionally.
    double interval_mass(double a, double b) const {
        if (dim() != 1) throw ShapeError("interval_mass: 1-D only");
        double total = 0.0;
        const double s = cell_side();
        for (const auto& [key, m] : cells_) {
            const double lo = cell_lo(key.i, 0);
            total += m * overlap_fraction(lo, lo + s, a, b);
        }
        return total;
    }

    static double overlap_fraction(double cell_lo, double cell_hi, double a, double b) {
        const double len = std::min(cell_hi, b) - std::max(cell_lo, a);
        if (len <= 0.0) return 0.0;
        return len / (cell_hi - cell_lo);
    }

  private:
    Box box_;
    int level_;
    CellTable cells_;
};

/// Accumulates mass deposits on a fixed target grid; mass falling outside
/// the box is dropped and tallied in `clipped`.
class MeasureBuilder {
  public:
    MeasureBuilder(Box box, int level) : box_(box), level_(level) {
        if (level < 0 || level > 62) throw ShapeError("MeasureBuilder: level out of range");
        side_ = std::ldexp(box_.size, -level_);
        count_ = std::int64_t{1} << level_;
    }

    const Box& box() const { return box_; }
    int level() const { return level_; }
    double cell_side() const { return side_; }
    double clipped() const { return clipped_; }
    double deposited() const { return deposited_; }

    void add_cell(CellKey key, double mass) {
        if (mass == 0.0) return;
        cells_[key] += mass;
        deposited_ += mass;
    }

    /// Deposit `mass` spread uniformly over [a, b); a == b is a point mass.
    /// A right endpoint landing exactly on a cell boundary belongs to the
    /// cell on its left (half-open convention).
    void add_interval(double a, double b, double mass) {
        if (mass == 0.0) return;
        if (b < a) std::swap(a, b);
        if (a == b) {
            const std::int64_t i = index_of(a);
            if (i < 0 || i >= count_)
                clipped_ += mass;
            else
                add_cell({i, 0}, mass);
            return;
        }
        std::int64_t ia = index_of(a);
        std::int64_t ib = index_of(b);
        if (ib > ia && cell_lo(ib) == b) --ib;
        const double inv_len = 1.0 / (b - a);
        for (std::int64_t i = std::max<std::int64_t>(ia, 0); i <= std::min(ib, count_ - 1); ++i) {
            const double lo = cell_lo(i);
            const double len = std::min(lo + side_, b) - std::max(lo, a);
            if (len > 0.0) add_cell({i, 0}, mass * len * inv_len);
        }
        double clip = 0.0;
        if (a < box_.lo[0]) clip += (std::min(b, box_.lo[0]) - a) * inv_len;
        const double hi = box_.lo[0] + box_.size;
        if (b > hi) clip += (b - std::max(a, hi)) * inv_len;
        clipped_ += mass * clip;
    }

    /// Deposit `mass` spread uniformly over the rectangle [ax,bx) x [ay,by);
    /// degenerate axes collapse to their containing cell row/column.
    void add_rect(double ax, double bx, double ay, double by, double mass) {
        if (mass == 0.0) return;
        if (bx < ax) std::swap(ax, bx);
        if (by < ay) std::swap(ay, by);
        const auto [i0, i1] = axis_span(0, ax, bx);
        const auto [j0, j1] = axis_span(1, ay, by);
        double placed = 0.0;
        for (std::int64_t i = i0; i <= i1; ++i) {
            const double wx = axis_fraction(0, i, ax, bx);
            if (wx <= 0.0) continue;
            for (std::int64_t j = j0; j <= j1; ++j) {
                const double wy = axis_fraction(1, j, ay, by);
                if (wy <= 0.0) continue;
                add_cell({i, j}, mass * wx * wy);
                placed += mass * wx * wy;
            }
        }
        clipped_ += mass - placed;
    }

    DyadicMeasure finish(bool normalize = true) {
        return DyadicMeasure(box_, level_, std::move(cells_), normalize);
    }

    bool empty() const { return cells_.empty(); }

  private:
    std::int64_t index_of(double x) const {
        return static_cast<std::int64_t>(std::floor((x - box_.lo[0]) / side_));
    }

    std::int64_t index_of_axis(int axis, double x) const {
        return static_cast<std::int64_t>(
            std::floor((x - box_.lo[static_cast<std::size_t>(axis)]) / side_));
    }

    double cell_lo(std::int64_t i) const { return box_.lo[0] + static_cast<double>(i) * side_; }

    double cell_lo_axis(int axis, std::int64_t i) const {
        return box_.lo[static_cast<std::size_t>(axis)] + static_cast<double>(i) * side_;
    }

    std::array<std::int64_t, 2> axis_span(int axis, double a, double b) const {
        std::int64_t ia = index_of_axis(axis, a);
        std::int64_t ib = index_of_axis(axis, b);
        if (ib > ia && cell_lo_axis(axis, ib) == b) --ib;
        return {std::max<std::int64_t>(ia, 0), std::min(ib, count_ - 1)};
    }

    /// Fraction of [a,b) falling into cell i along `axis`; a degenerate
    /// segment (a == b) contributes fully to its containing cell.
    double axis_fraction(int axis, std::int64_t i, double a, double b) const {
        const double lo = cell_lo_axis(axis, i);
        if (a == b) return (a >= lo && a < lo + side_) ? 1.0 : 0.0;
        const double len = std::min(lo + side_, b) - std::max(lo, a);
        if (len <= 0.0) return 0.0;
        return len / (b - a);
    }

    Box box_;
    int level_;
    double side_;
    std::int64_t count_;
    CellTable cells_;
    double clipped_ = 0.0;
    double deposited_ = 0.0;
};

/// Exact aggregation of cell masses to a coarser level of the same box.
inline DyadicMeasure coarsen(const DyadicMeasure& mu, int level) {
    if (level > mu.level()) throw ResolutionError("coarsen: requested level is finer than stored");
    if (level == mu.level()) return mu;
    const int shift = mu.level() - level;
    CellTable out;
    for (const auto& [key, m] : mu.cells()) out[{key.i >> shift, key.j >> shift}] += m;
    return DyadicMeasure(Box{mu.box().dim, mu.box().lo, mu.box().size}, level, std::move(out), true);
}

/// Renormalized restriction to a sub-box A whose corners are level-n cell
/// boundaries; the bounding box is unchanged.
inline DyadicMeasure restrict_normalize(const DyadicMeasure& mu, const Box& a) {
    if (a.dim != mu.dim()) throw ShapeError("restrict_normalize: dimension mismatch");
    const double s = mu.cell_side();
    CellTable out;
    for (const auto& [key, m] : mu.cells()) {
        const double cx = mu.cell_lo(key.i, 0);
        if (cx < a.lo[0] - 0.5 * s || cx + s > a.hi(0) + 0.5 * s) continue;
        if (cx < a.lo[0] || cx + s > a.hi(0)) continue;
        if (mu.dim() == 2) {
            const double cy = mu.cell_lo(key.j, 1);
            if (cy < a.lo[1] || cy + s > a.hi(1)) continue;
        }
        out[key] = m;
    }
    if (out.empty()) throw SupportError("restrict_normalize: zero mass in the restriction box");
    return DyadicMeasure(mu.box(), mu.level(), std::move(out), true);
}

/// Magnification at dyadic scale 2^-k: the measure conditioned on the max
/// metric ball B(x, 2^-k) and rescaled by y -> 2^k (y - x) onto [-1,1]^d at
/// level n-k.
inline DyadicMeasure magnify(const DyadicMeasure& mu, std::array<double, 2> x, int k) {
    const int n = mu.level();
    if (k >= n) throw ResolutionError("magnify: scale 2^-" + std::to_string(k) +
                                      " exhausts the stored resolution (level " + std::to_string(n) + ")");
    if (k < 0) throw DomainError("magnify: negative scale");
    const double r = std::ldexp(1.0, -k);
    const double zoom = std::ldexp(1.0, k);
    const double s = mu.cell_side();
    const Box target = mu.dim() == 1 ? Box::ball1() : Box::ball2();
    MeasureBuilder b(target, n - k);
    for (const auto& [key, m] : mu.cells()) {
        const double ax = mu.cell_lo(key.i, 0);
        const double ox0 = std::max(ax, x[0] - r), ox1 = std::min(ax + s, x[0] + r);
        double frac = (ox1 - ox0) / s;
        if (frac <= 0.0) continue;
        if (mu.dim() == 1) {
            b.add_interval((ox0 - x[0]) * zoom, (ox1 - x[0]) * zoom, m * frac);
        } else {
            const double ay = mu.cell_lo(key.j, 1);
            const double oy0 = std::max(ay, x[1] - r), oy1 = std::min(ay + s, x[1] + r);
            if (oy1 <= oy0) continue;
            frac *= (oy1 - oy0) / s;
            b.add_rect((ox0 - x[0]) * zoom, (ox1 - x[0]) * zoom, (oy0 - x[1]) * zoom,
                       (oy1 - x[1]) * zoom, m * frac);
        }
    }
    if (b.empty()) throw SupportError("magnify: zero mass in B(x, 2^-k)");
    return b.finish(true);
}

inline DyadicMeasure magnify(const DyadicMeasure& mu, double x, int k) {
    return magnify(mu, {x, 0.0}, k);
}

/// Renormalized restriction to the level-k dyadic cell containing x,
/// rescaled onto [0,1)^d at level n-k.  Exact: level-n cells nest in the
/// level-k cell, so no mass is split.
inline DyadicMeasure dyadic_magnify(const DyadicMeasure& mu, std::array<double, 2> x, int k) {
    const int n = mu.level();
    if (k >= n) throw ResolutionError("dyadic_magnify: k must be below the stored level");
    if (k < 0) throw DomainError("dyadic_magnify: negative scale");
    const double sk = std::ldexp(mu.box().size, -k);
    const std::int64_t ci = static_cast<std::int64_t>(std::floor((x[0] - mu.box().lo[0]) / sk));
    const std::int64_t cj = mu.dim() == 2
                                ? static_cast<std::int64_t>(std::floor((x[1] - mu.box().lo[1]) / sk))
                                : 0;
    const std::int64_t span = std::int64_t{1} << (n - k);
    CellTable out;
    for (const auto& [key, m] : mu.cells()) {
        if (key.i < ci * span || key.i >= (ci + 1) * span) continue;
        if (mu.dim() == 2 && (key.j < cj * span || key.j >= (cj + 1) * span)) continue;
        out[{key.i - ci * span, key.j - cj * span}] = m;
    }
    if (out.empty())
        throw SupportError("dyadic_magnify: zero mass in the level-" + std::to_string(k) + " cell of x");
    return DyadicMeasure(Box{mu.dim(), {0.0, 0.0}, 1.0}, n - k, std::move(out), true);
}

inline DyadicMeasure dyadic_magnify(const DyadicMeasure& mu, double x, int k) {
    return dyadic_magnify(mu, {x, 0.0}, k);
}

struct PushforwardResult {
    DyadicMeasure measure;
    double clipped_mass;
};

/// Image measure under an injective 1-D map, deposited proportionally to
/// image overlap on an explicit target grid.
inline PushforwardResult pushforward_map(const DyadicMeasure& mu, const Map1D& h, Box target,
                                         int target_level) {
    if (mu.dim() != 1) throw ShapeError("pushforward_map: 1-D measures only");
    const double s = mu.cell_side();
    const double pole = h.pole();
    if (std::isfinite(pole) && pole >= mu.box().lo[0] && pole <= mu.box().hi(0))
        throw DomainError("pushforward_map: map is not injective on the bounding box (pole inside)");
    MeasureBuilder b(target, target_level);
    for (const auto& [key, m] : mu.cells()) {
        const double a = mu.cell_lo(key.i, 0);
        b.add_interval(h(a), h(a + s), m);
    }
    if (b.empty()) throw SupportError("pushforward_map: image carries no mass inside the target box");
    const double clipped = b.clipped();
    return {b.finish(true), clipped};
}

/// Level-preserving pushforward on the measure's own box.
inline PushforwardResult pushforward_map(const DyadicMeasure& mu, const Map1D& h) {
    return pushforward_map(mu, h, mu.box(), mu.level());
}

/// Finitely supported distribution over 1-D maps; realizes nu . mu =
/// sum_h w_h h_* mu.
struct MapMixture {
    std::vector<double> weights;
    std::vector<Map1D> maps;

    MapMixture() = default;

    MapMixture(std::vector<double> w, std::vector<Map1D> m)
        : weights(std::move(w)), maps(std::move(m)) {
        if (weights.size() != maps.size() || weights.empty())
            throw ShapeError("MapMixture: weight/map count mismatch");
        double total = 0.0;
        for (double x : weights) {
            if (!(x > 0.0)) throw DomainError("MapMixture: weights must be positive");
            total += x;
        }
        for (double& x : weights) x /= total;
    }

    static MapMixture identity_atom() { return MapMixture({1.0}, {Map1D::identity()}); }

    std::size_t size() const { return weights.size(); }
};

struct MixtureResult {
    DyadicMeasure measure;
    double clipped_mass;
};

inline MixtureResult mixture_apply(const MapMixture& nu, const DyadicMeasure& mu, Box target,
                                   int target_level) {
    if (mu.dim() != 1) throw ShapeError("mixture_apply: 1-D measures only");
    MeasureBuilder b(target, target_level);
    const double s = mu.cell_side();
    for (std::size_t h = 0; h < nu.size(); ++h) {
        const Map1D& f = nu.maps[h];
        const double w = nu.weights[h];
        for (const auto& [key, m] : mu.cells()) {
            const double a = mu.cell_lo(key.i, 0);
            b.add_interval(f(a), f(a + s), w * m);
        }
    }
    if (b.empty()) throw SupportError("mixture_apply: image carries no mass inside the target box");
    const double clipped = b.clipped();
    return {b.finish(true), clipped};
}

inline MixtureResult mixture_apply(const MapMixture& nu, const DyadicMeasure& mu) {
    return mixture_apply(nu, mu, mu.box(), mu.level());
}

/// Distribution of X + Y for independent X ~ mu, Y ~ eta; computed by
/// cell-index convolution, exact because cell sides agree.
inline DyadicMeasure convolve(const DyadicMeasure& mu, const DyadicMeasure& eta) {
    if (mu.dim() != 1 || eta.dim() != 1) throw ShapeError("convolve: 1-D measures only");
    if (mu.cell_side() != eta.cell_side())
        throw ShapeError("convolve: cell sides differ (levels must match on equal boxes)");
    if (mu.box().size != eta.box().size)
        throw ShapeError("convolve: bounding intervals must have equal size");
    Box out_box{1, {mu.box().lo[0] + eta.box().lo[0], 0.0}, 2.0 * mu.box().size};
    CellTable out;
    for (const auto& [ka, ma] : mu.cells())
        for (const auto& [kb, mb] : eta.cells()) out[{ka.i + kb.i, 0}] += ma * mb;
    return DyadicMeasure(out_box, mu.level() + 1, std::move(out), true);
}

/// Product measure on the square grid; both factors must share cell side.
inline DyadicMeasure product(const DyadicMeasure& mu, const DyadicMeasure& eta) {
    if (mu.dim() != 1 || eta.dim() != 1) throw ShapeError("product: 1-D factors only");
    if (mu.cell_side() != eta.cell_side() || mu.box().size != eta.box().size)
        throw ShapeError("product: factors must share box size and level");
    Box out_box{2, {mu.box().lo[0], eta.box().lo[0]}, mu.box().size};
    CellTable out;
    for (const auto& [ka, ma] : mu.cells())
        for (const auto& [kb, mb] : eta.cells()) out[{ka.i, kb.i}] = ma * mb;
    return DyadicMeasure(out_box, mu.level(), std::move(out), true);
}

/// Marginal onto one axis (exact column/row sums).
inline DyadicMeasure marginal(const DyadicMeasure& mu, int axis) {
    if (mu.dim() != 2) throw ShapeError("marginal: 2-D measures only");
    if (axis != 0 && axis != 1) throw IndexError("marginal: axis must be 0 or 1");
    CellTable out;
    for (const auto& [key, m] : mu.cells()) out[{axis == 0 ? key.i : key.j, 0}] += m;
    Box b{1, {mu.box().lo[static_cast<std::size_t>(axis)], 0.0}, mu.box().size};
    return DyadicMeasure(b, mu.level(), std::move(out), true);
}

/// Orthogonal projection onto the direction (cos t, sin t): each cell's
/// mass is deposited over [center proj - half width, center proj + half
/// width) on a symmetric dyadic interval where the half width is the
/// projected cell radius |cos t| + |sin t| times s/2.
inline DyadicMeasure project(const DyadicMeasure& mu, double theta) {
    if (mu.dim() != 2) throw ShapeError("project: 2-D measures only");
    if (theta < 0.0 || theta >= 3.14159265358979323847)
        throw DomainError("project: angle must lie in [0, pi)");
    const double c = std::cos(theta), sn = std::sin(theta);
    const double s = mu.cell_side();
    // Smallest symmetric power-of-two interval that contains every
    // projected corner of the bounding box.
    double reach = 0.0;
    for (int corner = 0; corner < 4; ++corner) {
        const double px = (corner & 1) ? mu.box().hi(0) : mu.box().lo[0];
        const double py = (corner & 2) ? mu.box().hi(1) : mu.box().lo[1];
        reach = std::max(reach, std::fabs(px * c + py * sn));
    }
    double half = 1.0;
    while (half < reach) half *= 2.0;
    Box out_box{1, {-half, 0.0}, 2.0 * half};
    int out_level = 0;
    while (std::ldexp(out_box.size, -out_level) > s && out_level < 62) ++out_level;
    MeasureBuilder b(out_box, out_level);
    const double hw = 0.5 * s * (std::fabs(c) + std::fabs(sn));
    for (const auto& [key, m] : mu.cells()) {
        const auto ctr = mu.cell_center(key);
        const double v = ctr[0] * c + ctr[1] * sn;
        b.add_interval(v - hw, v + hw, m);
    }
    return b.finish(true);
}

/// Normalized y-distribution of one x-column (by cell index at level n).
inline DyadicMeasure disintegrate(const DyadicMeasure& mu, std::int64_t column) {
    if (mu.dim() != 2) throw ShapeError("disintegrate: 2-D measures only");
    CellTable out;
    for (const auto& [key, m] : mu.cells())
        if (key.i == column) out[{key.j, 0}] += m;
    if (out.empty())
        throw SupportError("disintegrate: column " + std::to_string(column) + " carries no mass");
    Box b{1, {mu.box().lo[1], 0.0}, mu.box().size};
    return DyadicMeasure(b, mu.level(), std::move(out), true);
}

inline std::int64_t column_index(const DyadicMeasure& mu, double x) {
    return static_cast<std::int64_t>(std::floor((x - mu.box().lo[0]) / mu.cell_side()));
}

/// Cell table in absolute grid coordinates (index of the cell in the global
/// level grid of side `cell_side`), for comparing measures across boxes.
inline CellTable global_cells(const DyadicMeasure& mu) {
    const double s = mu.cell_side();
    CellTable out;
    for (const auto& [key, m] : mu.cells()) {
        const std::int64_t gi = static_cast<std::int64_t>(std::llround(mu.cell_lo(key.i, 0) / s));
        const std::int64_t gj =
            mu.dim() == 2 ? static_cast<std::int64_t>(std::llround(mu.cell_lo(key.j, 1) / s)) : 0;
        out[{gi, gj}] += m;
    }
    return out;
}

/// Largest absolute cell-mass difference after aligning the two measures on
/// the global grid; requires equal cell sides.
inline double max_cell_difference(const DyadicMeasure& a, const DyadicMeasure& b) {
    if (a.dim() != b.dim() || a.cell_side() != b.cell_side())
        throw ShapeError("max_cell_difference: incompatible grids");
    CellTable ga = global_cells(a), gb = global_cells(b);
    double worst = 0.0;
    for (const auto& [k, m] : ga) worst = std::max(worst, std::fabs(m - (gb.count(k) ? gb[k] : 0.0)));
    for (const auto& [k, m] : gb)
        if (!ga.count(k)) worst = std::max(worst, std::fabs(m));
    return worst;
}

} // namespace scenlab
