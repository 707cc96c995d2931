#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "scenlab/dyadic_measure.hpp"
#include "scenlab/errors.hpp"
#include "scenlab/ifs.hpp"

namespace scenlab {

struct Discretization {
    DyadicMeasure measure;
    /// Mass deposited because the word-length budget stopped the descent
    /// before the cylinder image fit a single cell.
    double budget_mass;
    /// Mass falling outside the target box (nonzero for windowed frames).
    double clipped_mass;
    int max_word_length;
};

namespace detail {

inline bool fits_single_cell(const MeasureBuilder& b, double lo, double hi) {
    const double s = b.cell_side();
    const double origin = b.box().lo[0];
    const std::int64_t ia = static_cast<std::int64_t>(std::floor((lo - origin) / s));
    std::int64_t ib = static_cast<std::int64_t>(std::floor((hi - origin) / s));
    if (ib > ia && origin + static_cast<double>(ib) * s == hi) --ib;
    return ia == ib;
}

} // namespace detail

/// Cylinder-descent discretization of the stationary measure pushed through
/// an outer 1-D map: deposits word masses once `outer(f_w(source))` fits a
/// single target cell (or the budget stops the descent), splitting mass
/// proportionally to overlap.  Images outside the target box are pruned, so
/// a zoomed-in `outer` explores only the cylinders that meet its window.
inline Discretization discretize_through(const IfsSystem& sys, const Map1D& outer,
                                         const Interval& source, Box target, int target_level,
                                         int budget) {
    if (sys.dimension() != 1) throw ShapeError("discretize_through: 1-D systems only");
    if (budget < 1) throw DomainError("discretize_through: budget must be positive");
    // Window pruning below relies on cylinder nesting, which needs the
    // attractor contained in the source interval.
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const Interval img = sys.map1(static_cast<int>(i)).image(source);
        if (img.lo < source.lo - 1e-12 || img.hi > source.hi + 1e-12)
            throw DomainError("discretize_through: attractor escapes the source interval");
    }
    MeasureBuilder b(target, target_level);
    const double window_lo = target.lo[0], window_hi = target.hi(0);
    double budget_mass = 0.0;
    int max_len = 0;
    std::size_t nodes = 0;

    struct Node {
        Map1D m;
        double mass;
        int prev;
        int len;
    };
    std::vector<Node> stack;
    const int alphabet = static_cast<int>(sys.size());
    for (int k = alphabet - 1; k >= 0; --k)
        stack.push_back({compose(outer, sys.map1(k).raw()), sys.weights().step(-1, k), k, 1});

    while (!stack.empty()) {
        Node n = stack.back();
        stack.pop_back();
        if (++nodes > 40'000'000)
            throw DomainError("discretize_through: node budget exceeded (contractions too weak?)");
        const Interval img = n.m.image(source);
        if (img.hi < window_lo || img.lo > window_hi) {
            b.add_interval(img.lo, img.hi, n.mass); // fully outside: all clipped
            continue;
        }
        max_len = std::max(max_len, n.len);
        if (detail::fits_single_cell(b, img.lo, img.hi) || n.len >= budget) {
            if (n.len >= budget && !detail::fits_single_cell(b, img.lo, img.hi))
                budget_mass += n.mass;
            b.add_interval(img.lo, img.hi, n.mass);
            continue;
        }
        for (int k = alphabet - 1; k >= 0; --k)
            stack.push_back({compose(n.m, sys.map1(k).raw()), n.mass * sys.weights().step(n.prev, k),
                             k, n.len + 1});
    }
    if (b.empty()) throw SupportError("discretize_through: no mass reached the target box");
    const double clipped = b.clipped();
    return {b.finish(true), budget_mass, clipped, max_len};
}

/// Stationary measure of a 1-D system on its attractor box at the given
/// dyadic depth.  The attractor must be normalized into the box (default
/// [0,1]); the refinement budget is 4x depth.
inline Discretization discretize(const IfsSystem& sys, int depth, Box box = Box::unit1()) {
    if (sys.dimension() == 2) {
        // 2-D systems live on [-1,1]^2 by construction.
        if (depth < 1 || depth > 40) throw DomainError("discretize: depth out of range");
        MeasureBuilder b(Box::ball2(), depth);
        double budget_mass = 0.0;
        int max_len = 0;
        const int budget = 4 * depth;
        struct Node {
            DiagonalAffineMap2D m;
            double mass;
            int prev;
            int len;
        };
        std::vector<Node> stack;
        const int alphabet = static_cast<int>(sys.size());
        for (int k = alphabet - 1; k >= 0; --k)
            stack.push_back({sys.map2(k), sys.weights().step(-1, k), k, 1});
        const double s = b.cell_side();
        while (!stack.empty()) {
            Node n = stack.back();
            stack.pop_back();
            max_len = std::max(max_len, n.len);
            const double x0 = n.m.ax - n.m.rho, x1 = n.m.ax + n.m.rho;
            const double y0 = n.m.ay - n.m.lam, y1 = n.m.ay + n.m.lam;
            const bool fits = detail::fits_single_cell(b, x0, x1) && 2.0 * n.m.rho <= s &&
                              detail::fits_single_cell(b, y0, y1) && 2.0 * n.m.lam <= s;
            // below half a cell the proportional rectangle deposit is already
            // exact at this resolution; keep splitting only to resolve position
            const bool subcell = 2.0 * n.m.rho <= 0.5 * s && 2.0 * n.m.lam <= 0.5 * s;
            if (fits || subcell || n.len >= budget) {
                if (!fits && !subcell) budget_mass += n.mass;
                b.add_rect(x0, x1, y0, y1, n.mass);
                continue;
            }
            for (int k = alphabet - 1; k >= 0; --k)
                stack.push_back({compose(n.m, sys.map2(k)), n.mass * sys.weights().step(n.prev, k),
                                 k, n.len + 1});
        }
        const double clipped = b.clipped();
        return {b.finish(true), budget_mass, clipped, max_len};
    }

    if (depth < 1 || depth > 60) throw DomainError("discretize: depth out of range");
    const Interval source{box.lo[0], box.hi(0)};
    return discretize_through(sys, Map1D::identity(), source, box, depth, 4 * depth);
}

/// Scenery frame mu_{x,t} computed directly from the system: cylinders are
/// descended inside the window B(x, 2^-t) and deposited through
/// y -> 2^t (y - x) onto [-1,1] at cell side 2^-rel_level.  Resolution is
/// constant relative to the viewing scale, so frames at large t stay cheap.
inline Discretization ifs_frame(const IfsSystem& sys, double x, double t, int rel_level,
                                Box source_box = Box::unit1()) {
    if (sys.dimension() != 1) throw ShapeError("ifs_frame: 1-D systems only");
    if (!(t >= 0.0)) throw DomainError("ifs_frame: t must be nonnegative");
    if (rel_level < 1 || rel_level > 30) throw DomainError("ifs_frame: rel_level out of range");
    if (t + rel_level > 48.0)
        throw PrecisionError("ifs_frame: t + rel_level beyond double-precision window (48)");
    const double zoom = std::exp2(t);
    const Map1D outer = Map1D::affine(zoom, -zoom * x);
    const Interval source{source_box.lo[0], source_box.hi(0)};
    const int budget = 4 * (static_cast<int>(std::ceil(t)) + rel_level + 2);
    return discretize_through(sys, outer, source, Box::ball1(), rel_level + 1, budget);
}

} // namespace scenlab
