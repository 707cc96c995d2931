#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "scenlab/detail/maxflow.hpp"
#include "scenlab/dyadic_measure.hpp"
#include "scenlab/errors.hpp"

namespace scenlab {

/// -sum m log m over level-l cells, natural log, 0 log 0 = 0.
inline double shannon_entropy(const DyadicMeasure& mu, int level) {
    const DyadicMeasure c = coarsen(mu, level);
    double h = 0.0;
    for (const auto& [key, m] : c.cells())
        if (m > 0.0) h -= m * std::log(m);
    return h;
}

/// D_KL(mu || eta) on the level-l grid; +infinity when mu charges a cell
/// that eta does not.
inline double kl_divergence(const DyadicMeasure& mu, const DyadicMeasure& eta, int level) {
    if (!(mu.box() == eta.box())) throw ShapeError("kl_divergence: bounding boxes differ");
    const DyadicMeasure p = coarsen(mu, level);
    const DyadicMeasure q = coarsen(eta, level);
    double kl = 0.0;
    for (const auto& [key, m] : p.cells()) {
        if (m <= 0.0) continue;
        const double qm = q.cell_mass(key);
        if (qm <= 0.0) return std::numeric_limits<double>::infinity();
        kl += m * std::log(m / qm);
    }
    return kl;
}

/// l1 distance of the level-l cell mass vectors.
inline double partition_distance(const DyadicMeasure& mu, const DyadicMeasure& eta, int level) {
    if (!(mu.box() == eta.box())) throw ShapeError("partition_distance: bounding boxes differ");
    const DyadicMeasure p = coarsen(mu, level);
    const DyadicMeasure q = coarsen(eta, level);
    double d = 0.0;
    for (const auto& [key, m] : p.cells()) d += std::fabs(m - q.cell_mass(key));
    for (const auto& [key, m] : q.cells())
        if (p.cell_mass(key) == 0.0) d += m;
    return d;
}

namespace detail {

struct Atom {
    std::array<double, 2> x;
    double mass;
};

inline std::vector<Atom> atoms_of(const DyadicMeasure& mu) {
    std::vector<Atom> out;
    out.reserve(mu.support_size());
    for (const auto& [key, m] : mu.cells()) out.push_back({mu.cell_center(key), m});
    return out;
}

inline double max_dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return std::max(std::fabs(a[0] - b[0]), std::fabs(a[1] - b[1]));
}

/// Feasibility of a Strassen coupling: a transport plan supported on pairs
/// within distance eps carrying total mass >= 1 - eps.
inline bool coupling_feasible(const std::vector<Atom>& a, const std::vector<Atom>& b, double eps) {
    const int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
    MaxFlow flow(na + nb + 2);
    const int src = na + nb, dst = na + nb + 1;
    for (int i = 0; i < na; ++i) flow.add_edge(src, i, a[static_cast<std::size_t>(i)].mass);
    for (int j = 0; j < nb; ++j) flow.add_edge(na + j, dst, b[static_cast<std::size_t>(j)].mass);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j)
            if (max_dist(a[static_cast<std::size_t>(i)].x, b[static_cast<std::size_t>(j)].x) <=
                eps + 1e-12)
                flow.add_edge(i, na + j, 2.0);
    return flow.run(src, dst) >= 1.0 - eps - 1e-9;
}

inline bool atoms_identical(const std::vector<Atom>& a, const std::vector<Atom>& b) {
    if (a.size() != b.size()) return false;
    auto key = [](const Atom& u, const Atom& v) {
        if (u.x[0] != v.x[0]) return u.x[0] < v.x[0];
        return u.x[1] < v.x[1];
    };
    std::vector<Atom> sa = a, sb = b;
    std::sort(sa.begin(), sa.end(), key);
    std::sort(sb.begin(), sb.end(), key);
    for (std::size_t i = 0; i < sa.size(); ++i) {
        if (std::fabs(sa[i].x[0] - sb[i].x[0]) > 1e-12) return false;
        if (std::fabs(sa[i].x[1] - sb[i].x[1]) > 1e-12) return false;
        if (std::fabs(sa[i].mass - sb[i].mass) > 1e-12) return false;
    }
    return true;
}

inline double lp_bisect(const std::vector<Atom>& a, const std::vector<Atom>& b) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 24; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (coupling_feasible(a, b, mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

} // namespace detail

/// Levy-Prokhorov distance between the atomized measures (atoms at cell
/// centers, max metric), via bisection over eps with max-flow coupling
/// feasibility.  Resolution 2^-24; identical supports return 0 exactly.
inline double lp_distance(const DyadicMeasure& mu, const DyadicMeasure& eta) {
    const auto a = detail::atoms_of(mu);
    const auto b = detail::atoms_of(eta);
    if (a.size() * b.size() > 4'000'000)
        throw ShapeError("lp_distance: supports too large; coarsen the measures first");
    if (detail::atoms_identical(a, b)) return 0.0;
    return detail::lp_bisect(a, b);
}

/// Weighted finite list of DyadicMeasure atoms (empirical distributions of
/// frames, tangent-distribution estimates).
struct MeasureDistribution {
    std::vector<double> weights;
    std::vector<DyadicMeasure> atoms;

    MeasureDistribution() = default;

    MeasureDistribution(std::vector<double> w, std::vector<DyadicMeasure> a)
        : weights(std::move(w)), atoms(std::move(a)) {
        if (weights.size() != atoms.size() || weights.empty())
            throw ShapeError("MeasureDistribution: weight/atom count mismatch");
        double total = 0.0;
        for (double x : weights) {
            if (!(x > 0.0)) throw DomainError("MeasureDistribution: weights must be positive");
            total += x;
        }
        for (double& x : weights) x /= total;
    }

    static MeasureDistribution uniform(std::vector<DyadicMeasure> a) {
        std::vector<double> w(a.size(), 1.0);
        return MeasureDistribution(std::move(w), std::move(a));
    }

    std::size_t size() const { return weights.size(); }
};

/// Levy-Prokhorov distance between weighted point masses in an abstract
/// metric space given the ground distance matrix (bounded by 1).
inline double lp_from_ground(const std::vector<double>& wp, const std::vector<double>& wq,
                             const std::vector<std::vector<double>>& ground) {
    const int np = static_cast<int>(wp.size()), nq = static_cast<int>(wq.size());
    auto feasible = [&](double eps) {
        detail::MaxFlow flow(np + nq + 2);
        const int src = np + nq, dst = np + nq + 1;
        for (int i = 0; i < np; ++i) flow.add_edge(src, i, wp[static_cast<std::size_t>(i)]);
        for (int j = 0; j < nq; ++j) flow.add_edge(np + j, dst, wq[static_cast<std::size_t>(j)]);
        for (int i = 0; i < np; ++i)
            for (int j = 0; j < nq; ++j)
                if (ground[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] <= eps + 1e-12)
                    flow.add_edge(i, np + j, 2.0);
        return flow.run(src, dst) >= 1.0 - eps - 1e-9;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 24; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// Levy-Prokhorov distance between distributions over measures, with
/// lp_distance as the ground metric.
inline double meta_lp_distance(const MeasureDistribution& p, const MeasureDistribution& q) {
    if (p.size() == q.size()) {
        bool same = true;
        for (std::size_t i = 0; i < p.size() && same; ++i) {
            if (std::fabs(p.weights[i] - q.weights[i]) > 1e-12) same = false;
            else if (!detail::atoms_identical(detail::atoms_of(p.atoms[i]), detail::atoms_of(q.atoms[i])))
                same = false;
        }
        if (same) return 0.0;
    }
    std::vector<std::vector<double>> ground(p.size(), std::vector<double>(q.size(), 0.0));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) ground[i][j] = lp_distance(p.atoms[i], q.atoms[j]);
    return lp_from_ground(p.weights, q.weights, ground);
}

/// Both sides of the entropy chain identity
///   H(eta, D_n) = -sum_{k<n} sum_{I_{k+1} subset I_k} eta(I_{k+1})
///                 log(eta(I_{k+1}) / eta(I_k));
/// returns the absolute residual.
inline double entropy_chain_identity_check(const DyadicMeasure& eta, int n) {
    const double lhs = shannon_entropy(eta, n);
    double rhs = 0.0;
    CellTable fine = coarsen(eta, n).cells();
    for (int k = n - 1; k >= 0; --k) {
        CellTable parent;
        for (const auto& [key, m] : fine) parent[{key.i >> 1, key.j >> 1}] += m;
        for (const auto& [key, m] : fine) {
            if (m <= 0.0) continue;
            const double pm = parent[{key.i >> 1, key.j >> 1}];
            rhs -= m * std::log(m / pm);
        }
        fine = std::move(parent);
    }
    return std::fabs(lhs - rhs);
}

/// Probability vector over level-l cells of some partition.
struct PartitionVector {
    int level = 0;
    std::vector<double> probs;
};

struct GibbsResult {
    double kl;
    double l1;
    bool nonneg_ok;
    bool l1_bound_ok;
};

/// Evaluates D_KL(p||q) and the l1 distance, then checks D_KL >= 0 and the
/// quantitative consequence l1 < sqrt(2 eps #I) with eps = D_KL + 1e-12.
inline GibbsResult gibbs_check(const PartitionVector& p, const PartitionVector& q) {
    if (p.probs.size() != q.probs.size()) throw ShapeError("gibbs_check: vector sizes differ");
    double kl = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        const double pi = p.probs[i], qi = q.probs[i];
        l1 += std::fabs(pi - qi);
        if (pi > 0.0) {
            if (qi <= 0.0) return {std::numeric_limits<double>::infinity(), l1, true, true};
            kl += pi * std::log(pi / qi);
        }
    }
    const double eps = kl + 1e-12;
    const double bound = std::sqrt(2.0 * eps * static_cast<double>(p.probs.size()));
    return {kl, l1, kl >= -1e-15, l1 < bound};
}

/// sup over the r grid of the magnified measure's mass in the annulus
/// B(0, r+rho) \ B(0, r-rho), r in (rho, 1].  The grid starts one cell
/// above rho: at r = rho the inner ball degenerates to the single point 0,
/// which no cell-center atom can represent, so that endpoint is excluded as
/// a discretization artifact.
inline double annulus_mass_profile(const DyadicMeasure& mu, std::array<double, 2> x, int k,
                                   double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("annulus_mass_profile: rho must be in (0,1)");
    const DyadicMeasure frame = magnify(mu, x, k);
    const double step = 0.5 * frame.cell_side();
    double sup = 0.0;
    for (double r = rho + frame.cell_side(); r <= 1.0 + 1e-12; r += step) {
        const double m =
            frame.ball_mass({0.0, 0.0}, r + rho) - frame.ball_mass({0.0, 0.0}, r - rho);
        sup = std::max(sup, m);
    }
    return sup;
}

inline double annulus_mass_profile(const DyadicMeasure& mu, double x, int k, double rho) {
    return annulus_mass_profile(mu, {x, 0.0}, k, rho);
}

} // namespace scenlab
