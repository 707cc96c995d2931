#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "scenlab/errors.hpp"
#include "scenlab/ifs.hpp"

namespace scenlab {

namespace detail {

struct LogValue {
    double v;
    Word word;
};

/// log |lambda(f_w)| for every word up to `word_bound` symbols.  For affine
/// families the value depends only on the symbol multiset, so enumeration
/// is by exponent vectors (one representative word kept); non-affine
/// families fall back to full word enumeration with a hard cap.
inline std::vector<LogValue> log_ratio_spectrum(const IfsSystem& sys, int word_bound, int axis) {
    std::vector<LogValue> out;
    const int m = static_cast<int>(sys.size());
    const bool multiset = sys.dimension() == 2 || sys.all_affine();
    if (multiset) {
        std::vector<double> lr(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) {
            double r;
            if (sys.dimension() == 2)
                r = axis == 0 ? sys.map2(k).rho : sys.map2(k).lam;
            else
                r = std::fabs(sys.map1(k).raw().a);
            lr[static_cast<std::size_t>(k)] = std::log(r);
        }
        std::vector<int> counts(static_cast<std::size_t>(m), 0);
        // Depth-first over exponent vectors with 1 <= total <= word_bound.
        auto rec = [&](auto&& self, int sym, int remaining) -> void {
            if (sym == m) {
                int total = 0;
                double v = 0.0;
                Word w;
                for (int k = 0; k < m; ++k) {
                    const int c = counts[static_cast<std::size_t>(k)];
                    total += c;
                    v += static_cast<double>(c) * lr[static_cast<std::size_t>(k)];
                    for (int rep = 0; rep < c; ++rep) w.push_back(k);
                }
                if (total >= 1) out.push_back({v, std::move(w)});
                return;
            }
            for (int c = 0; c <= remaining; ++c) {
                counts[static_cast<std::size_t>(sym)] = c;
                self(self, sym + 1, remaining - c);
            }
            counts[static_cast<std::size_t>(sym)] = 0;
        };
        rec(rec, 0, word_bound);
    } else {
        if (std::pow(static_cast<double>(m), static_cast<double>(word_bound)) > 2e6)
            throw DomainError("log_ratio_spectrum: word bound too large for non-affine enumeration");
        struct Node {
            Map1D f;
            Word w;
        };
        std::vector<Node> stack;
        for (int k = m - 1; k >= 0; --k) stack.push_back({sys.map1(k).raw(), Word{k}});
        const Interval dom = sys.map1(0).domain();
        while (!stack.empty()) {
            Node n = std::move(stack.back());
            stack.pop_back();
            const double p = fixed_point_newton(n.f, dom);
            out.push_back({std::log(std::fabs(n.f.deriv(p))), n.w});
            if (static_cast<int>(n.w.size()) < word_bound) {
                for (int k = m - 1; k >= 0; --k) {
                    Node child{compose(n.f, sys.map1(k).raw()), n.w};
                    child.w.push_back(k);
                    stack.push_back(std::move(child));
                }
            }
        }
    }
    return out;
}

} // namespace detail

struct GapResult {
    double gap;
    Word word_a;
    Word word_b;   // achieving word of the second spectrum (modes 2 and 3)
    int multiplier; // achieving n (mode 1)
    double doubled_gap;
    bool shrank_on_doubling;
};

namespace detail {

/// Differences below this are treated as the "exact zeros" excluded from
/// the gap; representative words make equal multisets compare exactly, so
/// the threshold only absorbs float noise in genuinely lattice systems.
constexpr double kZeroTol = 1e-12;

inline GapResult gap_vs_beta_once(const IfsSystem& a, double beta, int word_bound,
                                  int multiplier_bound) {
    const auto va = log_ratio_spectrum(a, word_bound, 0);
    const double lb = std::log(beta);
    GapResult best{1e300, {}, {}, 0, 0.0, false};
    for (const auto& lv : va) {
        const double center = -lv.v / lb;
        const long lo = std::max(1L, std::lround(center) - 1);
        for (long n = lo; n <= std::min(static_cast<long>(multiplier_bound), std::lround(center) + 1);
             ++n) {
            const double d = std::fabs(lv.v + static_cast<double>(n) * lb);
            if (d <= kZeroTol || d >= best.gap) continue;
            best.gap = d;
            best.word_a = lv.word;
            best.multiplier = static_cast<int>(n);
        }
        // Clamped edges (all multiples below/above the reachable range).
        for (long n : {1L, static_cast<long>(multiplier_bound)}) {
            const double d = std::fabs(lv.v + static_cast<double>(n) * lb);
            if (d <= kZeroTol || d >= best.gap) continue;
            best.gap = d;
            best.word_a = lv.word;
            best.multiplier = static_cast<int>(n);
        }
    }
    return best;
}

inline GapResult gap_pair_once(const std::vector<LogValue>& va, const std::vector<LogValue>& vb) {
    std::vector<std::pair<double, std::size_t>> sorted;
    sorted.reserve(vb.size());
    for (std::size_t j = 0; j < vb.size(); ++j) sorted.push_back({vb[j].v, j});
    std::sort(sorted.begin(), sorted.end());
    GapResult best{1e300, {}, {}, 0, 0.0, false};
    for (const auto& lv : va) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), std::make_pair(lv.v, std::size_t{0}));
        for (long off = -2; off <= 2; ++off) {
            const long idx = (it - sorted.begin()) + off;
            if (idx < 0 || idx >= static_cast<long>(sorted.size())) continue;
            const double d = std::fabs(lv.v - sorted[static_cast<std::size_t>(idx)].first);
            if (d <= kZeroTol || d >= best.gap) continue;
            best.gap = d;
            best.word_a = lv.word;
            best.word_b = vb[sorted[static_cast<std::size_t>(idx)].second].word;
        }
    }
    return best;
}

} // namespace detail

/// Arithmetic independence of a system against beta: the bounded-search
/// minimum of |log lambda(f_w) + n log beta| over words |w| <= word_bound
/// and 1 <= n <= multiplier_bound, excluding exact zeros.  Also reports
/// whether the gap shrank when both bounds were doubled.
inline GapResult independence_gap_beta(const IfsSystem& a, double beta, int word_bound,
                                       int multiplier_bound) {
    if (!(beta > 1.0)) throw DomainError("independence_gap_beta: beta must exceed 1");
    if (word_bound < 1 || multiplier_bound < 1)
        throw DomainError("independence_gap_beta: bounds must be >= 1");
    GapResult r = detail::gap_vs_beta_once(a, beta, word_bound, multiplier_bound);
    const GapResult r2 = detail::gap_vs_beta_once(a, beta, 2 * word_bound, 2 * multiplier_bound);
    r.doubled_gap = r2.gap;
    r.shrank_on_doubling = r2.gap < r.gap - detail::kZeroTol;
    return r;
}

/// Independence of two systems: min |log lambda(f_w) - log lambda(g_v)|.
inline GapResult independence_gap_pair(const IfsSystem& a, const IfsSystem& b, int word_bound) {
    if (word_bound < 1) throw DomainError("independence_gap_pair: bound must be >= 1");
    auto run = [&](int bound) {
        return detail::gap_pair_once(detail::log_ratio_spectrum(a, bound, 0),
                                     detail::log_ratio_spectrum(b, bound, 0));
    };
    GapResult r = run(word_bound);
    const GapResult r2 = run(2 * word_bound);
    r.doubled_gap = r2.gap;
    r.shrank_on_doubling = r2.gap < r.gap - detail::kZeroTol;
    return r;
}

/// Independent eigenvalues of a 2-D diagonal system: min over word pairs
/// of |log lambda_w - log rho_v| (per-axis contraction spectra).
inline GapResult independence_gap_axes(const IfsSystem& sys, int word_bound) {
    if (sys.dimension() != 2) throw ShapeError("independence_gap_axes: 2-D systems only");
    if (word_bound < 1) throw DomainError("independence_gap_axes: bound must be >= 1");
    auto run = [&](int bound) {
        return detail::gap_pair_once(detail::log_ratio_spectrum(sys, bound, 1),
                                     detail::log_ratio_spectrum(sys, bound, 0));
    };
    GapResult r = run(word_bound);
    const GapResult r2 = run(2 * word_bound);
    r.doubled_gap = r2.gap;
    r.shrank_on_doubling = r2.gap < r.gap - detail::kZeroTol;
    return r;
}

/// Brute-force quasi-Bernoulli constant over words up to max_word_length:
/// max of the two-sided cylinder-mass ratio.  Bernoulli models return 1
/// exactly; a closed form for Markov models is WeightModel::qb_constant_exact.
inline double quasi_bernoulli_constant(const IfsSystem& sys, int max_word_length) {
    if (max_word_length < 1) throw DomainError("quasi_bernoulli_constant: length must be >= 1");
    if (sys.weights().kind() == WeightModel::Kind::bernoulli) return 1.0;
    const int m = static_cast<int>(sys.size());
    std::vector<Word> words;
    Word w;
    auto rec = [&](auto&& self) -> void {
        if (!w.empty()) words.push_back(w);
        if (static_cast<int>(w.size()) == max_word_length) return;
        for (int k = 0; k < m; ++k) {
            w.push_back(k);
            self(self);
            w.pop_back();
        }
    };
    rec(rec);
    if (words.size() * words.size() > 20'000'000)
        throw DomainError("quasi_bernoulli_constant: bounded search too large");
    double c = 1.0;
    for (const Word& wi : words) {
        const double mi = sys.weights().word_mass(wi);
        if (!(mi > 0.0)) throw DomainError("quasi_bernoulli_constant: degenerate weights (zero word mass)");
        for (const Word& wj : words) {
            const double mj = sys.weights().word_mass(wj);
            Word cat = wi;
            cat.insert(cat.end(), wj.begin(), wj.end());
            const double mij = sys.weights().word_mass(cat);
            if (!(mij > 0.0))
                throw DomainError("quasi_bernoulli_constant: degenerate weights (zero word mass)");
            const double r = mij / (mi * mj);
            c = std::max(c, std::max(r, 1.0 / r));
        }
    }
    return c;
}

struct SscResult {
    bool separated;
    int witness_a = -1;
    int witness_b = -1;
};

/// Rectangular strong separation: images of [-1,1]^2 under the maps are
/// pairwise disjoint closed rectangles (touching closures count as overlap).
inline SscResult rectangular_ssc_check(const IfsSystem& sys) {
    if (sys.dimension() != 2) throw ShapeError("rectangular_ssc_check: 2-D systems only");
    const int m = static_cast<int>(sys.size());
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const auto& a = sys.map2(i);
            const auto& b = sys.map2(j);
            const bool x_meet = a.ax - a.rho <= b.ax + b.rho && b.ax - b.rho <= a.ax + a.rho;
            const bool y_meet = a.ay - a.lam <= b.ay + b.lam && b.ay - b.lam <= a.ay + a.lam;
            if (x_meet && y_meet) return {false, i, j};
        }
    return {true, -1, -1};
}

} // namespace scenlab
