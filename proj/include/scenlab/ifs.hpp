#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "scenlab/errors.hpp"

namespace scenlab {

/// Finite word over the alphabet {0, ..., m-1}.
using Word = std::vector<int>;

inline Word word_from_string(const std::string& s) {
    Word w;
    w.reserve(s.size());
    for (char c : s) {
        if (c < '0' || c > '9') throw IndexError("word_from_string: symbol out of range: " + std::string(1, c));
        w.push_back(c - '0');
    }
    return w;
}

inline std::string word_to_string(const Word& w) {
    std::string s;
    s.reserve(w.size());
    for (int k : w) {
        if (k < 0 || k > 9) {
            s += '[';
            s += std::to_string(k);
            s += ']';
        } else {
            s += static_cast<char>('0' + k);
        }
    }
    return s;
}

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double length() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
    bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

/// Unvalidated 1-D map algebra: x -> (a x + b) / (c x + d).
/// Affine maps are kept in the exact form c == 0, d == 1 so that affine
/// composition introduces no division at all.  Moebius coefficients are
/// normalized to |ad - bc| = 1 with d >= 0.
struct Map1D {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static Map1D affine(double ratio, double offset) { return Map1D{ratio, offset, 0.0, 1.0}; }

    static Map1D moebius(double a, double b, double c, double d) {
        Map1D m{a, b, c, d};
        m.normalize();
        return m;
    }

    static Map1D identity() { return Map1D{}; }

    bool is_affine() const { return c == 0.0 && d == 1.0; }

    double operator()(double x) const {
        if (is_affine()) return a * x + b;
        return (a * x + b) / (c * x + d);
    }

    /// Pointwise derivative (a d - b c) / (c x + d)^2.
    double deriv(double x) const {
        if (is_affine()) return a;
        const double den = c * x + d;
        return (a * d - b * c) / (den * den);
    }

    /// Pole location, or +-inf for affine maps.
    double pole() const {
        if (c == 0.0) return std::numeric_limits<double>::infinity();
        return -d / c;
    }

    /// Image of an interval under this (monotone, injective away from the
    /// pole) map; endpoints are sorted, so orientation-reversing maps are
    /// handled transparently.
    Interval image(const Interval& iv) const {
        const double u = (*this)(iv.lo), v = (*this)(iv.hi);
        return {std::min(u, v), std::max(u, v)};
    }

    Map1D inverse() const {
        Map1D m{d, -b, -c, a};
        m.normalize();
        return m;
    }

    void normalize() {
        if (c == 0.0) {
            if (d == 0.0) throw DomainError("Map1D: degenerate map (c = d = 0)");
            a /= d;
            b /= d;
            d = 1.0;
            if (a == 0.0) throw DomainError("Map1D: degenerate map (zero derivative)");
            return;
        }
        const double det = a * d - b * c;
        if (det == 0.0) throw DomainError("Map1D: degenerate map (zero determinant)");
        double s = std::sqrt(std::fabs(det));
        if (d < 0.0 || (d == 0.0 && c < 0.0)) s = -s;
        a /= s;
        b /= s;
        c /= s;
        d /= s;
    }
};

/// f o g as 2x2 matrix product.
inline Map1D compose(const Map1D& f, const Map1D& g) {
    Map1D m{f.a * g.a + f.b * g.c, f.a * g.b + f.b * g.d,
            f.c * g.a + f.d * g.c, f.c * g.b + f.d * g.d};
    m.normalize();
    return m;
}

namespace detail {

/// Attracting fixed point of a contraction, refined by Newton iteration on
/// f(x) - x.  The closed-form seed is exact for affine maps and the stable
/// quadratic root for moebius maps, so refinement converges in a few steps.
inline double fixed_point_newton(const Map1D& m, const Interval& domain) {
    double p;
    if (m.is_affine()) {
        p = m.b / (1.0 - m.a);
    } else {
        // c x^2 + (d - a) x - b = 0
        const double A = m.c, B = m.d - m.a, C = -m.b;
        const double disc = B * B - 4.0 * A * C;
        if (disc < 0.0) throw DomainError("fixed_point: no real fixed point");
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (B + (B >= 0.0 ? sq : -sq));
        double r1 = (A != 0.0) ? q / A : -C / B;
        double r2 = (q != 0.0) ? C / q : r1;
        const double pad = 1e-9 * (1.0 + domain.length());
        auto admissible = [&](double r) {
            return r >= domain.lo - pad && r <= domain.hi + pad && std::fabs(m.deriv(r)) < 1.0;
        };
        if (admissible(r1))
            p = r1;
        else if (admissible(r2))
            p = r2;
        else
            throw DomainError("fixed_point: no attracting fixed point in the domain");
    }
    for (int it = 0; it < 8; ++it) {
        const double g = m(p) - p;
        const double dg = m.deriv(p) - 1.0;
        if (dg == 0.0) break;
        const double step = g / dg;
        p -= step;
        if (std::fabs(step) < 1e-15 * (1.0 + std::fabs(p))) break;
    }
    return p;
}

} // namespace detail

/// Validated contraction on a fixed interval domain.  The default domain is
/// the unit interval, the normalized home of 1-D attractors.  `alpha` tags
/// the regularity class the map is declared to belong to; it is carried as
/// metadata and never branches the numerics.
class ConformalMap1D {
  public:
    ConformalMap1D(Map1D m, Interval domain = Interval{0.0, 1.0}, double alpha = 1.0)
        : map_(m), domain_(domain), alpha_(alpha) {
        if (!(domain_.lo < domain_.hi)) throw DomainError("ConformalMap1D: empty domain");
        if (!m.is_affine()) {
            const double p = m.pole();
            if (domain_.lo <= p && p <= domain_.hi)
                throw DomainError("ConformalMap1D: pole inside the domain");
        }
        // |f'| has its extrema at the endpoints: it is constant for affine
        // maps and monotone along any pole-free interval for moebius maps.
        const double d0 = std::fabs(map_.deriv(domain_.lo));
        const double d1 = std::fabs(map_.deriv(domain_.hi));
        if (!(d0 > 0.0) || !(d1 > 0.0)) throw DomainError("ConformalMap1D: vanishing derivative");
        if (!(std::max(d0, d1) < 1.0)) throw DomainError("ConformalMap1D: not a contraction on its domain");
        const Interval img = map_.image(domain_);
        const double slack = 1e-12 * (1.0 + domain_.length());
        if (img.lo < domain_.lo - slack || img.hi > domain_.hi + slack)
            throw DomainError("ConformalMap1D: image escapes the domain");
    }

    static ConformalMap1D affine(double ratio, double offset, Interval domain = Interval{0.0, 1.0}) {
        return ConformalMap1D(Map1D::affine(ratio, offset), domain);
    }

    static ConformalMap1D moebius(double a, double b, double c, double d,
                                  Interval domain = Interval{0.0, 1.0}) {
        return ConformalMap1D(Map1D::moebius(a, b, c, d), domain);
    }

    double operator()(double x) const { return map_(x); }
    double deriv(double x) const { return map_.deriv(x); }
    Interval image(const Interval& iv) const { return map_.image(iv); }
    const Map1D& raw() const { return map_; }
    const Interval& domain() const { return domain_; }
    double alpha() const { return alpha_; }
    bool is_affine() const { return map_.is_affine(); }

  private:
    Map1D map_;
    Interval domain_;
    double alpha_;
};

/// (x, y) -> (rho x + ax, lam y + ay) on [-1,1]^2.
struct DiagonalAffineMap2D {
    double rho, lam, ax, ay;

    DiagonalAffineMap2D(double rho_, double lam_, double ax_, double ay_)
        : rho(rho_), lam(lam_), ax(ax_), ay(ay_) {
        if (!(rho > 0.0 && rho < 1.0 && lam > 0.0 && lam < 1.0))
            throw DomainError("DiagonalAffineMap2D: contraction ratios must lie in (0,1)");
        if (std::fabs(ax) + rho > 1.0 + 1e-12 || std::fabs(ay) + lam > 1.0 + 1e-12)
            throw DomainError("DiagonalAffineMap2D: image escapes [-1,1]^2");
    }

    std::array<double, 2> operator()(std::array<double, 2> p) const {
        return {rho * p[0] + ax, lam * p[1] + ay};
    }
};

inline DiagonalAffineMap2D compose(const DiagonalAffineMap2D& f, const DiagonalAffineMap2D& g) {
    return DiagonalAffineMap2D(f.rho * g.rho, f.lam * g.lam,
                               f.rho * g.ax + f.ax, f.lam * g.ay + f.ay);
}

/// Word-mass model: Bernoulli product weights or a 1-step Markov chain
/// (initial vector + row-stochastic transition matrix).  Both satisfy the
/// quasi-Bernoulli inequality; Bernoulli does so with constant 1.
class WeightModel {
  public:
    enum class Kind { bernoulli, markov };

    static WeightModel bernoulli(std::vector<double> p) {
        WeightModel w;
        w.kind_ = Kind::bernoulli;
        w.initial_ = normalized(std::move(p), "weight vector");
        return w;
    }

    static WeightModel markov(std::vector<double> initial, std::vector<std::vector<double>> rows) {
        WeightModel w;
        w.kind_ = Kind::markov;
        w.initial_ = normalized(std::move(initial), "initial vector");
        if (rows.size() != w.initial_.size())
            throw DomainError("WeightModel: transition matrix is not square with the initial vector");
        for (auto& r : rows) {
            if (r.size() != w.initial_.size())
                throw DomainError("WeightModel: ragged transition matrix");
            w.rows_.push_back(normalized(std::move(r), "transition row"));
        }
        return w;
    }

    Kind kind() const { return kind_; }
    std::size_t alphabet() const { return initial_.size(); }
    const std::vector<double>& initial() const { return initial_; }
    const std::vector<double>& row(int i) const { return rows_.at(static_cast<std::size_t>(i)); }

    /// Probability of the next symbol given the previous one (-1 at the root).
    double step(int prev, int next) const {
        check_symbol(next);
        if (kind_ == Kind::bernoulli || prev < 0) return initial_[static_cast<std::size_t>(next)];
        check_symbol(prev);
        return rows_[static_cast<std::size_t>(prev)][static_cast<std::size_t>(next)];
    }

    double word_mass(const Word& w) const {
        double m = 1.0;
        int prev = -1;
        for (int k : w) {
            m *= step(prev, k);
            prev = k;
        }
        return m;
    }

    /// Exact quasi-Bernoulli constant.  For a Markov model the ratio
    /// mass(ij) / (mass(i) mass(j)) collapses to T[last(i)][first(j)] /
    /// initial[first(j)], so the supremum over all word pairs is attained on
    /// symbol pairs.
    double qb_constant_exact() const {
        if (kind_ == Kind::bernoulli) return 1.0;
        double c = 1.0;
        for (std::size_t a = 0; a < alphabet(); ++a)
            for (std::size_t b = 0; b < alphabet(); ++b) {
                const double r = rows_[a][b] / initial_[b];
                if (r <= 0.0) throw DomainError("WeightModel: degenerate weights (zero word mass)");
                c = std::max(c, std::max(r, 1.0 / r));
            }
        return c;
    }

  private:
    static std::vector<double> normalized(std::vector<double> p, const char* what) {
        if (p.empty()) throw DomainError(std::string("WeightModel: ") + what + " needs at least one entry");
        double s = 0.0;
        for (double x : p) {
            if (!(x > 0.0)) throw DomainError(std::string("WeightModel: ") + what + " must be strictly positive");
            s += x;
        }
        if (std::fabs(s - 1.0) > 1e-9)
            throw DomainError(std::string("WeightModel: ") + what + " sums to " + std::to_string(s) + ", not 1");
        for (double& x : p) x /= s;
        return p;
    }

    void check_symbol(int k) const {
        if (k < 0 || static_cast<std::size_t>(k) >= alphabet())
            throw IndexError("WeightModel: symbol " + std::to_string(k) + " outside the alphabet");
    }

    Kind kind_ = Kind::bernoulli;
    std::vector<double> initial_;
    std::vector<std::vector<double>> rows_;
};

/// An iterated function system together with its word-mass model.
/// Exactly one of the map families is populated: conformal maps on a 1-D
/// interval, or diagonal affine maps on [-1,1]^2.
class IfsSystem {
  public:
    static IfsSystem conformal(std::vector<ConformalMap1D> maps, WeightModel weights) {
        IfsSystem s(std::move(weights));
        if (maps.empty()) throw DomainError("IfsSystem: need at least one map");
        if (maps.size() != s.weights_.alphabet())
            throw DomainError("IfsSystem: map count does not match the weight alphabet");
        for (std::size_t i = 1; i < maps.size(); ++i)
            if (!(maps[i].domain() == maps[0].domain()))
                throw DomainError("IfsSystem: all maps must share one domain interval");
        s.maps1_ = std::move(maps);
        return s;
    }

    static IfsSystem diagonal(std::vector<DiagonalAffineMap2D> maps, WeightModel weights) {
        IfsSystem s(std::move(weights));
        if (maps.empty()) throw DomainError("IfsSystem: need at least one map");
        if (maps.size() != s.weights_.alphabet())
            throw DomainError("IfsSystem: map count does not match the weight alphabet");
        s.maps2_ = std::move(maps);
        return s;
    }

    int dimension() const { return maps2_.empty() ? 1 : 2; }
    std::size_t size() const { return maps2_.empty() ? maps1_.size() : maps2_.size(); }
    const WeightModel& weights() const { return weights_; }

    const ConformalMap1D& map1(int i) const {
        check(i);
        if (dimension() != 1) throw ShapeError("IfsSystem: 1-D map requested from a 2-D system");
        return maps1_[static_cast<std::size_t>(i)];
    }

    const DiagonalAffineMap2D& map2(int i) const {
        check(i);
        if (dimension() != 2) throw ShapeError("IfsSystem: 2-D map requested from a 1-D system");
        return maps2_[static_cast<std::size_t>(i)];
    }

    bool all_affine() const {
        for (const auto& m : maps1_)
            if (!m.is_affine()) return false;
        return true;
    }

  private:
    explicit IfsSystem(WeightModel w) : weights_(std::move(w)) {}

    void check(int i) const {
        if (i < 0 || static_cast<std::size_t>(i) >= size())
            throw IndexError("IfsSystem: symbol " + std::to_string(i) + " outside the alphabet");
    }

    std::vector<ConformalMap1D> maps1_;
    std::vector<DiagonalAffineMap2D> maps2_;
    WeightModel weights_;
};

/// f_{w_1} o ... o f_{w_n} for a 1-D system.  The empty word is rejected:
/// the identity is not a contraction, so it is not representable as a
/// ConformalMap1D.
inline ConformalMap1D compose_word(const IfsSystem& sys, const Word& w) {
    if (w.empty()) throw DomainError("compose_word: empty word (identity is not a representable contraction)");
    Map1D m = sys.map1(w.front()).raw();
    double alpha = sys.map1(w.front()).alpha();
    for (std::size_t i = 1; i < w.size(); ++i) {
        m = compose(m, sys.map1(w[i]).raw());
        alpha = std::min(alpha, sys.map1(w[i]).alpha());
    }
    return ConformalMap1D(m, sys.map1(w.front()).domain(), alpha);
}

inline DiagonalAffineMap2D compose_word_2d(const IfsSystem& sys, const Word& w) {
    if (w.empty()) throw DomainError("compose_word_2d: empty word");
    DiagonalAffineMap2D m = sys.map2(w.front());
    for (std::size_t i = 1; i < w.size(); ++i) m = compose(m, sys.map2(w[i]));
    return m;
}

/// Attracting fixed point p and the contraction ratio Df|_p.
struct FixedPoint {
    double point;
    double ratio;
};

inline FixedPoint fixed_point_and_ratio(const ConformalMap1D& f) {
    const double p = detail::fixed_point_newton(f.raw(), f.domain());
    return {p, f.deriv(p)};
}

/// Image of the cylinder word under the canonical projection, approximated
/// by f_w(0) (1-D) or f_w(0,0) (2-D); `error_bound` is the diameter of the
/// image of the reference ball, which contains the whole cylinder.
struct ProjectedPoint {
    double x = 0.0;
    double y = 0.0;
    double error_bound = 0.0;
};

inline ProjectedPoint canonical_project(const IfsSystem& sys, const Word& w) {
    if (w.empty()) throw DomainError("canonical_project: empty word");
    ProjectedPoint out;
    if (sys.dimension() == 1) {
        double x = 0.0;
        for (auto it = w.rbegin(); it != w.rend(); ++it) x = sys.map1(*it)(x);
        const Interval img = compose_word(sys, w).image(sys.map1(0).domain());
        out.x = x;
        out.error_bound = img.length();
    } else {
        std::array<double, 2> p{0.0, 0.0};
        for (auto it = w.rbegin(); it != w.rend(); ++it) p = sys.map2(*it)(p);
        const DiagonalAffineMap2D m = compose_word_2d(sys, w);
        out.x = p[0];
        out.y = p[1];
        out.error_bound = 2.0 * std::max(m.rho, m.lam);
    }
    return out;
}

/// First-exit cover of the ball B(x, 2^{-t}) at scale 2^{-t}: the set of
/// words w whose cylinder image has diameter <= 2^{-t} while the parent
/// cylinder still exceeds 2^{-t}, intersected (as closed sets) with the
/// ball.  Cylinder diameters are measured on the attractor box: the shared
/// map domain in 1-D, [-1,1]^2 under the max metric in 2-D.
inline std::vector<Word> stopping_cover(const IfsSystem& sys, std::array<double, 2> x, double t) {
    if (!(t >= 0.0)) throw DomainError("stopping_cover: t must be nonnegative");
    const double r = std::exp2(-t);
    std::vector<Word> cover;

    if (sys.dimension() == 1) {
        const Interval ref = sys.map1(0).domain();
        const Interval ball{x[0] - r, x[0] + r};
        struct Node {
            Word w;
            Map1D m;
        };
        std::vector<Node> stack;
        for (int k = static_cast<int>(sys.size()) - 1; k >= 0; --k)
            stack.push_back({Word{k}, sys.map1(k).raw()});
        while (!stack.empty()) {
            Node n = std::move(stack.back());
            stack.pop_back();
            const Interval img = n.m.image(ref);
            if (!img.intersects(ball)) continue;
            if (img.length() <= r) {
                cover.push_back(std::move(n.w));
                continue;
            }
            for (int k = static_cast<int>(sys.size()) - 1; k >= 0; --k) {
                Node child{n.w, compose(n.m, sys.map1(k).raw())};
                child.w.push_back(k);
                stack.push_back(std::move(child));
            }
        }
    } else {
        struct Node {
            Word w;
            DiagonalAffineMap2D m;
        };
        std::vector<Node> stack;
        for (int k = static_cast<int>(sys.size()) - 1; k >= 0; --k) stack.push_back({Word{k}, sys.map2(k)});
        while (!stack.empty()) {
            Node n = std::move(stack.back());
            stack.pop_back();
            const Interval ix{n.m.ax - n.m.rho, n.m.ax + n.m.rho};
            const Interval iy{n.m.ay - n.m.lam, n.m.ay + n.m.lam};
            if (!ix.intersects({x[0] - r, x[0] + r}) || !iy.intersects({x[1] - r, x[1] + r})) continue;
            const double diam = 2.0 * std::max(n.m.rho, n.m.lam);
            if (diam <= r) {
                cover.push_back(std::move(n.w));
                continue;
            }
            for (int k = static_cast<int>(sys.size()) - 1; k >= 0; --k) {
                Node child{n.w, compose(n.m, sys.map2(k))};
                child.w.push_back(k);
                stack.push_back(std::move(child));
            }
        }
    }
    std::sort(cover.begin(), cover.end());
    return cover;
}

inline std::vector<Word> stopping_cover(const IfsSystem& sys, double x, double t) {
    return stopping_cover(sys, {x, 0.0}, t);
}

} // namespace scenlab
