#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "scenlab/arithmetic.hpp"
#include "scenlab/ifs.hpp"

using namespace scenlab;
using Catch::Approx;

namespace {

IfsSystem cantor13() {
    return IfsSystem::conformal({ConformalMap1D::affine(1.0 / 3.0, 0.0),
                                 ConformalMap1D::affine(1.0 / 3.0, 2.0 / 3.0)},
                                WeightModel::bernoulli({0.5, 0.5}));
}

IfsSystem halves() {
    return IfsSystem::conformal({ConformalMap1D::affine(0.5, 0.0),
                                 ConformalMap1D::affine(0.5, 0.5)},
                                WeightModel::bernoulli({0.5, 0.5}));
}

// Two moebius contractions of [0,1] with images [0,1/4] and [2/3,3/4].
IfsSystem moebius_pair() {
    return IfsSystem::conformal({ConformalMap1D::moebius(1.0, 0.0, 1.0, 3.0),
                                 ConformalMap1D::moebius(1.0, 2.0, 1.0, 3.0)},
                                WeightModel::bernoulli({0.5, 0.5}));
}

IfsSystem carpet() {
    return IfsSystem::diagonal({DiagonalAffineMap2D(0.5, 1.0 / 3.0, -0.5, -2.0 / 3.0),
                                DiagonalAffineMap2D(0.5, 1.0 / 3.0, 0.5, 2.0 / 3.0)},
                               WeightModel::bernoulli({0.5, 0.5}));
}

} // namespace

TEST_CASE("word string round trip") {
    CHECK(word_from_string("0101") == Word{0, 1, 0, 1});
    CHECK(word_to_string(Word{1, 1, 0}) == "110");
    CHECK_THROWS_AS(word_from_string("0a"), IndexError);
}

TEST_CASE("map validation rejects bad contractions") {
    CHECK_THROWS_AS(ConformalMap1D::affine(1.5, 0.0), DomainError);      // expands
    CHECK_THROWS_AS(ConformalMap1D::affine(0.5, 0.75), DomainError);     // image escapes
    CHECK_THROWS_AS(ConformalMap1D::moebius(1.0, 0.0, 1.0, -0.5), DomainError); // pole at 1/2
    CHECK_THROWS_AS(DiagonalAffineMap2D(1.2, 0.5, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(DiagonalAffineMap2D(0.5, 0.5, 0.75, 0.0), DomainError);
    CHECK_NOTHROW(ConformalMap1D::affine(0.5, 0.5));
    CHECK_NOTHROW(ConformalMap1D::affine(-0.5, 0.5)); // orientation reversing is fine
}

TEST_CASE("weight model validation") {
    CHECK_THROWS_AS(WeightModel::bernoulli({0.5, 0.6}), DomainError);
    CHECK_THROWS_AS(WeightModel::bernoulli({1.5, -0.5}), DomainError);
    CHECK_THROWS_AS(WeightModel::bernoulli({}), DomainError);
    CHECK_THROWS_AS(WeightModel::markov({0.5, 0.5}, {{0.5, 0.5}}), DomainError); // not square
    CHECK_THROWS_AS(WeightModel::markov({0.5, 0.5}, {{0.5, 0.5}, {1.0}}), DomainError);
    const WeightModel m = WeightModel::markov({0.5, 0.5}, {{0.4, 0.6}, {0.6, 0.4}});
    CHECK(m.step(-1, 0) == Approx(0.5));
    CHECK(m.step(0, 1) == Approx(0.6));
    CHECK(m.word_mass(Word{0, 1}) == Approx(0.3));
    // masses of all length-3 words partition the unit mass
    double total = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) total += m.word_mass(Word{a, b, c});
    CHECK(total == Approx(1.0).margin(1e-12));
}

TEST_CASE("system factories") {
    CHECK_THROWS_AS(IfsSystem::conformal({ConformalMap1D::affine(0.5, 0.0)},
                                         WeightModel::bernoulli({0.5, 0.5})),
                    DomainError); // map count vs alphabet
    const IfsSystem dirac = IfsSystem::conformal({ConformalMap1D::affine(0.5, 0.0)},
                                                 WeightModel::bernoulli({1.0}));
    CHECK(dirac.size() == 1);
    CHECK(dirac.dimension() == 1);
    CHECK(carpet().dimension() == 2);
    CHECK_THROWS_AS(cantor13().map2(0), ShapeError);
    CHECK_THROWS_AS(carpet().map1(0), ShapeError);
    CHECK_THROWS_AS(cantor13().map1(2), IndexError);
}

TEST_CASE("compose_word on affine systems") {
    const IfsSystem sys = cantor13();
    const ConformalMap1D m01 = compose_word(sys, word_from_string("01"));
    CHECK(m01.is_affine());
    CHECK(m01.raw().a == Approx(1.0 / 9.0).margin(1e-15));
    CHECK(m01.raw().b == Approx(2.0 / 9.0).margin(1e-15));

    const ConformalMap1D m0 = compose_word(sys, word_from_string("0"));
    CHECK(m0.raw().a == sys.map1(0).raw().a);
    CHECK(m0.raw().b == sys.map1(0).raw().b);

    const ConformalMap1D m11 = compose_word(halves(), word_from_string("11"));
    CHECK(m11.raw().a == 0.25);
    CHECK(m11.raw().b == 0.75);

    CHECK_THROWS_AS(compose_word(sys, Word{}), DomainError);
    CHECK_THROWS_AS(compose_word(sys, Word{2}), IndexError);
}

TEST_CASE("moebius composition stays normalized and matches pointwise") {
    const IfsSystem sys = moebius_pair();
    const ConformalMap1D m = compose_word(sys, word_from_string("0110"));
    CHECK_FALSE(m.is_affine());
    const Map1D& r = m.raw();
    CHECK(std::fabs(r.a * r.d - r.b * r.c) == Approx(1.0).margin(1e-12));
    CHECK(r.d >= 0.0);
    // inverse really inverts
    const Map1D id = compose(r, r.inverse());
    for (double x : {0.0, 0.3, 0.7, 1.0}) CHECK(id(x) == Approx(x).margin(1e-12));
}

TEST_CASE("composition is a homomorphism") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> len(1, 4);
    std::uniform_int_distribution<int> sym(0, 1);
    std::uniform_real_distribution<double> pt(0.0, 1.0);
    for (const IfsSystem& sys : {cantor13(), moebius_pair()}) {
        for (int rep = 0; rep < 25; ++rep) {
            Word u, v;
            for (int i = len(rng); i > 0; --i) u.push_back(sym(rng));
            for (int i = len(rng); i > 0; --i) v.push_back(sym(rng));
            Word uv = u;
            uv.insert(uv.end(), v.begin(), v.end());
            const ConformalMap1D fu = compose_word(sys, u);
            const ConformalMap1D fv = compose_word(sys, v);
            const ConformalMap1D fuv = compose_word(sys, uv);
            for (int s = 0; s < 100; ++s) {
                const double x = pt(rng);
                REQUIRE(fuv(x) == Approx(fu(fv(x))).margin(1e-12));
            }
        }
    }
}

TEST_CASE("fixed point and ratio") {
    const FixedPoint a = fixed_point_and_ratio(ConformalMap1D::affine(1.0 / 3.0, 2.0 / 3.0));
    CHECK(a.point == Approx(1.0).margin(1e-12));
    CHECK(a.ratio == Approx(1.0 / 3.0).margin(1e-12));

    const FixedPoint m = fixed_point_and_ratio(ConformalMap1D::moebius(1.0, 0.0, 1.0, 3.0));
    CHECK(m.point == Approx(0.0).margin(1e-12));
    CHECK(m.ratio == Approx(1.0 / 3.0).margin(1e-12));

    const FixedPoint h = fixed_point_and_ratio(ConformalMap1D::affine(0.5, 0.0));
    CHECK(h.point == 0.0);
    CHECK(h.ratio == 0.5);

    const FixedPoint g = fixed_point_and_ratio(ConformalMap1D::moebius(1.0, 2.0, 1.0, 3.0));
    CHECK(g.point == Approx(std::sqrt(3.0) - 1.0).margin(1e-12));
    CHECK(g.ratio == Approx(1.0 / ((2.0 + std::sqrt(3.0)) * (2.0 + std::sqrt(3.0)))).margin(1e-12));
}

TEST_CASE("ratio of a doubled word is the square") {
    for (const IfsSystem& sys : {cantor13(), moebius_pair()}) {
        for (const char* ws : {"0", "1", "01", "10", "011"}) {
            const Word w = word_from_string(ws);
            Word ww = w;
            ww.insert(ww.end(), w.begin(), w.end());
            const double lam = fixed_point_and_ratio(compose_word(sys, w)).ratio;
            const double lam2 = fixed_point_and_ratio(compose_word(sys, ww)).ratio;
            CHECK(lam2 == Approx(lam * lam).margin(1e-10));
        }
    }
}

TEST_CASE("canonical projection of cylinder prefixes") {
    const IfsSystem sys = cantor13();
    const ProjectedPoint p0 = canonical_project(sys, word_from_string("000000"));
    CHECK(p0.x == Approx(0.0).margin(1e-15));
    CHECK(p0.error_bound <= std::pow(3.0, -6.0) * (1.0 + 1e-12));
    CHECK(p0.error_bound >= std::pow(3.0, -6.0) * (1.0 - 1e-12));

    const ProjectedPoint pq = canonical_project(sys, word_from_string("010101010101"));
    CHECK(pq.x == Approx(0.25).margin(2e-6)); // fixed point of x/9 + 2/9
    CHECK(pq.error_bound <= std::pow(3.0, -12.0) * (1.0 + 1e-9));

    const ProjectedPoint p1 = canonical_project(sys, word_from_string("1"));
    CHECK(p1.x == Approx(2.0 / 3.0).margin(1e-15));
    CHECK(p1.error_bound == Approx(1.0 / 3.0).margin(1e-15));

    CHECK_THROWS_AS(canonical_project(sys, Word{}), DomainError);
}

TEST_CASE("projection error bound dominates all extensions") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> len(1, 5);
    std::uniform_int_distribution<int> sym(0, 1);
    for (const IfsSystem& sys : {cantor13(), moebius_pair()}) {
        for (int rep = 0; rep < 30; ++rep) {
            Word w;
            for (int i = len(rng) + 1; i > 0; --i) w.push_back(sym(rng));
            const ProjectedPoint base = canonical_project(sys, w);
            Word ext = w;
            for (int i = len(rng); i > 0; --i) {
                ext.push_back(sym(rng));
                const ProjectedPoint p = canonical_project(sys, ext);
                REQUIRE(std::fabs(p.x - base.x) <= base.error_bound + 1e-15);
            }
        }
    }
}

TEST_CASE("canonical projection in two dimensions") {
    const IfsSystem sys = carpet();
    const ProjectedPoint p = canonical_project(sys, word_from_string("11"));
    // f_1 f_1 (0,0) = (1/2*1/2+1/2, 1/3*2/3+2/3) = (3/4, 8/9)
    CHECK(p.x == Approx(0.75).margin(1e-15));
    CHECK(p.y == Approx(8.0 / 9.0).margin(1e-15));
    CHECK(p.error_bound == Approx(2.0 * 0.25).margin(1e-15));
}

TEST_CASE("first-exit cover at 1/9 around the Cantor endpoints") {
    const IfsSystem sys = cantor13();
    // nudge the radius above 1/9 so the diameter sandwich is not an exact tie
    const double t = -std::log2((1.0 / 9.0) * (1.0 + 1e-9));
    CHECK(stopping_cover(sys, 0.0, t) == std::vector<Word>{word_from_string("00")});
    CHECK(stopping_cover(sys, 1.0, t) == std::vector<Word>{word_from_string("11")});
    // in the central gap nothing survives the intersection test
    CHECK(stopping_cover(sys, 0.45, t).empty());
    // t = 0: every single symbol already satisfies the sandwich
    CHECK(stopping_cover(sys, 0.5, 0.0) ==
          std::vector<Word>{word_from_string("0"), word_from_string("1")});
    CHECK_THROWS_AS(stopping_cover(sys, 0.0, -1.0), DomainError);
}

TEST_CASE("first-exit cover in two dimensions") {
    const IfsSystem sys = carpet();
    // diam f_w = 2 * 2^{-|w|}, so t = 2 forces |w| = 3 exactly
    const auto cover = stopping_cover(sys, {-1.0, -1.0}, 2.0);
    REQUIRE_FALSE(cover.empty());
    for (const Word& w : cover) CHECK(w.size() == 3);
    CHECK(std::find(cover.begin(), cover.end(), Word{0, 0, 0}) != cover.end());
}

TEST_CASE("first-exit covers are antichains") {
    auto is_prefix = [](const Word& a, const Word& b) {
        if (a.size() > b.size()) return false;
        return std::equal(a.begin(), a.end(), b.begin());
    };
    for (const IfsSystem& sys : {cantor13(), moebius_pair()}) {
        for (double x : {0.0, 0.2, 0.7, 1.0}) {
            for (double t : {0.0, 1.5, 3.0, 5.0}) {
                const auto cover = stopping_cover(sys, x, t);
                for (std::size_t i = 0; i < cover.size(); ++i)
                    for (std::size_t j = 0; j < cover.size(); ++j)
                        if (i != j) REQUIRE_FALSE(is_prefix(cover[i], cover[j]));
            }
        }
    }
}

TEST_CASE("independence gap against a grid base") {
    const GapResult g = independence_gap_beta(cantor13(), 2.0, 12, 19);
    CHECK(g.gap == Approx(std::fabs(19.0 * std::log(2.0) - 12.0 * std::log(3.0))).margin(1e-12));
    CHECK(g.gap == Approx(0.0135510).margin(1e-6));
    CHECK_FALSE(g.shrank_on_doubling); // next convergent of log2(3) is out of reach

    const GapResult lattice = independence_gap_beta(cantor13(), 3.0, 8, 8);
    CHECK(lattice.gap == Approx(std::log(3.0)).margin(1e-12));
    CHECK_FALSE(lattice.shrank_on_doubling);
}

TEST_CASE("independence gap between identical lattices never drops below log 2") {
    const IfsSystem a = IfsSystem::conformal({ConformalMap1D::affine(0.5, 0.0)},
                                             WeightModel::bernoulli({1.0}));
    const IfsSystem b = IfsSystem::conformal({ConformalMap1D::affine(0.5, 0.5)},
                                             WeightModel::bernoulli({1.0}));
    for (int bound : {3, 6, 12}) {
        const GapResult g = independence_gap_pair(a, b, bound);
        CHECK(g.gap == Approx(std::log(2.0)).margin(1e-12));
    }
}

TEST_CASE("axis eigenvalue gap of the carpet") {
    const GapResult g = independence_gap_axes(carpet(), 19);
    CHECK(g.gap == Approx(std::fabs(19.0 * std::log(2.0) - 12.0 * std::log(3.0))).margin(1e-12));
}

TEST_CASE("independence gap is monotone in the bounds") {
    double prev = std::numeric_limits<double>::infinity();
    for (int b : {2, 4, 8, 12}) {
        const double g = independence_gap_beta(cantor13(), 2.0, b, 2 * b).gap;
        CHECK(g <= prev + 1e-15);
        prev = g;
    }
}

TEST_CASE("quasi-Bernoulli constants") {
    CHECK(quasi_bernoulli_constant(cantor13(), 6) == 1.0);
    const IfsSystem dirac = IfsSystem::conformal({ConformalMap1D::affine(0.5, 0.0)},
                                                 WeightModel::bernoulli({1.0}));
    CHECK(quasi_bernoulli_constant(dirac, 8) == 1.0);

    const WeightModel markov = WeightModel::markov({0.5, 0.5}, {{0.4, 0.6}, {0.6, 0.4}});
    const IfsSystem sys = IfsSystem::conformal({ConformalMap1D::affine(1.0 / 3.0, 0.0),
                                                ConformalMap1D::affine(1.0 / 3.0, 2.0 / 3.0)},
                                               markov);
    const double brute = quasi_bernoulli_constant(sys, 5);
    CHECK(brute == Approx(1.25).margin(1e-12));
    CHECK(brute == Approx(markov.qb_constant_exact()).margin(1e-12));
    // transition ratios in [1/2, 2] keep the constant in [1, 4]
    CHECK(brute >= 1.0);
    CHECK(brute <= 4.0);
}

TEST_CASE("rectangular separation check") {
    CHECK(rectangular_ssc_check(carpet()).separated);

    const IfsSystem twins = IfsSystem::diagonal({DiagonalAffineMap2D(0.5, 1.0 / 3.0, 0.0, 0.0),
                                                 DiagonalAffineMap2D(0.5, 1.0 / 3.0, 0.0, 0.0)},
                                                WeightModel::bernoulli({0.5, 0.5}));
    const SscResult t = rectangular_ssc_check(twins);
    CHECK_FALSE(t.separated);
    CHECK(t.witness_a == 0);
    CHECK(t.witness_b == 1);

    // closures touch at y = 1/3
    const IfsSystem touching =
        IfsSystem::diagonal({DiagonalAffineMap2D(0.5, 1.0 / 3.0, 0.0, 0.0),
                             DiagonalAffineMap2D(0.5, 1.0 / 3.0, 0.5, 2.0 / 3.0)},
                            WeightModel::bernoulli({0.5, 0.5}));
    CHECK_FALSE(rectangular_ssc_check(touching).separated);

    CHECK_THROWS_AS(rectangular_ssc_check(cantor13()), ShapeError);
}
