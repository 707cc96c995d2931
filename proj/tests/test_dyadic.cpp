#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "scenlab/discretize.hpp"
#include "scenlab/dyadic_measure.hpp"
#include "scenlab/ifs.hpp"
#include "scenlab/metrics.hpp"
#include "scenlab/sampling.hpp"

using namespace scenlab;
using Catch::Approx;

namespace {

IfsSystem cantor13() {
    return IfsSystem::conformal({ConformalMap1D::affine(1.0 / 3.0, 0.0),
                                 ConformalMap1D::affine(1.0 / 3.0, 2.0 / 3.0)},
                                WeightModel::bernoulli({0.5, 0.5}));
}

// binary digits with P(0) = 3/4: cylinders coincide with dyadic cells
IfsSystem halves34() {
    return IfsSystem::conformal({ConformalMap1D::affine(0.5, 0.0),
                                 ConformalMap1D::affine(0.5, 0.5)},
                                WeightModel::bernoulli({0.75, 0.25}));
}

IfsSystem carpet() {
    return IfsSystem::diagonal({DiagonalAffineMap2D(0.5, 1.0 / 3.0, -0.5, -2.0 / 3.0),
                                DiagonalAffineMap2D(0.5, 1.0 / 3.0, 0.5, 2.0 / 3.0)},
                               WeightModel::bernoulli({0.5, 0.5}));
}

DyadicMeasure lebesgue(Box box, int level) {
    MeasureBuilder b(box, level);
    if (box.dim == 1)
        b.add_interval(box.lo[0], box.hi(0), 1.0);
    else
        b.add_rect(box.lo[0], box.hi(0), box.lo[1], box.hi(1), 1.0);
    return b.finish(true);
}

DyadicMeasure dirac_cell(Box box, int level, std::int64_t i, std::int64_t j = 0) {
    CellTable t;
    t[{i, j}] = 1.0;
    return DyadicMeasure(box, level, std::move(t));
}

void check_unit(const DyadicMeasure& m) {
    REQUIRE(m.total_mass() == Approx(1.0).margin(1e-12));
    const std::int64_t cells = std::int64_t{1} << m.level();
    for (const auto& [key, mass] : m.cells()) {
        REQUIRE(mass >= 0.0);
        REQUIRE(key.i >= 0);
        REQUIRE(key.i < cells);
        if (m.dim() == 2) {
            REQUIRE(key.j >= 0);
            REQUIRE(key.j < cells);
        }
    }
}

} // namespace

TEST_CASE("discretize resolves digit products exactly") {
    const Discretization d = discretize(halves34(), 2);
    check_unit(d.measure);
    CHECK(d.budget_mass == 0.0);
    CHECK(d.measure.support_size() == 4);
    CHECK(d.measure.cell_mass({0, 0}) == Approx(9.0 / 16.0).margin(1e-12));
    CHECK(d.measure.cell_mass({1, 0}) == Approx(3.0 / 16.0).margin(1e-12));
    CHECK(d.measure.cell_mass({2, 0}) == Approx(3.0 / 16.0).margin(1e-12));
    CHECK(d.measure.cell_mass({3, 0}) == Approx(1.0 / 16.0).margin(1e-12));
}

TEST_CASE("discretize splits the Cantor measure across the halves") {
    const Discretization d = discretize(cantor13(), 1);
    check_unit(d.measure);
    CHECK(d.measure.cell_mass({0, 0}) == Approx(0.5).margin(1e-12));
    CHECK(d.measure.cell_mass({1, 0}) == Approx(0.5).margin(1e-12));
}

TEST_CASE("discretize of a single contraction is a cell Dirac") {
    const IfsSystem dirac = IfsSystem::conformal({ConformalMap1D::affine(0.5, 0.0)},
                                                 WeightModel::bernoulli({1.0}));
    const Discretization d = discretize(dirac, 6);
    CHECK(d.measure.support_size() == 1);
    CHECK(d.measure.cell_mass({0, 0}) == Approx(1.0).margin(1e-12));
}

TEST_CASE("discretize reports budget exhaustion instead of hiding it") {
    // ratio 0.9 cannot reach cell size within the 4x depth budget
    const IfsSystem slow = IfsSystem::conformal({ConformalMap1D::affine(0.9, 0.0),
                                                 ConformalMap1D::affine(0.9, 0.1)},
                                                WeightModel::bernoulli({0.5, 0.5}));
    const Discretization d = discretize(slow, 3);
    check_unit(d.measure);
    CHECK(d.budget_mass > 0.5);
    CHECK(d.max_word_length == 12);
    CHECK_THROWS_AS(discretize(cantor13(), 0), DomainError);
}

TEST_CASE("two-dimensional discretize respects the carpet structure") {
    const Discretization d = discretize(carpet(), 4);
    check_unit(d.measure);
    // triadic y-intervals straddle a few dyadic boundaries; that smearing is
    // reported, tiny, and never touches the x-marginal
    CHECK(d.budget_mass < 1e-4);
    const DyadicMeasure mx = marginal(d.measure, 0);
    CHECK(mx.support_size() == 16);
    for (const auto& [key, m] : mx.cells()) CHECK(m == Approx(1.0 / 16.0).margin(1e-9));
    // the first symbol fixes both halves at once, so the level-1 picture is
    // two diagonal quadrants; the central gaps protect the boundary
    const DyadicMeasure quad = coarsen(d.measure, 1);
    CHECK(quad.support_size() == 2);
    CHECK(quad.cell_mass({0, 0}) == Approx(0.5).margin(1e-9));
    CHECK(quad.cell_mass({1, 1}) == Approx(0.5).margin(1e-9));
}

TEST_CASE("magnifying Lebesgue is a fixed point") {
    const DyadicMeasure leb = lebesgue(Box::ball1(), 6);
    const DyadicMeasure mag = magnify(leb, 0.0, 3);
    check_unit(mag);
    CHECK(mag.level() == 3);
    CHECK(mag.box() == Box::ball1());
    for (const auto& [key, m] : mag.cells()) CHECK(m == Approx(1.0 / 8.0).margin(1e-12));
}

TEST_CASE("magnifying a cell Dirac centers it at the origin") {
    const DyadicMeasure mu = dirac_cell(Box::unit1(), 5, 8);
    const double p = 8.5 / 32.0; // center of the occupied cell
    const DyadicMeasure mag = magnify(mu, p, 2);
    check_unit(mag);
    // the rescaled cell is [-1/16, 1/16): half mass on each side of 0
    REQUIRE(mag.support_size() == 2);
    CHECK(mag.cell_mass({3, 0}) == Approx(0.5).margin(1e-12));
    CHECK(mag.cell_mass({4, 0}) == Approx(0.5).margin(1e-12));
}

TEST_CASE("magnify error conditions") {
    const DyadicMeasure mu = dirac_cell(Box::unit1(), 5, 8);
    CHECK_THROWS_AS(magnify(mu, 8.5 / 32.0, 5), ResolutionError);
    CHECK_THROWS_AS(magnify(mu, 8.5 / 32.0, 7), ResolutionError);
    CHECK_THROWS_AS(magnify(mu, 0.9, 3), SupportError); // ball misses the atom
    CHECK_THROWS_AS(magnify(mu, 8.5 / 32.0, -1), DomainError);
}

TEST_CASE("magnified Cantor matches a direct window discretization") {
    const DyadicMeasure mu = discretize(cantor13(), 16).measure;
    const DyadicMeasure mag = magnify(mu, 0.0, 5);
    const DyadicMeasure frame = ifs_frame(cantor13(), 0.0, 5.0, 10).measure;
    REQUIRE(mag.level() == 11);
    REQUIRE(frame.level() == 11);
    CHECK(lp_distance(mag, frame) < 0.01);
}

TEST_CASE("dyadic magnification of Lebesgue is uniform") {
    const DyadicMeasure leb = lebesgue(Box::unit1(), 6);
    const DyadicMeasure mag = dyadic_magnify(leb, 0.37, 2);
    check_unit(mag);
    CHECK(mag.level() == 4);
    for (const auto& [key, m] : mag.cells()) CHECK(m == Approx(1.0 / 16.0).margin(1e-12));
}

TEST_CASE("dyadic magnification reproduces the digit pattern one level down") {
    const DyadicMeasure mu = discretize(halves34(), 8).measure;
    const DyadicMeasure mag = dyadic_magnify(mu, 0.0, 1);
    const DyadicMeasure expect = discretize(halves34(), 7).measure;
    CHECK(max_cell_difference(mag, expect) < 1e-12);
}

TEST_CASE("dyadic magnification of Cantor matches brute-force conditioning") {
    const int n = 10;
    const DyadicMeasure mag = dyadic_magnify(discretize(cantor13(), n).measure, 0.0, 1);

    // independent oracle: enumerate all cylinders of length 12, keep the ones
    // in [0,1/2), push through y -> 2y, deposit proportionally
    const int L = 12;
    const double w3 = std::pow(3.0, -L);
    MeasureBuilder bf(Box::unit1(), n - 1);
    for (std::int64_t word = 0; word < (std::int64_t{1} << L); ++word) {
        double a = 0.0;
        for (int bit = L - 1; bit >= 0; --bit)
            a = a / 3.0 + (((word >> bit) & 1) ? 2.0 / 3.0 : 0.0);
        if (a >= 0.5) continue;
        bf.add_interval(2.0 * a, 2.0 * (a + w3), std::ldexp(1.0, -L));
    }
    const DyadicMeasure oracle = bf.finish(true);
    CHECK(lp_distance(mag, oracle) < 0.01);
}

TEST_CASE("grid and ball magnification agree where the supports overlap") {
    // x = 0 is a corner: the ball [-1/2,1/2] sees exactly the cells the
    // dyadic cell [0,1/2) does.  The ball target [-1,1] is twice as wide as
    // the grid target [0,1), so the grid result is compared one level coarser.
    const DyadicMeasure mu = discretize(halves34(), 8).measure;
    const DyadicMeasure ball = magnify(mu, 0.0, 1);
    const DyadicMeasure grid = coarsen(dyadic_magnify(mu, 0.0, 1), 6);
    REQUIRE(ball.cell_side() == grid.cell_side());
    CHECK(max_cell_difference(ball, grid) < 1e-10);
}

TEST_CASE("restriction renormalizes and keeps the box") {
    const DyadicMeasure leb = lebesgue(Box::unit1(), 4);
    const DyadicMeasure same = restrict_normalize(leb, Box::unit1());
    CHECK(max_cell_difference(same, leb) < 1e-12);

    const DyadicMeasure half = restrict_normalize(leb, Box{1, {0.0, 0.0}, 0.5});
    check_unit(half);
    CHECK(half.support_size() == 8);
    for (const auto& [key, m] : half.cells()) {
        CHECK(key.i < 8);
        CHECK(m == Approx(1.0 / 8.0).margin(1e-12));
    }

    DyadicMeasure two = DyadicMeasure(Box::unit1(), 1, CellTable{{{0, 0}, 0.5}, {{1, 0}, 0.5}});
    const DyadicMeasure one = restrict_normalize(two, Box{1, {0.5, 0.0}, 0.5});
    CHECK(one.support_size() == 1);
    CHECK(one.cell_mass({1, 0}) == Approx(1.0).margin(1e-12));

    CHECK_THROWS_AS(restrict_normalize(leb, Box{1, {4.0, 0.0}, 1.0}), SupportError);
}

TEST_CASE("pushforward by the identity is the identity") {
    const DyadicMeasure mu = discretize(cantor13(), 8).measure;
    const PushforwardResult pf = pushforward_map(mu, Map1D::identity());
    CHECK(pf.clipped_mass == 0.0);
    CHECK(max_cell_difference(pf.measure, mu) < 1e-12);
}

TEST_CASE("pushforward by x/2 shifts the digit pattern one level down") {
    const int n = 6;
    const DyadicMeasure mu = discretize(halves34(), n).measure;
    const PushforwardResult pf = pushforward_map(mu, Map1D::affine(0.5, 0.0));
    check_unit(pf.measure);
    const DyadicMeasure expect = discretize(halves34(), n - 1).measure;
    for (const auto& [key, m] : expect.cells())
        CHECK(pf.measure.cell_mass(key) == Approx(m).margin(1e-12));
}

TEST_CASE("pushforward translates an atom") {
    const DyadicMeasure mu = dirac_cell(Box::unit1(), 4, 0);
    const PushforwardResult pf = pushforward_map(mu, Map1D::affine(1.0, 0.5));
    CHECK(pf.measure.support_size() == 1);
    CHECK(pf.measure.cell_mass({8, 0}) == Approx(1.0).margin(1e-12));
}

TEST_CASE("pushforward rejects a pole inside the support") {
    const DyadicMeasure leb = lebesgue(Box::unit1(), 4);
    CHECK_THROWS_AS(pushforward_map(leb, Map1D::moebius(1.0, 0.0, 1.0, -0.5)), DomainError);
}

TEST_CASE("pushforward reports clipped mass") {
    const DyadicMeasure leb = lebesgue(Box::unit1(), 4);
    // shift half the mass outside [0,1]
    const PushforwardResult pf = pushforward_map(leb, Map1D::affine(1.0, 0.5));
    CHECK(pf.clipped_mass == Approx(0.5).margin(1e-12));
    check_unit(pf.measure); // renormalized remainder
}

TEST_CASE("dyadic-aligned pushforward round trips exactly") {
    const DyadicMeasure mu = discretize(cantor13(), 8).measure;
    const DyadicMeasure fwd =
        pushforward_map(mu, Map1D::affine(0.5, 0.0), Box::unit1(), 9).measure;
    const DyadicMeasure back =
        pushforward_map(fwd, Map1D::affine(2.0, 0.0), Box::unit1(), 8).measure;
    CHECK(partition_distance(back, mu, 8) < 1e-12);
}

TEST_CASE("refined pushforward round trip stays within one level of smoothing") {
    const int n = 8, refine = 6;
    const DyadicMeasure mu = discretize(cantor13(), n).measure;
    const Box wide{1, {0.0, 0.0}, 2.0};
    const DyadicMeasure fwd =
        pushforward_map(mu, Map1D::affine(1.0, 0.1), wide, n + 1 + refine).measure;
    const DyadicMeasure back =
        pushforward_map(fwd, Map1D::affine(1.0, -0.1), Box::unit1(), n).measure;
    // quantization at the refined level moves at most 2^-refine of each cell
    double l1 = 0.0;
    const CellTable ga = global_cells(mu), gb = global_cells(back);
    for (const auto& [key, m] : ga) l1 += std::fabs(m - (gb.count(key) ? gb.at(key) : 0.0));
    for (const auto& [key, m] : gb)
        if (!ga.count(key)) l1 += m;
    CHECK(l1 < 4.0 * std::ldexp(1.0, -refine));
}

TEST_CASE("mixture with a single identity atom is the identity") {
    const DyadicMeasure mu = discretize(cantor13(), 7).measure;
    const MixtureResult mix = mixture_apply(MapMixture::identity_atom(), mu);
    CHECK(max_cell_difference(mix.measure, mu) < 1e-12);
}

TEST_CASE("mixture of two translates splits an atom") {
    const DyadicMeasure mu = dirac_cell(Box::unit1(), 4, 0);
    const MapMixture nu({0.5, 0.5}, {Map1D::identity(), Map1D::affine(1.0, 0.5)});
    const MixtureResult mix = mixture_apply(nu, mu);
    CHECK(mix.measure.support_size() == 2);
    CHECK(mix.measure.cell_mass({0, 0}) == Approx(0.5).margin(1e-12));
    CHECK(mix.measure.cell_mass({8, 0}) == Approx(0.5).margin(1e-12));
}

TEST_CASE("convolution of cell atoms adds their positions") {
    const DyadicMeasure da = dirac_cell(Box::unit1(), 4, 3);
    const DyadicMeasure db = dirac_cell(Box::unit1(), 4, 5);
    const DyadicMeasure conv = convolve(da, db);
    CHECK(conv.level() == 5);
    CHECK(conv.box().size == 2.0);
    CHECK(conv.support_size() == 1);
    CHECK(conv.cell_mass({8, 0}) == Approx(1.0).margin(1e-12));
}

TEST_CASE("convolution against a zero atom is the identity on cells") {
    const DyadicMeasure mu = discretize(cantor13(), 8).measure;
    const DyadicMeasure conv = convolve(mu, dirac_cell(Box::unit1(), 8, 0));
    CHECK(max_cell_difference(conv, mu) < 1e-12);

    const DyadicMeasure ab = convolve(mu, discretize(halves34(), 8).measure);
    const DyadicMeasure ba = convolve(discretize(halves34(), 8).measure, mu);
    CHECK(max_cell_difference(ab, ba) < 1e-12);

    CHECK_THROWS_AS(convolve(mu, discretize(cantor13(), 7).measure), ShapeError);
    CHECK_THROWS_AS(convolve(mu, discretize(carpet(), 8).measure), ShapeError);
}

TEST_CASE("self-convolved Lebesgue follows the triangle law") {
    const int n = 8;
    const double N = std::ldexp(1.0, n);
    const DyadicMeasure leb = lebesgue(Box::unit1(), n);
    const DyadicMeasure tri = convolve(leb, leb);
    check_unit(tri);
    // discrete triangle: mass of [0,1/2) = (1/8)(1 + 2/N)
    CHECK(tri.interval_mass(0.0, 0.5) == Approx(0.125 * (1.0 + 2.0 / N)).margin(1e-12));
    CHECK(tri.interval_mass(0.0, 0.5) == Approx(0.125).margin(0.01));
}

TEST_CASE("Cantor self-convolution matches the three-map model") {
    const int n = 9;
    const DyadicMeasure mu = discretize(cantor13(), n).measure;
    const DyadicMeasure conv = convolve(mu, mu);

    // digit sums of two independent ternary expansions: weights (1/4,1/2,1/4)
    const Interval dom{0.0, 2.0};
    const IfsSystem sum3 = IfsSystem::conformal(
        {ConformalMap1D::affine(1.0 / 3.0, 0.0, dom),
         ConformalMap1D::affine(1.0 / 3.0, 2.0 / 3.0, dom),
         ConformalMap1D::affine(1.0 / 3.0, 4.0 / 3.0, dom)},
        WeightModel::bernoulli({0.25, 0.5, 0.25}));
    const DyadicMeasure oracle = discretize(sum3, n + 1, Box{1, {0.0, 0.0}, 2.0}).measure;
    REQUIRE(oracle.cell_side() == conv.cell_side());
    CHECK(lp_distance(conv, oracle) < 0.01);
}

TEST_CASE("product measures and their marginals") {
    const DyadicMeasure a = discretize(cantor13(), 5).measure;
    const DyadicMeasure b = discretize(halves34(), 5).measure;
    const DyadicMeasure prod = product(a, b);
    check_unit(prod);
    CHECK(prod.dim() == 2);
    CHECK(max_cell_difference(marginal(prod, 0), a) < 1e-12);
    CHECK(max_cell_difference(marginal(prod, 1), b) < 1e-12);

    const DyadicMeasure da = dirac_cell(Box::unit1(), 5, 3);
    const DyadicMeasure db = dirac_cell(Box::unit1(), 5, 7);
    const DyadicMeasure pd = product(da, db);
    CHECK(pd.support_size() == 1);
    CHECK(pd.cell_mass({3, 7}) == Approx(1.0).margin(1e-12));

    const DyadicMeasure leb2 = product(lebesgue(Box::unit1(), 4), lebesgue(Box::unit1(), 4));
    for (const auto& [key, m] : leb2.cells()) CHECK(m == Approx(1.0 / 256.0).margin(1e-12));

    CHECK_THROWS_AS(marginal(a, 0), ShapeError);
    CHECK_THROWS_AS(marginal(leb2, 2), IndexError);
}

TEST_CASE("axis projections recover marginals exactly") {
    const DyadicMeasure prod =
        product(discretize(cantor13(), 5).measure, discretize(halves34(), 5).measure);
    const DyadicMeasure px = project(prod, 0.0);
    const DyadicMeasure py = project(prod, 1.5707963267948966);
    REQUIRE(px.cell_side() == prod.cell_side());
    CHECK(max_cell_difference(px, marginal(prod, 0)) < 1e-12);
    CHECK(max_cell_difference(py, marginal(prod, 1)) < 1e-12);
    CHECK_THROWS_AS(project(prod, -0.1), DomainError);
    CHECK_THROWS_AS(project(prod, 3.15), DomainError);
    CHECK_THROWS_AS(project(discretize(cantor13(), 4).measure, 0.0), ShapeError);
}

TEST_CASE("diagonal projection sends an atom to the rotated position") {
    const DyadicMeasure pd = product(dirac_cell(Box::unit1(), 5, 3), dirac_cell(Box::unit1(), 5, 7));
    const double theta = 0.78539816339744831; // pi/4
    const DyadicMeasure proj = project(pd, theta);
    const double s = pd.cell_side();
    const double expect = (3.5 * s) * std::cos(theta) + (7.5 * s) * std::sin(theta);
    CHECK(proj.interval_mass(expect - 2.0 * s, expect + 2.0 * s) == Approx(1.0).margin(1e-12));
}

TEST_CASE("disintegration slices a product into copies of the second factor") {
    const DyadicMeasure a = discretize(cantor13(), 5).measure;
    const DyadicMeasure b = discretize(halves34(), 5).measure;
    const DyadicMeasure prod = product(a, b);
    for (const auto& [key, m] : a.cells()) {
        const DyadicMeasure slice = disintegrate(prod, key.i);
        CHECK(max_cell_difference(slice, b) < 1e-12);
    }
    // column [11/32, 12/32) sits inside the central Cantor gap
    CHECK_THROWS_AS(disintegrate(prod, 11), SupportError);
}

TEST_CASE("disintegration reassembles the measure exactly") {
    const DyadicMeasure mu = discretize(carpet(), 5).measure;
    const DyadicMeasure colmass = marginal(mu, 0);
    double worst = 0.0;
    for (const auto& [col, w] : colmass.cells()) {
        const DyadicMeasure slice = disintegrate(mu, col.i);
        for (const auto& [key, m] : slice.cells()) {
            const double rebuilt = w * m;
            worst = std::max(worst, std::fabs(rebuilt - mu.cell_mass({col.i, key.i})));
        }
    }
    CHECK(worst < 1e-12);
    CHECK(column_index(mu, -1.0 + 0.1) == 1); // cell side 1/16
}

TEST_CASE("two-dimensional magnification keeps the invariants") {
    const DyadicMeasure mu = discretize(carpet(), 8).measure;
    const DyadicMeasure mag = magnify(mu, {-1.0, -1.0}, 2);
    check_unit(mag);
    CHECK(mag.level() == 6);
    CHECK(mag.box() == Box::ball2());
    const DyadicMeasure dmag = dyadic_magnify(mu, {-0.99, -0.99}, 2);
    check_unit(dmag);
    CHECK(dmag.box().size == 1.0);
}

TEST_CASE("point sampling is deterministic per seed") {
    const DyadicMeasure mu = discretize(cantor13(), 10).measure;
    const auto a = sample_points(mu, 64, 2024);
    const auto b = sample_points(mu, 64, 2024);
    REQUIRE(a.size() == 64);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i][0] == b[i][0]);
        // every sample sits at an occupied cell center
        CHECK(mu.ball_mass(a[i][0], mu.cell_side()) > 0.0);
    }
}

TEST_CASE("symbolic sampling matches the weight model") {
    const auto samples = sample_words(cantor13(), 12, 100000, 7);
    REQUIRE(samples.size() == 100000);
    std::array<int, 2> first{0, 0};
    for (const auto& ws : samples) {
        REQUIRE(ws.word.size() == 12);
        ++first[static_cast<std::size_t>(ws.word.front())];
    }
    // chi-square against (1/2,1/2), 1 dof, alpha = 0.01
    const double e = 50000.0;
    const double chi2 = (first[0] - e) * (first[0] - e) / e + (first[1] - e) * (first[1] - e) / e;
    CHECK(chi2 < 6.635);

    const auto again = sample_words(cantor13(), 12, 100, 7);
    const auto again2 = sample_words(cantor13(), 12, 100, 7);
    for (std::size_t i = 0; i < again.size(); ++i) {
        CHECK(again[i].word == again2[i].word);
        CHECK(again[i].x == again2[i].x);
    }
}

TEST_CASE("sampling a one-map system always lands on the fixed point") {
    const IfsSystem dirac = IfsSystem::conformal({ConformalMap1D::affine(0.5, 0.0)},
                                                 WeightModel::bernoulli({1.0}));
    for (const auto& ws : sample_words(dirac, 20, 10, 3)) {
        CHECK(ws.x == 0.0);
        CHECK(ws.word == Word(20, 0));
    }
}

TEST_CASE("coarsening aggregates exactly") {
    const DyadicMeasure mu = discretize(halves34(), 8).measure;
    const DyadicMeasure c = coarsen(mu, 3);
    const DyadicMeasure expect = discretize(halves34(), 3).measure;
    CHECK(max_cell_difference(c, expect) < 1e-12);
    CHECK_THROWS_AS(coarsen(mu, 9), ResolutionError);
}

TEST_CASE("windowed discretization agrees with the global one") {
    // zooming with the identity window reproduces plain discretization
    const Discretization global = discretize(cantor13(), 10);
    const Discretization windowed =
        discretize_through(cantor13(), Map1D::identity(), Interval{0.0, 1.0}, Box::unit1(), 10, 40);
    CHECK(max_cell_difference(global.measure, windowed.measure) < 1e-12);

    // a frame at t=0 centered at 1/2 sees the whole attractor rescaled
    const Discretization frame = ifs_frame(cantor13(), 0.5, 0.0, 9);
    check_unit(frame.measure);
    CHECK(frame.measure.box() == Box::ball1());
    CHECK(frame.clipped_mass == 0.0);
}

TEST_CASE("frames refuse scales beyond double precision") {
    CHECK_THROWS_AS(ifs_frame(cantor13(), 0.3, 44.0, 10), PrecisionError);
    CHECK_THROWS_AS(ifs_frame(cantor13(), 0.3, -1.0, 10), DomainError);
}
