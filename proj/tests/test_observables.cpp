#include "wwkit/observables.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace wwkit;

namespace {

const Bernoulli& coin(const SystemSpec& sys) { return std::get<Bernoulli>(sys.v); }

Point word_point(std::vector<std::uint8_t> symbols, std::int64_t origin = 0) {
    SymbolWord w;
    w.symbols = std::move(symbols);
    w.origin = origin;
    return Point(std::move(w));
}

}  // namespace

TEST(Eval, PinskerConditionalExample) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = pinsker_fn({{0, 1}}, /*cutoff=*/1, /*level=*/0, coin(sys));
    EXPECT_NEAR(eval(f, sys, word_point({1, 0, 0})).real(), 0.5, 1e-15);
    EXPECT_NEAR(eval(f, sys, word_point({0, 1, 0})).real(), -0.5, 1e-15);
}

TEST(Eval, PinskerVanishesWhenCutoffAtMostLevel) {
    auto sys = make_bernoulli({0.3, 0.7});
    auto f = pinsker_fn({{2, 1}, {3, 0}}, /*cutoff=*/1, /*level=*/2, coin(sys));
    EXPECT_EQ(f->bound, 0.0);
    for (std::vector<std::uint8_t> w : {std::vector<std::uint8_t>{0, 0, 1, 0}, {1, 1, 1, 1}, {0, 1, 0, 1}}) {
        EXPECT_EQ(eval(f, sys, word_point(w)), cplx(0.0, 0.0));
    }
}

TEST(Eval, ZeroFrequencyCharacterIsOne) {
    auto sys = make_skew(2, 0.31);
    auto f = torus_character({0, 0});
    auto x = Point(TorusPoint::from_doubles({0.123, 0.789}));
    EXPECT_NEAR(std::abs(eval(f, sys, x) - cplx(1.0, 0.0)), 0.0, 1e-15);
}

TEST(Eval, CharacterPhaseOnRotationOrbit) {
    const double angle = 0.3;
    auto sys = make_rotation(angle);
    auto f = torus_character({1});
    Point x = Point(TorusPoint::from_doubles({0.0}));
    Point tx = iterate(sys, x, 5);
    EXPECT_NEAR(std::abs(eval(f, sys, tx) - std::polar(1.0, kTwoPi * 5 * angle)), 0.0, 1e-10);
}

TEST(Eval, MismatchedKindsRejected) {
    auto torus = make_rotation(0.3);
    auto shift = make_bernoulli({0.5, 0.5});
    auto character = torus_character({1});
    auto centered = centered_coordinate(0, coin(shift));
    EXPECT_THROW(eval(character, shift, word_point({1, 0})), std::invalid_argument);
    EXPECT_THROW(eval(centered, torus, Point(TorusPoint::from_doubles({0.5}))), std::invalid_argument);
}

TEST(Expr, ConstructionSimplifications) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = centered_coordinate(0, coin(sys));
    EXPECT_EQ(conj(conj(f)).get(), f.get());
    EXPECT_EQ(shift_by(0, f).get(), f.get());
    auto nested = shift_by(2, shift_by(3, f));
    EXPECT_EQ(nested->kind, ObsKind::Shift);
    EXPECT_EQ(nested->shift, 5);
    EXPECT_EQ(prod({f}).get(), f.get());
    EXPECT_EQ(prod({})->kind, ObsKind::Constant);
}

TEST(Expr, BoundsAndSpans) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = pinsker_fn({{0, 1}, {3, 0}}, 2, 0, coin(sys));
    EXPECT_DOUBLE_EQ(f->bound, 2.0);
    EXPECT_EQ(f->read_lo, 0);
    EXPECT_EQ(f->read_hi, 3);
    auto shifted = shift_by(4, f);
    EXPECT_EQ(shifted->read_lo, 4);
    EXPECT_EQ(shifted->read_hi, 7);
    auto p = prod({f, shifted});
    EXPECT_DOUBLE_EQ(p->bound, 4.0);
    EXPECT_EQ(p->read_lo, 0);
    EXPECT_EQ(p->read_hi, 7);
}

TEST(Expr, PinskerBoundHoldsPointwise) {
    auto sys = make_bernoulli({0.2, 0.8});
    auto f = pinsker_fn({{0, 1}, {1, 1}, {4, 0}}, 3, 0, coin(sys));
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint8_t> w(6);
        for (auto& s : w) s = static_cast<std::uint8_t>(rng.bits() % 2);
        EXPECT_LE(std::abs(eval(f, sys, word_point(w))), 2.0);
    }
}

TEST(CubeProduct, EmptyTupleReturnsSame) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = centered_coordinate(0, coin(sys));
    EXPECT_EQ(cube_product(f, {}).get(), f.get());
}

TEST(CubeProduct, OrderTwoMatchesHandExpression) {
    auto sys = make_rotation(resolve_angle("golden"));
    auto f = torus_character({1});
    auto cube = cube_product(f, {3});
    auto hand = prod({f, conj(shift_by(3, f))});
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        TorusPoint p;
        p.fixed = {rng.bits128()};
        Point x(p);
        EXPECT_NEAR(std::abs(eval(cube, sys, x) - eval(hand, sys, x)), 0.0, 1e-12);
    }
}

TEST(CubeProduct, OrderThreeMatchesHandExpression) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = centered_coordinate(0, coin(sys));
    auto cube = cube_product(f, {1, 4});
    auto hand = prod({f, conj(shift_by(1, f)), conj(shift_by(4, f)), shift_by(5, f)});
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::uint8_t> w(8);
        for (auto& s : w) s = static_cast<std::uint8_t>(rng.bits() % 2);
        Point x = word_point(w);
        EXPECT_NEAR(std::abs(eval(cube, sys, x) - eval(hand, sys, x)), 0.0, 1e-14);
    }
}

TEST(CubeProduct, BoundIsPowerOfBase) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = pinsker_fn({{0, 1}}, 1, 0, coin(sys));
    EXPECT_DOUBLE_EQ(cube_product(f, {2})->bound, 4.0);
    EXPECT_DOUBLE_EQ(cube_product(f, {2, 5})->bound, 16.0);
    EXPECT_THROW(cube_product(f, {0}), std::invalid_argument);
}

TEST(ExactIntegral, CharacterVanishesUnlessFrequencyZero) {
    auto sys = make_skew(2, 0.333);
    EXPECT_NEAR(std::abs(exact_integral(torus_character({1, 0}), sys)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(exact_integral(constant(1.0), sys) - cplx(1.0, 0.0)), 0.0, 1e-15);
}

TEST(ExactIntegral, DistinctCoordinatesAreIndependent) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = centered_coordinate(0, coin(sys));
    auto expr = prod({f, shift_by(1, f)});
    EXPECT_NEAR(std::abs(exact_integral(expr, sys)), 0.0, 1e-15);
    // same coordinate squared integrates to the variance 1/4
    EXPECT_NEAR(exact_integral(prod({f, f}), sys).real(), 0.25, 1e-15);
}

TEST(ExactIntegral, ShiftedCharacterAlgebraOnSkew) {
    auto sys = make_skew(3, 0.41421356237);
    auto f = torus_character({0, 0, 1});
    // f . conj(f o T^h) has a nonzero h-dependent frequency, so it integrates to 0
    for (std::int64_t h : {1, 2, 7}) {
        auto expr = prod({f, conj(shift_by(h, f))});
        EXPECT_NEAR(std::abs(exact_integral(expr, sys)), 0.0, 1e-15) << "h=" << h;
    }
    // and conj(f) . f integrates to 1
    EXPECT_NEAR(exact_integral(prod({conj(f), f}), sys).real(), 1.0, 1e-15);
}

TEST(ExactIntegral, MatchesMonteCarloWithinFourSigma) {
    auto sys = make_skew(2, resolve_angle("sqrt2-1"));
    auto f = torus_character({0, 1});
    auto expr = prod({f, conj(shift_by(3, f))});
    const cplx exact = exact_integral(expr, sys);
    EXPECT_LE(std::abs(exact), 1.0 + 1e-15);
    const std::int64_t count = 4096;
    const double tol = 4.0 * expr->bound * expr->bound / std::sqrt(static_cast<double>(count));
    int within = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto pts = sample_points(sys, {count, seed, SampleScheme::pseudorandom}, 0);
        cplx mean = 0.0;
        for (const auto& x : pts) mean += eval(expr, sys, x);
        mean /= static_cast<double>(count);
        if (std::abs(mean - exact) <= tol) ++within;
    }
    EXPECT_GE(within, 38);  // 95% of seeds
}

TEST(ExactIntegral, NoClosedFormFallsThrough) {
    auto torus = make_rotation(0.3);
    auto shift = make_bernoulli({0.5, 0.5});
    EXPECT_THROW(exact_integral(centered_coordinate(0, coin(shift)), torus), NoClosedFormError);
    EXPECT_THROW(exact_integral(torus_character({1}), shift), NoClosedFormError);
}

TEST(ExactIntegral, TensorSplitsOverProductSystems) {
    auto left = make_rotation(0.3);
    auto right = make_bernoulli({0.5, 0.5});
    auto sys = make_product(left, right);
    auto f = tensor(torus_character({0}), centered_coordinate(0, coin(right)));
    EXPECT_NEAR(std::abs(exact_integral(f, sys)), 0.0, 1e-15);
    auto g = tensor(torus_character({0}), prod({centered_coordinate(0, coin(right)), centered_coordinate(0, coin(right))}));
    EXPECT_NEAR(exact_integral(g, sys).real(), 0.25, 1e-15);
}

TEST(Eval, TensorOnProductSystem) {
    auto left = make_rotation(0.25);
    auto right = make_rotation(0.5);
    auto sys = make_product(left, right);
    auto f = tensor(torus_character({1}), torus_character({1}));
    PairPoint pp;
    pp.left = std::make_shared<Point>(Point(TorusPoint::from_doubles({0.25})));
    pp.right = std::make_shared<Point>(Point(TorusPoint::from_doubles({0.5})));
    // e^{2 pi i 0.25} * e^{2 pi i 0.5} = i * (-1)
    EXPECT_NEAR(std::abs(eval(f, sys, Point(pp)) - cplx(0.0, -1.0)), 0.0, 1e-12);
}

TEST(Eval, ResultStaysWithinBound) {
    auto sys = make_bernoulli({0.4, 0.6});
    auto f = pinsker_fn({{0, 1}, {2, 0}}, 1, 0, coin(sys));
    auto expr = cube_product(f, {1, 3});
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::uint8_t> w(10);
        for (auto& s : w) s = static_cast<std::uint8_t>(rng.bits() % 2);
        EXPECT_LE(std::abs(eval(expr, sys, word_point(w))), expr->bound + 1e-12);
    }
}

TEST(Eval, WindowErrorCarriesContext) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = pinsker_fn({{0, 1}}, 1, 0, coin(sys));
    auto expr = shift_by(10, f);
    try {
        eval(expr, sys, word_point({1, 0, 1}));
        FAIL() << "expected WindowError";
    } catch (const WindowError& e) {
        EXPECT_NE(std::string(e.what()).find("window"), std::string::npos);
    }
}
