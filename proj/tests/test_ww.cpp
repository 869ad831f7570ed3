#include "wwkit/ww.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "wwkit/experiments.hpp"

using namespace wwkit;

namespace {

const Bernoulli& coin(const SystemSpec& sys) { return std::get<Bernoulli>(sys.v); }

// direct double-loop evaluation of sup_t |(1/N) sum_n e(nt) w_n| on a fixed
// t-grid, reading the word symbols without the expression machinery
struct BruteSup {
    double value = 0;
    double width = 0;  // derivative-bound slack of the brute grid itself
};

BruteSup brute_order2_sup(const SymbolWord& w, std::int64_t h, std::int64_t N, double mean, std::size_t grid) {
    BruteSup out;
    double lip = 0;
    for (std::int64_t n = 1; n <= N; ++n) {
        const double f_n = static_cast<double>(w.at(n)) - mean;
        const double f_nh = static_cast<double>(w.at(n + h)) - mean;
        lip += static_cast<double>(n) * std::abs(f_n * f_nh);
    }
    lip *= kTwoPi / static_cast<double>(N);
    for (std::size_t m = 0; m < grid; ++m) {
        const double t = static_cast<double>(m) / static_cast<double>(grid);
        cplx acc = 0.0;
        for (std::int64_t n = 1; n <= N; ++n) {
            const double f_n = static_cast<double>(w.at(n)) - mean;
            const double f_nh = static_cast<double>(w.at(n + h)) - mean;
            acc += f_n * f_nh * std::polar(1.0, kTwoPi * static_cast<double>(n) * t);
        }
        out.value = std::max(out.value, std::abs(acc) / static_cast<double>(N));
    }
    out.width = lip / (2.0 * static_cast<double>(grid));
    return out;
}

}  // namespace

TEST(OrbitWeights, ZeroObservableGivesZeros) {
    auto sys = make_rotation(0.3);
    auto seq = orbit_weights(constant(0.0), sys, Point(TorusPoint::from_doubles({0.2})), 8);
    for (const auto& v : seq.values) EXPECT_EQ(v, cplx(0.0, 0.0));
}

TEST(OrbitWeights, RotationCharacterIsGeometricPhase) {
    const double angle = resolve_angle("golden");
    auto sys = make_rotation(angle);
    auto seq = orbit_weights(torus_character({1}), sys, Point(TorusPoint::from_doubles({0.0})), 16);
    for (std::int64_t n = 1; n <= 16; ++n) {
        EXPECT_NEAR(std::abs(seq.values[static_cast<std::size_t>(n - 1)] - std::polar(1.0, kTwoPi * n * angle)), 0.0,
                    1e-9);
    }
}

TEST(OrbitWeights, SkewCharacterSignPattern) {
    auto sys = make_skew(2, 0.5);
    auto seq = orbit_weights(torus_character({0, 1}), sys, Point(TorusPoint::from_doubles({0.0, 0.0})), 4);
    const double expected[] = {1.0, -1.0, -1.0, 1.0};  // e^{2 pi i P_2(n)/2}, P_2(n) = 0,1,3,6
    for (int n = 0; n < 4; ++n) {
        EXPECT_NEAR(seq.values[static_cast<std::size_t>(n)].real(), expected[n], 1e-12);
        EXPECT_NEAR(seq.values[static_cast<std::size_t>(n)].imag(), 0.0, 1e-12);
    }
}

TEST(WWNormTerm, ConstantFunctions) {
    auto sys = make_bernoulli({0.5, 0.5});
    SamplePlan plan{8, 3, SampleScheme::pseudorandom};
    TermEstimate one = ww_norm_term(constant(1.0), sys, {1}, 16, 2, plan);
    EXPECT_NEAR(one.lower, 1.0, 1e-12);
    TermEstimate zero = ww_norm_term(constant(0.0), sys, {1}, 16, 2, plan);
    EXPECT_EQ(zero.lower, 0.0);
    EXPECT_EQ(zero.upper, 0.0);
}

TEST(WWNormTerm, MatchesBruteForceOracleOnBernoulli) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = centered_coordinate(0, coin(sys));
    const std::int64_t N = 16, h = 1;
    SamplePlan plan{4, 99, SampleScheme::pseudorandom};
    auto points = sample_points(sys, plan, N + h);

    std::vector<double> lowers;
    TermEstimate agg = ww_norm_term_at({f, f}, sys, {h}, N, 2, points, 1, {}, &lowers);
    double brute_acc = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        BruteSup brute = brute_order2_sup(points[i].word(), h, N, 0.5, 1024);
        // each estimate is a certified bracket for the same sup
        SupEstimate ours = sup_modulus(orbit_weights(cube_product(f, {h}), sys, points[i], N), 8);
        EXPECT_LE(brute.value, ours.upper + 1e-12) << "sample " << i;
        EXPECT_LE(ours.lower, brute.value + brute.width + 1e-12) << "sample " << i;
        EXPECT_NEAR(lowers[i], ours.lower, 1e-15);
        brute_acc += brute.value * brute.value;
    }
    const double brute_norm = std::sqrt(brute_acc / static_cast<double>(points.size()));
    EXPECT_LE(agg.lower, brute_norm + 0.05);  // brute grid slack
    EXPECT_GE(agg.upper, brute_norm - 1e-12);
}

TEST(WWAverage, ConstantOneIsOneAtAnyOrder) {
    auto sys = make_bernoulli({0.5, 0.5});
    for (int k : {1, 2, 3}) {
        WWQuery q;
        q.vertex_fns = {constant(1.0)};
        q.system = sys;
        q.order = k;
        q.N = 16;
        q.p = 2;
        q.plan = {4, 5, SampleScheme::pseudorandom};
        EXPECT_NEAR(ww_average(q).value, 1.0, 1e-9) << "order " << k;
    }
}

TEST(WWAverage, KroneckerCharacterDoesNotDecay) {
    auto sys = make_rotation(resolve_angle("golden"));
    for (std::int64_t N : {64, 256, 1024}) {
        WWQuery q;
        q.vertex_fns = {torus_character({1})};
        q.system = sys;
        q.order = 1;
        q.N = N;
        q.p = 2;
        q.plan = {16, 11, SampleScheme::pseudorandom};
        WWResult r = ww_average(q);
        EXPECT_NEAR(r.value, 1.0, 1e-3) << "N=" << N;
        EXPECT_LE(r.certified_upper, 1.0 + 1e-12);
    }
}

TEST(WWAverage, ZeroFunctionGivesZero) {
    auto sys = make_bernoulli({0.5, 0.5});
    WWQuery q;
    q.vertex_fns = {constant(0.0)};
    q.system = sys;
    q.order = 2;
    q.N = 64;
    q.p = 2;
    q.plan = {4, 1, SampleScheme::pseudorandom};
    EXPECT_EQ(ww_average(q).value, 0.0);
}

TEST(WWAverage, NormTermIncreasesInP) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = centered_coordinate(0, coin(sys));
    auto points = sample_points(sys, {32, 17, SampleScheme::pseudorandom}, 70);
    for (std::int64_t h : {1, 3, 5}) {
        TermEstimate p1 = ww_norm_term_at({f, f}, sys, {h}, 64, 1, points, 1, {});
        TermEstimate p2 = ww_norm_term_at({f, f}, sys, {h}, 64, 2, points, 1, {});
        EXPECT_LE(p1.lower, p2.lower + 1e-12) << "h=" << h;
        EXPECT_LE(p1.upper, p2.upper + 1e-12) << "h=" << h;
    }
}

TEST(WWAverage, ScaleHomogeneity) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = centered_coordinate(0, coin(sys));
    WWQuery q;
    q.vertex_fns = {f};
    q.system = sys;
    q.order = 2;
    q.N = 64;
    q.p = 2;
    q.plan = {16, 23, SampleScheme::pseudorandom};
    const double base = ww_average(q).value;
    q.vertex_fns = {scale(2.0, f)};
    const double scaled = ww_average(q).value;
    // each h-term scales by |c|^{2^{k-1}}, so the 2/3-power average scales by
    // |c|^{2^{k-1} * 2/3} = 2^{4/3} at k = 2
    EXPECT_NEAR(scaled, std::pow(2.0, 4.0 / 3.0) * base, 1e-9 * base);

    q.order = 1;
    q.vertex_fns = {f};
    const double base1 = ww_average(q).value;
    q.vertex_fns = {scale(2.0, f)};
    EXPECT_NEAR(ww_average(q).value, 2.0 * base1, 1e-9 * base1);
}

TEST(WWAverage, MultilinearityBoundAtOrderTwo) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = centered_coordinate(0, coin(sys));
    auto g = pinsker_fn({{0, 1}, {1, 1}}, 1, 0, coin(sys));
    const std::int64_t N = 256;
    auto points = sample_points(sys, {24, 31, SampleScheme::pseudorandom}, ww_horizon(2, N, 0.5, 1), 0, g->read_hi);

    WWQuery q;
    q.system = sys;
    q.order = 2;
    q.N = N;
    q.p = 2;
    q.vertex_fns = {sum({f, g})};
    const double lhs = ww_average_with_points(q, points).value;

    // the four vertex collections (phi_eta) with phi_eta in {f, g}
    double rhs = 0;
    for (const ObsPtr& a : {f, g}) {
        for (const ObsPtr& b : {f, g}) {
            q.vertex_fns = {a, b};
            rhs += ww_average_with_points(q, points).value;
        }
    }
    EXPECT_LE(lhs, rhs + 1e-6);
}

TEST(WWAverage, OrderReductionKeepsDecaySign) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = centered_coordinate(0, coin(sys));
    std::vector<std::pair<std::int64_t, double>> order1, order2;
    for (std::int64_t N : {64, 128, 256, 512}) {
        WWQuery q;
        q.vertex_fns = {f};
        q.system = sys;
        q.N = N;
        q.p = 2;
        q.plan = {32, 41, SampleScheme::pseudorandom};
        q.order = 1;
        order1.emplace_back(N, ww_average(q).value);
        q.order = 2;
        order2.emplace_back(N, ww_average(q).value);
    }
    const double slope2 = fit_decay(order2).slope;
    const double slope1 = fit_decay(order1).slope;
    if (slope2 >= 0) EXPECT_GE(slope1, 0.0);
}

TEST(UwwPointwise, ZeroCollectionIsZero) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto pts = sample_points(sys, {1, 1, SampleScheme::pseudorandom}, 40);
    auto est = uww_pointwise({constant(0.0), constant(0.0)}, sys, pts[0], 16);
    EXPECT_EQ(est.lower, 0.0);
    EXPECT_EQ(est.upper, 0.0);
}

TEST(UwwPointwise, RotationCharacterStaysAtOne) {
    auto sys = make_rotation(resolve_angle("golden"));
    auto f = torus_character({1});
    Point x(TorusPoint::from_doubles({0.37}));
    auto est = uww_pointwise({f, f}, sys, x, 16);
    // every inner sup equals 1 (a pure phase against the matching t)
    EXPECT_NEAR(est.lower, 1.0, 1e-6);
    EXPECT_LE(est.lower, est.upper);
}

TEST(UwwPointwise, MatchesBruteForceOracle) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = centered_coordinate(0, coin(sys));
    const std::int64_t N = 16;
    auto pts = sample_points(sys, {1, 77, SampleScheme::pseudorandom}, 2 * N);
    auto est = uww_pointwise({f, f}, sys, pts[0], N);
    double brute = 0;
    for (std::int64_t h = 1; h <= N; ++h) {
        BruteSup b = brute_order2_sup(pts[0].word(), h, N, 0.5, 1024);
        brute += b.value * b.value;
    }
    brute /= static_cast<double>(N);
    EXPECT_LE(est.lower, brute + 0.05);
    EXPECT_GE(est.upper, brute - 1e-9);
}

TEST(UwwPointwise, BudgetGuardTrips) {
    auto sys = make_bernoulli({0.5, 0.5});
    auto f = centered_coordinate(0, coin(sys));
    auto pts = sample_points(sys, {1, 1, SampleScheme::pseudorandom}, 16);
    EXPECT_THROW(uww_pointwise({f, f, f, f}, sys, pts[0], 4096, {}, 1 << 20), BudgetError);
}

TEST(HRange, ExactIntegerSquareRoot) {
    EXPECT_EQ(exact_isqrt(0), 0);
    EXPECT_EQ(exact_isqrt(15), 3);
    EXPECT_EQ(exact_isqrt(16), 4);
    EXPECT_EQ(exact_isqrt(1ll << 52), 1ll << 26);
    EXPECT_EQ(h_range(256, 0.5), 16);
    EXPECT_EQ(h_range(255, 0.5), 15);
    EXPECT_EQ(h_range(100, 1.0), 100);
    EXPECT_THROW(h_range(100, 0.0), std::invalid_argument);
}
