#include "wwkit/trig.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "wwkit/common.hpp"

using namespace wwkit;

namespace {

WeightedSeq random_seq(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    WeightedSeq u;
    u.values.resize(n);
    for (auto& z : u.values) z = cplx(2.0 * rng.unit() - 1.0, 2.0 * rng.unit() - 1.0);
    return u;
}

// direct dense-grid evaluation, the reference oracle for the bracket
double dense_grid_max(const WeightedSeq& u, std::size_t grid) {
    double best = 0;
    const auto N = static_cast<double>(u.size());
    for (std::size_t m = 0; m < grid; ++m) {
        const double t = static_cast<double>(m) / static_cast<double>(grid);
        cplx acc = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            acc += u.values[i] * std::polar(1.0, kTwoPi * static_cast<double>(i + 1) * t);
        }
        best = std::max(best, std::abs(acc) / N);
    }
    return best;
}

}  // namespace

TEST(SupModulus, ConstantSequencePeaksAtZero) {
    WeightedSeq u;
    u.values.assign(16, cplx(1.0, 0.0));
    SupEstimate est = sup_modulus(u, 8);
    EXPECT_NEAR(est.lower, 1.0, 1e-12);
    EXPECT_NEAR(est.upper, est.lower, 1e-12);  // trivial bound clamps the bracket
    EXPECT_LE(std::min(est.argmax_t, 1.0 - est.argmax_t), 1e-8);  // peak at 0 mod 1
    EXPECT_EQ(est.grid_size, 128);
}

TEST(SupModulus, PhaseModulationMovesArgmax) {
    const double beta = 0.3;
    WeightedSeq u;
    for (int n = 1; n <= 25; ++n) u.values.push_back(std::polar(1.0, -kTwoPi * n * beta));
    SupEstimate est = sup_modulus(u, 10);  // oversample a multiple of 10 puts 0.3 on the grid
    EXPECT_NEAR(est.lower, 1.0, 1e-12);
    EXPECT_NEAR(est.upper, 1.0, 1e-12);
    EXPECT_NEAR(est.argmax_t, beta, 1e-9);
}

TEST(SupModulus, BracketContainsDenseGridReference) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        WeightedSeq u = random_seq(seed, 64);
        SupEstimate est = sup_modulus(u, 8, /*refine=*/false);
        const double dense = dense_grid_max(u, 4096);
        EXPECT_LE(est.lower, dense + 1e-9) << "seed " << seed;  // 512-grid is a subgrid of 4096
        EXPECT_GE(est.upper, dense - 1e-9) << "seed " << seed;
    }
}

TEST(SupModulus, RefinementOnlyRaisesLower) {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        WeightedSeq u = random_seq(seed, 48);
        SupEstimate coarse = sup_modulus(u, 8, false);
        SupEstimate refined = sup_modulus(u, 8, true);
        EXPECT_GE(refined.lower, coarse.lower - 1e-15);
        EXPECT_LE(refined.lower, refined.upper + 1e-15);
    }
}

TEST(SupModulus, InvariantUnderPhaseModulation) {
    WeightedSeq u = random_seq(7, 40);
    WeightedSeq v = u;
    const double beta = 0.2183;
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        v.values[i] *= std::polar(1.0, kTwoPi * static_cast<double>(i + 1) * beta);
    }
    SupEstimate a = sup_modulus(u, 8);
    SupEstimate b = sup_modulus(v, 8);
    // the true sup is identical; the brackets must overlap
    EXPECT_LE(a.lower, b.upper + 1e-12);
    EXPECT_LE(b.lower, a.upper + 1e-12);
}

TEST(SupModulus, ScalingIsExactOnBothEnds) {
    WeightedSeq u = random_seq(9, 33);
    WeightedSeq doubled = u;
    for (auto& z : doubled.values) z *= 2.0;
    SupEstimate a = sup_modulus(u, 8);
    SupEstimate b = sup_modulus(doubled, 8);
    EXPECT_DOUBLE_EQ(b.lower, 2.0 * a.lower);
    EXPECT_DOUBLE_EQ(b.upper, 2.0 * a.upper);

    const cplx c(0.7, -0.2);
    WeightedSeq scaled = u;
    for (auto& z : scaled.values) z *= c;
    SupEstimate s = sup_modulus(scaled, 8);
    EXPECT_NEAR(s.lower, std::abs(c) * a.lower, 1e-12 * a.lower);
    EXPECT_NEAR(s.upper, std::abs(c) * a.upper, 1e-12 * a.upper);
}

TEST(SupModulus, BatchMatchesSingleCallsAtAnyThreadCount) {
    std::vector<WeightedSeq> seqs;
    for (std::uint64_t s = 0; s < 12; ++s) seqs.push_back(random_seq(s, 24 + 3 * s));
    auto serial = sup_modulus_batch(seqs, 8, true, 1);
    auto parallel = sup_modulus_batch(seqs, 8, true, 4);
    ASSERT_EQ(serial.size(), seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        SupEstimate one = sup_modulus(seqs[i], 8, true);
        EXPECT_DOUBLE_EQ(serial[i].lower, one.lower);
        EXPECT_DOUBLE_EQ(serial[i].upper, one.upper);
        EXPECT_DOUBLE_EQ(parallel[i].lower, one.lower);
        EXPECT_DOUBLE_EQ(parallel[i].upper, one.upper);
    }
}

TEST(SupModulus, TightModeShrinksWidth) {
    WeightedSeq u = random_seq(21, 96);
    SupEstimate est = sup_modulus_tight(u, 0.05);
    EXPECT_LE(est.width(), 0.05 * est.lower + 1e-15);
}

TEST(SupModulus, InputValidation) {
    WeightedSeq empty;
    EXPECT_THROW(sup_modulus(empty, 8), std::invalid_argument);
    WeightedSeq one;
    one.values = {cplx(1.0, 0.0)};
    EXPECT_THROW(sup_modulus(one, 1), std::invalid_argument);
    WeightedSeq bad;
    bad.values = {cplx(std::nan(""), 0.0)};
    EXPECT_THROW(sup_modulus(bad, 8), std::invalid_argument);
}

TEST(VdcBound, CollapsesToEqualityAtHZero) {
    WeightedSeq v;
    v.values.assign(10, cplx(1.0, 0.0));
    TwoSides s = vdc_bound(v, 0, VdcMode::averaged);
    EXPECT_NEAR(s.lhs, 1.0, 1e-12);
    EXPECT_NEAR(s.rhs, 1.0, 1e-12);
}

TEST(VdcBound, HandEvaluatedTwoTermCase) {
    WeightedSeq v;
    v.values.assign(2, cplx(1.0, 0.0));
    TwoSides s = vdc_bound(v, 1, VdcMode::averaged);
    // (N+H)/(N^2(H+1)) * 2 + 2(N+H)/(N^2(H+1)^2) * Re(1) = 3/4 + 6/16
    EXPECT_NEAR(s.lhs, 1.0, 1e-12);
    EXPECT_NEAR(s.rhs, 1.125, 1e-12);
}

TEST(VdcBound, PropertyHoldsForRandomInput) {
    Rng rng(55);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t N = 2 + rng.bits() % 255;
        WeightedSeq v = random_seq(1000 + static_cast<std::uint64_t>(trial), N);
        const std::int64_t H = static_cast<std::int64_t>(rng.bits() % N);
        for (VdcMode mode : {VdcMode::averaged, VdcMode::sup_averaged, VdcMode::summed}) {
            TwoSides s = vdc_bound(v, H, mode);
            EXPECT_LE(s.lhs, s.rhs * (1.0 + 1e-9) + 1e-12)
                << "trial " << trial << " N " << N << " H " << H << " mode " << static_cast<int>(mode);
        }
    }
}

TEST(VdcBound, RejectsOutOfRangeH) {
    WeightedSeq v = random_seq(3, 16);
    EXPECT_THROW(vdc_bound(v, 16, VdcMode::averaged), std::invalid_argument);
    EXPECT_THROW(vdc_bound(v, -1, VdcMode::sup_averaged), std::invalid_argument);
    EXPECT_NO_THROW(vdc_bound(v, 99, VdcMode::summed));  // H ignored for the summed variant
}
