#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wwkit/common.hpp"

namespace wwkit {

// ---------------------------------------------------------------------------
// Torus coordinates are 128-bit fixed point: a coordinate x in [0,1) is stored
// as round(x * 2^128) and all mod-1 arithmetic is the natural wraparound of
// unsigned __int128. Closed-form powers of the skew map multiply coordinates
// by integer polynomial values that reach ~2^50; at that magnitude plain
// doubles keep only ~3 fractional digits after the mod-1 reduction, while the
// fixed-point group law stays exact. Composition identities therefore hold
// bit-for-bit.
// ---------------------------------------------------------------------------

double fixed_to_double(u128 x);

// Values within 1e-15 of 1.0 snap to 0.0 so the [0,1) invariant stays testable.
u128 fixed_from_double(double x);

struct TorusPoint {
    std::vector<u128> fixed;

    TorusPoint() = default;
    explicit TorusPoint(std::vector<u128> f) : fixed(std::move(f)) {}
    static TorusPoint from_doubles(const std::vector<double>& coords);

    std::size_t dim() const { return fixed.size(); }
    double coord(std::size_t i) const { return fixed_to_double(fixed[i]); }
    std::vector<double> coords() const;
};

// One sampled realization of a shift-space point: a finite window of symbols.
// Coordinate i lives at symbols[origin + i]; iterating the shift moves origin.
struct SymbolWord {
    std::vector<std::uint8_t> symbols;
    std::int64_t origin = 0;

    std::int64_t min_index() const { return -origin; }
    std::int64_t max_index() const { return static_cast<std::int64_t>(symbols.size()) - 1 - origin; }

    std::uint8_t at(std::int64_t index) const {
        std::int64_t pos = origin + index;
        if (pos < 0 || pos >= static_cast<std::int64_t>(symbols.size())) {
            throw WindowError("symbol word read outside stored window: index " + std::to_string(index) +
                              ", window [" + std::to_string(min_index()) + ", " + std::to_string(max_index()) + "]");
        }
        return symbols[static_cast<std::size_t>(pos)];
    }
};

struct Point;

struct PairPoint {
    std::shared_ptr<const Point> left;
    std::shared_ptr<const Point> right;
};

struct Point {
    std::variant<TorusPoint, SymbolWord, PairPoint> v;

    Point() = default;
    Point(TorusPoint p) : v(std::move(p)) {}
    Point(SymbolWord w) : v(std::move(w)) {}
    Point(PairPoint p) : v(std::move(p)) {}

    bool is_torus() const { return std::holds_alternative<TorusPoint>(v); }
    bool is_word() const { return std::holds_alternative<SymbolWord>(v); }
    bool is_pair() const { return std::holds_alternative<PairPoint>(v); }
    const TorusPoint& torus() const { return std::get<TorusPoint>(v); }
    const SymbolWord& word() const { return std::get<SymbolWord>(v); }
    const PairPoint& pair() const { return std::get<PairPoint>(v); }
};

// ---------------------------------------------------------------------------
// Systems
// ---------------------------------------------------------------------------

struct Rotation {
    double angle = 0;  // in (0,1)
    u128 angle_fixed = 0;
};

// (x_1,...,x_k) -> (x_1 + a, x_2 + x_1, ..., x_k + x_{k-1}) on T^k
struct Skew {
    int dim = 2;  // >= 2
    double angle = 0;
    u128 angle_fixed = 0;
};

struct Bernoulli {
    std::vector<double> probs;  // sums to 1 within 1e-12
    int alphabet() const { return static_cast<int>(probs.size()); }
};

struct SystemSpec;

struct ProductSys {
    std::shared_ptr<const SystemSpec> left;
    std::shared_ptr<const SystemSpec> right;
};

struct SystemSpec {
    std::variant<Rotation, Skew, Bernoulli, ProductSys> v;
    // Irrationality of an angle cannot be verified numerically; configs may
    // record the intent ("sqrt2-1", "golden", ...) here for reports.
    std::string angle_note;

    bool is_rotation() const { return std::holds_alternative<Rotation>(v); }
    bool is_skew() const { return std::holds_alternative<Skew>(v); }
    bool is_bernoulli() const { return std::holds_alternative<Bernoulli>(v); }
    bool is_product() const { return std::holds_alternative<ProductSys>(v); }
    bool is_torus() const { return is_rotation() || is_skew(); }
    int torus_dim() const { return is_rotation() ? 1 : std::get<Skew>(v).dim; }

    std::string describe() const;
};

SystemSpec make_rotation(double angle, std::string note = "");
SystemSpec make_skew(int dim, double angle, std::string note = "");
SystemSpec make_bernoulli(std::vector<double> probs);
SystemSpec make_product(SystemSpec left, SystemSpec right);

// Named angle constants ("sqrt2-1", "golden") or a decimal literal.
double resolve_angle(const std::string& text);

// ---------------------------------------------------------------------------
// Integer polynomials P_j driving the skew closed form, P_1(n) = n and
// P_j(n) = sum_{m=0}^{n-1} P_{j-1}(m) = binom(n, j); degree j with leading
// coefficient 1/j!.
// ---------------------------------------------------------------------------

// Exact value of P_j(n) for j >= 2, n >= 0. Throws std::overflow_error when
// the result exceeds the 64-bit range.
std::int64_t faulhaber_poly(int j, std::int64_t n);

// Internal wide version; sign handles the polynomial extension to n < 0.
struct SignedU128 {
    bool negative = false;
    u128 magnitude = 0;
};
SignedU128 faulhaber_wide(int j, std::int64_t n);

// ---------------------------------------------------------------------------
// Orbit maps. Torus systems accept any n (closed form, no n-fold loop);
// Bernoulli shifts only move the window origin, reads are bounds-checked.
// ---------------------------------------------------------------------------

Point iterate(const SystemSpec& system, const Point& x, std::int64_t n);

// In-place single forward step; the cheap path for orbit sweeps.
void step(const SystemSpec& system, Point& x);

// ---------------------------------------------------------------------------
// Sampling the invariant measure
// ---------------------------------------------------------------------------

enum class SampleScheme { pseudorandom, lattice };

struct SamplePlan {
    std::int64_t count = 0;
    std::uint64_t seed = 0;
    SampleScheme scheme = SampleScheme::pseudorandom;
};

// Bernoulli words are sized to cover coordinates [lo_index, hi_index+horizon],
// where horizon is the maximum shift any evaluation will apply and
// [lo_index, hi_index] is the coordinate span the observable reads.
// Torus systems ignore everything but the plan. The same plan always yields
// the same sample set.
std::vector<Point> sample_points(const SystemSpec& system, const SamplePlan& plan, std::int64_t horizon,
                                 std::int64_t lo_index = 0, std::int64_t hi_index = 0);

}  // namespace wwkit
