#include "wwkit/systems.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace wwkit {

double fixed_to_double(u128 x) {
    const auto hi = static_cast<std::uint64_t>(x >> 64);
    const auto lo = static_cast<std::uint64_t>(x);
    return std::ldexp(static_cast<double>(hi), -64) + std::ldexp(static_cast<double>(lo), -128);
}

u128 fixed_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("torus coordinate must be finite");
    double f = x - std::floor(x);
    if (f >= 1.0 || 1.0 - f < 1e-15) f = 0.0;  // snap near-1 values to 0
    // split into two 64-bit halves so the conversion keeps all 53 bits
    const double hi_part = std::floor(std::ldexp(f, 64));
    const double lo_part = std::ldexp(f, 128) - std::ldexp(hi_part, 64);
    u128 hi = static_cast<u128>(static_cast<std::uint64_t>(hi_part));
    u128 lo = static_cast<u128>(static_cast<std::uint64_t>(lo_part < 0 ? 0 : lo_part));
    return (hi << 64) + lo;
}

TorusPoint TorusPoint::from_doubles(const std::vector<double>& coords) {
    TorusPoint p;
    p.fixed.reserve(coords.size());
    for (double c : coords) p.fixed.push_back(fixed_from_double(c));
    return p;
}

std::vector<double> TorusPoint::coords() const {
    std::vector<double> out;
    out.reserve(fixed.size());
    for (u128 f : fixed) out.push_back(fixed_to_double(f));
    return out;
}

// ---------------------------------------------------------------------------
// System constructors
// ---------------------------------------------------------------------------

static void check_angle(double angle) {
    if (!(angle > 0.0 && angle < 1.0)) throw std::invalid_argument("angle must lie in (0,1)");
}

SystemSpec make_rotation(double angle, std::string note) {
    check_angle(angle);
    SystemSpec s;
    s.v = Rotation{angle, fixed_from_double(angle)};
    s.angle_note = std::move(note);
    return s;
}

SystemSpec make_skew(int dim, double angle, std::string note) {
    if (dim < 2) throw std::invalid_argument("skew product needs dim >= 2");
    check_angle(angle);
    SystemSpec s;
    s.v = Skew{dim, angle, fixed_from_double(angle)};
    s.angle_note = std::move(note);
    return s;
}

SystemSpec make_bernoulli(std::vector<double> probs) {
    if (probs.size() < 2) throw std::invalid_argument("Bernoulli alphabet needs at least 2 symbols");
    double sum = 0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("Bernoulli probabilities must lie in [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("Bernoulli probabilities must sum to 1 within 1e-12");
    SystemSpec s;
    s.v = Bernoulli{std::move(probs)};
    return s;
}

SystemSpec make_product(SystemSpec left, SystemSpec right) {
    SystemSpec s;
    s.v = ProductSys{std::make_shared<SystemSpec>(std::move(left)), std::make_shared<SystemSpec>(std::move(right))};
    return s;
}

double resolve_angle(const std::string& text) {
    if (text == "sqrt2-1") return std::sqrt(2.0) - 1.0;
    if (text == "golden") return (std::sqrt(5.0) - 1.0) / 2.0;
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == nullptr || *end != '\0') throw ConfigError("unknown angle: '" + text + "' (use a decimal, 'sqrt2-1' or 'golden')");
    return v;
}

std::string SystemSpec::describe() const {
    if (is_rotation()) {
        const auto& r = std::get<Rotation>(v);
        return "rotation(angle=" + (angle_note.empty() ? std::to_string(r.angle) : angle_note) + ")";
    }
    if (is_skew()) {
        const auto& s = std::get<Skew>(v);
        return "skew(dim=" + std::to_string(s.dim) +
               ", angle=" + (angle_note.empty() ? std::to_string(s.angle) : angle_note) + ")";
    }
    if (is_bernoulli()) {
        const auto& b = std::get<Bernoulli>(v);
        std::string out = "bernoulli(";
        for (std::size_t i = 0; i < b.probs.size(); ++i) out += (i ? "," : "") + std::to_string(b.probs[i]);
        return out + ")";
    }
    const auto& p = std::get<ProductSys>(v);
    return "product(" + p.left->describe() + " x " + p.right->describe() + ")";
}

// ---------------------------------------------------------------------------
// Binomial-form polynomials
// ---------------------------------------------------------------------------

static u128 binom_u128(std::int64_t n, int j) {
    // product formula with exact division at each step; overflow-checked
    if (j < 0) throw std::invalid_argument("binomial order must be >= 0");
    if (n < j) return 0;
    u128 result = 1;
    const u128 umax = ~static_cast<u128>(0);
    for (int i = 1; i <= j; ++i) {
        u128 factor = static_cast<u128>(n - j + i);
        if (factor != 0 && result > umax / factor) {
            throw std::overflow_error("polynomial value exceeds exact integer range");
        }
        result = result * factor / static_cast<u128>(i);
    }
    return result;
}

SignedU128 faulhaber_wide(int j, std::int64_t n) {
    if (j < 1) throw std::invalid_argument("polynomial index must be >= 1");
    if (n >= 0) return {false, binom_u128(n, j)};
    // polynomial extension: binom(-m, j) = (-1)^j binom(m+j-1, j)
    std::int64_t m = -n;
    return {(j % 2) != 0, binom_u128(m + j - 1, j)};
}

std::int64_t faulhaber_poly(int j, std::int64_t n) {
    if (j < 2) throw std::invalid_argument("faulhaber_poly requires j >= 2");
    if (n < 0) throw std::invalid_argument("faulhaber_poly requires n >= 0");
    u128 wide = binom_u128(n, j);
    if (wide > static_cast<u128>(std::numeric_limits<std::int64_t>::max())) {
        throw std::overflow_error("P_j(n) exceeds the 64-bit integer range");
    }
    return static_cast<std::int64_t>(wide);
}

// ---------------------------------------------------------------------------
// Iteration
// ---------------------------------------------------------------------------

static u128 mul_signed(const SignedU128& p, u128 x) {
    u128 prod = p.magnitude * x;  // wraps mod 2^128 == mod 1
    return p.negative ? static_cast<u128>(0) - prod : prod;
}

static TorusPoint iterate_torus(const SystemSpec& system, const TorusPoint& x, std::int64_t n) {
    if (system.is_rotation()) {
        const auto& r = std::get<Rotation>(system.v);
        TorusPoint out = x;
        out.fixed[0] = x.fixed[0] + mul_signed(faulhaber_wide(1, n), r.angle_fixed);
        return out;
    }
    const auto& s = std::get<Skew>(system.v);
    const int k = s.dim;
    if (static_cast<int>(x.fixed.size()) != k) throw std::invalid_argument("point dimension does not match skew dim");
    std::vector<SignedU128> P(static_cast<std::size_t>(k) + 1);
    for (int j = 1; j <= k; ++j) P[static_cast<std::size_t>(j)] = faulhaber_wide(j, n);
    TorusPoint out = x;
    for (int i = 1; i <= k; ++i) {
        u128 acc = x.fixed[static_cast<std::size_t>(i - 1)];
        for (int j = 1; j < i; ++j) acc += mul_signed(P[static_cast<std::size_t>(j)], x.fixed[static_cast<std::size_t>(i - j - 1)]);
        acc += mul_signed(P[static_cast<std::size_t>(i)], s.angle_fixed);
        out.fixed[static_cast<std::size_t>(i - 1)] = acc;
    }
    return out;
}

Point iterate(const SystemSpec& system, const Point& x, std::int64_t n) {
    if (n == 0) return x;
    if (system.is_torus()) {
        if (!x.is_torus()) throw std::invalid_argument("torus system needs a torus point");
        return Point(iterate_torus(system, x.torus(), n));
    }
    if (system.is_bernoulli()) {
        if (!x.is_word()) throw std::invalid_argument("Bernoulli system needs a symbol word");
        if (n < 0) throw std::invalid_argument("Bernoulli shift iterates forward only (n >= 0)");
        SymbolWord w = x.word();
        w.origin += n;  // reads outside the window fail at evaluation time
        return Point(std::move(w));
    }
    const auto& p = std::get<ProductSys>(system.v);
    if (!x.is_pair()) throw std::invalid_argument("product system needs a pair point");
    PairPoint out;
    out.left = std::make_shared<Point>(iterate(*p.left, *x.pair().left, n));
    out.right = std::make_shared<Point>(iterate(*p.right, *x.pair().right, n));
    return Point(std::move(out));
}

void step(const SystemSpec& system, Point& x) {
    if (system.is_rotation()) {
        auto& t = std::get<TorusPoint>(x.v);
        t.fixed[0] += std::get<Rotation>(system.v).angle_fixed;
        return;
    }
    if (system.is_skew()) {
        auto& t = std::get<TorusPoint>(x.v);
        const auto& s = std::get<Skew>(system.v);
        // (x1+a, x2+x1, ..., xk+x_{k-1}): run top-down so each uses the old value
        for (int i = s.dim - 1; i >= 1; --i) t.fixed[static_cast<std::size_t>(i)] += t.fixed[static_cast<std::size_t>(i - 1)];
        t.fixed[0] += s.angle_fixed;
        return;
    }
    if (system.is_bernoulli()) {
        std::get<SymbolWord>(x.v).origin += 1;
        return;
    }
    const auto& p = std::get<ProductSys>(system.v);
    auto& pr = std::get<PairPoint>(x.v);
    auto left = std::make_shared<Point>(*pr.left);
    auto right = std::make_shared<Point>(*pr.right);
    step(*p.left, *left);
    step(*p.right, *right);
    pr.left = std::move(left);
    pr.right = std::move(right);
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kTagSample = 0x53414d504c45ULL;  // "SAMPLE"

// floor(q * 2^128 / count) for q < count, exact in two 64-bit halves
u128 fraction_fixed(u128 q, u128 count) {
    u128 a = q << 64;
    u128 hi = a / count;
    u128 rem = a % count;
    u128 lo = (rem << 64) / count;
    return (hi << 64) + lo;
}

TorusPoint lattice_point(int dim, std::int64_t index, std::int64_t count) {
    // rank-1 Korobov lattice with generator base 1571
    TorusPoint p;
    p.fixed.resize(static_cast<std::size_t>(dim));
    u128 cnt = static_cast<u128>(count);
    u128 z = 1;
    for (int d = 0; d < dim; ++d) {
        u128 q = (static_cast<u128>(index) * z) % cnt;
        p.fixed[static_cast<std::size_t>(d)] = fraction_fixed(q, cnt);
        z = (z * 1571u) % cnt;
    }
    return p;
}

int draw_symbol(Rng& rng, const std::vector<double>& probs) {
    double u = rng.unit();
    double acc = 0;
    for (std::size_t s = 0; s + 1 < probs.size(); ++s) {
        acc += probs[s];
        if (u < acc) return static_cast<int>(s);
    }
    return static_cast<int>(probs.size()) - 1;
}

Point sample_one(const SystemSpec& system, std::uint64_t stream, const SamplePlan& plan, std::int64_t index,
                 std::int64_t horizon, std::int64_t lo_index, std::int64_t hi_index) {
    if (system.is_torus()) {
        const int dim = system.torus_dim();
        if (plan.scheme == SampleScheme::lattice) return Point(lattice_point(dim, index, plan.count));
        Rng rng(stream);
        TorusPoint p;
        p.fixed.resize(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) p.fixed[static_cast<std::size_t>(d)] = rng.bits128();
        return Point(std::move(p));
    }
    if (system.is_bernoulli()) {
        const auto& b = std::get<Bernoulli>(system.v);
        Rng rng(stream);
        SymbolWord w;
        std::int64_t lo = std::min<std::int64_t>(lo_index, 0);
        std::int64_t hi = hi_index + horizon;
        if (hi < lo) hi = lo;
        w.symbols.resize(static_cast<std::size_t>(hi - lo + 1));
        w.origin = -lo;
        for (auto& s : w.symbols) s = static_cast<std::uint8_t>(draw_symbol(rng, b.probs));
        return Point(std::move(w));
    }
    const auto& pr = std::get<ProductSys>(system.v);
    PairPoint pp;
    pp.left = std::make_shared<Point>(
        sample_one(*pr.left, derive_stream(stream, 'L', 0), plan, index, horizon, lo_index, hi_index));
    pp.right = std::make_shared<Point>(
        sample_one(*pr.right, derive_stream(stream, 'R', 0), plan, index, horizon, lo_index, hi_index));
    return Point(std::move(pp));
}

}  // namespace

std::vector<Point> sample_points(const SystemSpec& system, const SamplePlan& plan, std::int64_t horizon,
                                 std::int64_t lo_index, std::int64_t hi_index) {
    if (plan.count < 1) throw std::invalid_argument("sample plan needs count >= 1");
    if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(plan.count));
    for (std::int64_t i = 0; i < plan.count; ++i) {
        std::uint64_t stream = derive_stream(plan.seed, kTagSample, static_cast<std::uint64_t>(i));
        out.push_back(sample_one(system, stream, plan, i, horizon, lo_index, hi_index));
    }
    return out;
}

}  // namespace wwkit
