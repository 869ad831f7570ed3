#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wwkit {

using cplx = std::complex<double>;
using u128 = unsigned __int128;
using i128 = __int128;

// Thrown when a Bernoulli word is asked for a coordinate outside its stored window.
class WindowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown by exact integration when the expression does not reduce to closed form.
class NoClosedFormError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a computation would exceed its configured cost budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic seed splitting. Every random stream in the library is derived
// from one 64-bit seed via derive_stream(seed, tag, index): experiment code
// picks a tag, the index enumerates samples/trials. splitmix64 is the mixer.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= tag * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(s);
    s ^= index + 0x632be59bd9b4e019ULL;
    std::uint64_t c = splitmix64(s);
    return a ^ (b + (c << 1));
}

// Self-contained generator; avoids distribution objects so the bit stream is
// identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0x5851f42d4c957f2dULL) {
        // warm up so that nearby seeds decorrelate
        for (int i = 0; i < 4; ++i) (void)splitmix64(state_);
    }

    std::uint64_t bits() { return splitmix64(state_); }

    // uniform in [0,1) with 53 random bits
    double unit() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    u128 bits128() {
        u128 hi = bits();
        return (hi << 64) | bits();
    }

private:
    std::uint64_t state_;
};

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace wwkit
