#include "wwkit/trig.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "wwkit/parallel.hpp"

namespace wwkit {

namespace {

// FFTW plans are cached per size; creation is serialized (FFTW planning is not
// thread-safe), execution runs concurrently on per-thread buffers.
class FftBackward {
public:
    static void run(std::vector<cplx>& inout) {
        const int n = static_cast<int>(inout.size());
        fftw_plan plan = plan_for(n);
        auto* data = reinterpret_cast<fftw_complex*>(inout.data());
        fftw_execute_dft(plan, data, data);
    }

private:
    static fftw_plan plan_for(int n) {
        static std::mutex mu;
        static std::map<int, fftw_plan>* cache = new std::map<int, fftw_plan>();
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache->find(n);
        if (it != cache->end()) return it->second;
        std::vector<cplx> scratch(static_cast<std::size_t>(n));
        auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
        // FFTW_ESTIMATE keeps planning deterministic, so results are bit-stable
        fftw_plan p = fftw_plan_dft_1d(n, data, data, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        (*cache)[n] = p;
        return p;
    }
};

double scaled_modulus_at(const WeightedSeq& u, double t) {
    // |(1/N) sum_{n=1}^N u_n e^{2 pi i n t}|
    const std::size_t N = u.size();
    const cplx w = std::polar(1.0, kTwoPi * t);
    cplx acc = 0.0;
    cplx phase = w;
    for (std::size_t i = 0; i < N; ++i) {
        acc += u.values[i] * phase;
        phase *= w;
    }
    return std::abs(acc) / static_cast<double>(N);
}

double golden_section_peak(const WeightedSeq& u, double a, double b, double& best_t) {
    constexpr double invphi = 0.6180339887498949;
    double c = b - (b - a) * invphi;
    double d = a + (b - a) * invphi;
    double fc = scaled_modulus_at(u, c);
    double fd = scaled_modulus_at(u, d);
    for (int iter = 0; iter < 24; ++iter) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * invphi;
            fd = scaled_modulus_at(u, d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * invphi;
            fc = scaled_modulus_at(u, c);
        }
    }
    if (fc >= fd) {
        best_t = c;
        return fc;
    }
    best_t = d;
    return fd;
}

}  // namespace

SupEstimate sup_modulus(const WeightedSeq& u, int oversample, bool refine) {
    const std::size_t N = u.size();
    if (N < 1) throw std::invalid_argument("sup_modulus needs N >= 1");
    if (oversample < 2) throw std::invalid_argument("oversample must be >= 2");
    for (const cplx& v : u.values) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw std::invalid_argument("sequence entries must be finite");
    }
    const std::size_t M = static_cast<std::size_t>(oversample) * N;

    // grid values |S(m/M)| via a zero-padded backward FFT; the global phase
    // e^{2 pi i t} of the n = 1..N convention drops out of the modulus
    std::vector<cplx> buf(M, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < N; ++i) buf[i] = u.values[i];
    FftBackward::run(buf);

    double grid_max = 0;
    std::size_t arg = 0;
    for (std::size_t m = 0; m < M; ++m) {
        double mag = std::abs(buf[m]);
        if (mag > grid_max) {
            grid_max = mag;
            arg = m;
        }
    }
    grid_max /= static_cast<double>(N);

    double mean_abs = 0, lipschitz = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double a = std::abs(u.values[i]);
        mean_abs += a;
        lipschitz += static_cast<double>(i + 1) * a;
    }
    mean_abs /= static_cast<double>(N);
    lipschitz *= kTwoPi / static_cast<double>(N);

    SupEstimate est;
    est.grid_size = static_cast<int>(M);
    est.lower = grid_max;
    est.argmax_t = static_cast<double>(arg) / static_cast<double>(M);
    if (refine && grid_max > 0) {
        const double half = 1.0 / static_cast<double>(M);
        double t = est.argmax_t;
        double refined = golden_section_peak(u, est.argmax_t - half, est.argmax_t + half, t);
        if (refined > est.lower) {
            est.lower = refined;
            est.argmax_t = t - std::floor(t);
        }
    }
    est.upper = std::min(grid_max + lipschitz / (2.0 * static_cast<double>(M)), mean_abs);
    // Bernstein self-bound: |S|' <= 2 pi N sup|S|, so sup <= grid/(1 - pi N / M)
    const double ratio = kTwoPi / 2.0 * static_cast<double>(N) / static_cast<double>(M);
    if (ratio < 1.0) est.upper = std::min(est.upper, grid_max / (1.0 - ratio));
    est.upper = std::max(est.upper, est.lower);
    return est;
}

std::vector<SupEstimate> sup_modulus_batch(const std::vector<WeightedSeq>& seqs, int oversample, bool refine,
                                           int threads) {
    std::vector<SupEstimate> out(seqs.size());
    parallel_for(static_cast<std::int64_t>(seqs.size()), threads, [&](std::int64_t i) {
        out[static_cast<std::size_t>(i)] = sup_modulus(seqs[static_cast<std::size_t>(i)], oversample, refine);
    });
    return out;
}

SupEstimate sup_modulus_tight(const WeightedSeq& u, double rel_width, int max_oversample) {
    int oversample = 8;
    SupEstimate est = sup_modulus(u, oversample);
    const double floor = 1e-300;
    while (est.width() > rel_width * std::max(est.lower, floor) && oversample < max_oversample) {
        oversample *= 2;
        est = sup_modulus(u, oversample);
    }
    return est;
}

TwoSides vdc_bound(const WeightedSeq& v, std::int64_t H, VdcMode mode) {
    const std::int64_t N = static_cast<std::int64_t>(v.size());
    if (N < 1) throw std::invalid_argument("vdc_bound needs N >= 1");
    if (mode != VdcMode::summed && (H < 0 || H > N - 1)) {
        throw std::invalid_argument("vdc_bound needs 0 <= H <= N-1");
    }

    const double sup_rel_width = 1.0 / 3.0;  // (1+w)^2 stays clear of the estimate's slack
    const std::int64_t corr_range = (mode == VdcMode::summed) ? N - 1 : H;
    std::vector<cplx> corr(static_cast<std::size_t>(corr_range) + 1, cplx(0.0, 0.0));
    for (std::int64_t h = 1; h <= corr_range; ++h) {
        cplx acc = 0.0;
        for (std::int64_t n = 0; n + h < N; ++n) {
            acc += std::conj(v.values[static_cast<std::size_t>(n + h)]) * v.values[static_cast<std::size_t>(n)];
        }
        corr[static_cast<std::size_t>(h)] = acc;
    }
    double sumsq = 0;
    for (const cplx& z : v.values) sumsq += std::norm(z);

    TwoSides out;
    const double dN = static_cast<double>(N);
    switch (mode) {
        case VdcMode::averaged: {
            cplx mean = 0.0;
            for (const cplx& z : v.values) mean += z;
            mean /= dN;
            out.lhs = std::norm(mean);
            const double dH = static_cast<double>(H);
            double corr_part = 0;
            for (std::int64_t h = 1; h <= H; ++h) {
                corr_part += (dH + 1 - static_cast<double>(h)) * corr[static_cast<std::size_t>(h)].real();
            }
            out.rhs = (dN + dH) / (dN * dN * (dH + 1)) * sumsq +
                      2.0 * (dN + dH) / (dN * dN * (dH + 1) * (dH + 1)) * corr_part;
            return out;
        }
        case VdcMode::sup_averaged: {
            SupEstimate sup = sup_modulus_tight(WeightedSeq{v.values}, sup_rel_width);
            out.lhs = sup.upper * sup.upper;
            const double dH = static_cast<double>(H);
            double corr_part = 0;
            for (std::int64_t h = 1; h <= H; ++h) corr_part += std::abs(corr[static_cast<std::size_t>(h)]) / dN;
            out.rhs = 2.0 / (dN * (dH + 1)) * sumsq + 4.0 / (dH + 1) * corr_part;
            return out;
        }
        case VdcMode::summed: {
            SupEstimate sup = sup_modulus_tight(WeightedSeq{v.values}, sup_rel_width);
            out.lhs = (sup.upper * dN) * (sup.upper * dN);
            double corr_part = 0;
            for (std::int64_t h = 1; h <= N - 1; ++h) corr_part += std::abs(corr[static_cast<std::size_t>(h)]);
            out.rhs = 2.0 * sumsq + 4.0 * corr_part;
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace wwkit
