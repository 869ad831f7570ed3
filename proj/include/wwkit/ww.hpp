#pragma once

#include <utility>
#include <vector>

#include "wwkit/observables.hpp"
#include "wwkit/trig.hpp"

namespace wwkit {

struct WWOptions {
    int oversample = 8;
    bool refine = true;
    // Exponent applied to each h-term for order >= 2. 1.0 reproduces the
    // comparison variant without the 2/3 power.
    double cube_exponent = 2.0 / 3.0;
    int threads = 1;
};

// (f(T^n x))_{n=1..N}, built with one step per n rather than n-step closed
// forms per entry.
WeightedSeq orbit_weights(const ObsPtr& obs, const SystemSpec& system, const Point& x, std::int64_t N);

// p-norm aggregates of certified sup brackets over a sample set
struct TermEstimate {
    double lower = 0;
    double upper = 0;
};

struct WWQuery {
    // one entry for the single-function average, 2^{order-1} entries
    // (bitmask-indexed cube vertices) for the multi-function variant
    std::vector<ObsPtr> vertex_fns;
    SystemSpec system;
    int order = 1;        // k >= 1
    std::int64_t N = 0;   // >= 4
    int p = 2;            // {1, 2}
    double beta = 0.5;    // h ranges over [floor(N^beta)]^{k-1}
    std::int64_t scale_j = 1;
    SamplePlan plan;
};

struct WWResult {
    double value = 0;            // h-average of the exponentiated lower terms
    double certified_upper = 0;  // same aggregation on the certified uppers
    std::vector<std::pair<std::vector<std::int64_t>, TermEstimate>> per_h;
};

std::int64_t exact_isqrt(std::int64_t n);
std::int64_t h_range(std::int64_t N, double beta);

// || sup_t |(1/N) sum e^{2 pi i n t} (cube at h)(T^n x)| ||_p over the given
// sample set; the same set must be reused across h so h-averages are not
// polluted by independent Monte Carlo noise.
TermEstimate ww_norm_term_at(const std::vector<ObsPtr>& vertex_fns, const SystemSpec& system,
                             const std::vector<std::int64_t>& h, std::int64_t N, int p,
                             const std::vector<Point>& points, std::int64_t scale_j, const WWOptions& opts,
                             std::vector<double>* per_sample_lower = nullptr);

TermEstimate ww_norm_term(const ObsPtr& f, const SystemSpec& system, const std::vector<std::int64_t>& h,
                          std::int64_t N, int p, const SamplePlan& plan, std::int64_t scale_j = 1,
                          const WWOptions& opts = {});

// Order-k Wiener-Wintner average: mean over h in [floor(N^beta)]^{k-1} of the
// 2/3-power of the h-term. Order 1 is the plain sup-average norm (no h, no
// exponent). Lexicographic h order and plan-order samples keep results
// bit-stable across thread counts.
// When collect_lower is given it receives the per-sample sup lowers, one row
// per h tuple in lexicographic order (used for resampling error estimates).
WWResult ww_average(const WWQuery& q, const WWOptions& opts = {});
WWResult ww_average_with_points(const WWQuery& q, const std::vector<Point>& points, const WWOptions& opts = {},
                                std::vector<std::vector<double>>* collect_lower = nullptr);

// Pointwise uniform probe at one x: (1/N^{k-1}) sum_{h in [N]^{k-1}} of the
// squared sup bracket. Cost N^{k-1} sup evaluations, guarded by max_terms.
struct PointwiseEstimate {
    double lower = 0;
    double upper = 0;
};
PointwiseEstimate uww_pointwise(const std::vector<ObsPtr>& vertex_fns, const SystemSpec& system, const Point& x,
                                std::int64_t N, const WWOptions& opts = {}, std::int64_t max_terms = 1 << 22);

// Sizing helper for Bernoulli windows: the maximum shift applied when the
// order-k average at length N runs over h in [floor(N^beta)]^{k-1} with cube
// scale j.
std::int64_t ww_horizon(int order, std::int64_t N, double beta, std::int64_t scale_j);

}  // namespace wwkit
