#pragma once

#include <optional>
#include <vector>

#include "wwkit/ww.hpp"

namespace wwkit {

struct SeminormQuery {
    ObsPtr f;
    SystemSpec system;
    int k = 2;            // seminorm order, >= 2
    std::int64_t H = 64;  // finite truncation of the defining limits
    // exact integration when the correlation integrals reduce; otherwise
    // sampled with this plan
    std::optional<SamplePlan> plan;
    std::int64_t budget = 1 << 22;  // cap on the H^{k-1} correlation integrals
};

struct Correlation {
    cplx value{0.0, 0.0};
    double stderr_est = 0;  // 0 under exact integration
    bool exact = true;
};

// integral of f . conj(f o T^h); exact when the expression reduces, sampled
// (with reported standard error) otherwise
Correlation inner_corr(const ObsPtr& f, const SystemSpec& system, std::int64_t h,
                       const std::optional<SamplePlan>& plan = std::nullopt);

struct SeminormResult {
    double value = 0;
    double stderr_est = 0;  // first-order propagation; 0 when exact
    bool exact = true;
    std::int64_t integrals = 0;  // number of correlation integrals evaluated
};

// Finite-H Gowers-Host-Kra seminorm:
//   k = 2: ((1/H) sum_h |corr(f, h)|^2)^{1/4}
//   k > 2: ((1/H) sum_h raw_{k-1}(f . conj(f o T^h)))^{1/2^k}
// where raw_{k-1} is the 2^{k-1}-th power of the level below.
SeminormResult ghk_seminorm(const SeminormQuery& q);

// Side-by-side finite-N decay probe: for each N the pointwise (2b) quantity
// at one sampled point, the (3b) norm quantity on a budgeted h-range, the
// (4b) order-k average, and the finite-H order-(k+1) seminorm. Emitted for
// co-decay inspection; no pass/fail verdict is attached.
struct ProbeRow {
    std::int64_t N = 0;
    double ww_2b = 0;
    double ww_3b = 0;
    double ww_4b = 0;
    double seminorm_finite_h = 0;
    double stderr_est = 0;
};

std::vector<ProbeRow> equivalence_probe(const ObsPtr& f, const SystemSpec& system, int k,
                                        const std::vector<std::int64_t>& Ns, std::int64_t H,
                                        const SamplePlan& plan, const WWOptions& opts = {},
                                        std::int64_t probe_h_cap = 64);

}  // namespace wwkit
