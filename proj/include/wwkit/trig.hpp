#pragma once

#include <vector>

#include "wwkit/common.hpp"

namespace wwkit {

// u_1,...,u_N stored as values[0..N-1]
struct WeightedSeq {
    std::vector<cplx> values;
    std::size_t size() const { return values.size(); }
};

// Certified bracket for sup_t |(1/N) sum_n u_n e^{2 pi i n t}|. The true sup
// lies in [lower, upper]: lower is an attained value (grid maximum, optionally
// tightened by a local golden-section pass); upper is the least of the grid
// maximum plus the derivative bound L = (2 pi / N) sum n |u_n| over half a
// grid step, the trivial bound (1/N) sum |u_n|, and the Bernstein self-bound
// grid_max / (1 - pi N / M).
struct SupEstimate {
    double lower = 0;
    double upper = 0;
    double argmax_t = 0;  // in [0,1)
    int grid_size = 0;

    double width() const { return upper - lower; }
};

SupEstimate sup_modulus(const WeightedSeq& u, int oversample = 8, bool refine = true);

// Batch variant; sequences may be evaluated in parallel, results come back in
// input order regardless of the thread count.
std::vector<SupEstimate> sup_modulus_batch(const std::vector<WeightedSeq>& seqs, int oversample = 8,
                                           bool refine = true, int threads = 1);

// Doubles the oversampling until upper - lower <= rel_width * max(lower, floor)
// or the cap is reached; used where checks need tight certified sups.
SupEstimate sup_modulus_tight(const WeightedSeq& u, double rel_width = 0.05, int max_oversample = 1 << 14);

// ---------------------------------------------------------------------------
// Van der Corput estimates on a finite complex sequence v_0..v_{N-1}:
//   averaged:      |avg v|^2                 vs the (N,H) correlation bound
//   sup_averaged:  sup_t |avg v_n e(nt)|^2   vs 2/(N(H+1)) sum|v|^2 + ...
//   summed:        sup_t |sum v_n e(nt)|^2   vs 2 sum|v|^2 + 4 sum_h |corr_h|
// Sup left-hand sides use the certified upper value so that a reported pass
// is conservative. Returns {lhs, rhs}.
// ---------------------------------------------------------------------------

enum class VdcMode { averaged, sup_averaged, summed };

struct TwoSides {
    double lhs = 0;
    double rhs = 0;
};

TwoSides vdc_bound(const WeightedSeq& v, std::int64_t H, VdcMode mode);

}  // namespace wwkit
