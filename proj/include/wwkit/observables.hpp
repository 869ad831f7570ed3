#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "wwkit/systems.hpp"

namespace wwkit {

// ---------------------------------------------------------------------------
// Bounded observables as immutable expression trees. Leaves:
//   TorusCharacter(a)          e^{2 pi i a.x}
//   PinskerFn(A, k, l)         1_A - E(1_A | sigma(coords >= k)), A a cylinder
//                              on coordinates >= l
//   CenteredCoordinate(i, m)   coordinate i minus m
//   Constant(c)
// Nodes: Conj, Prod, Sum, Scale, Shift (f o T^m), Tensor (product systems).
// Conj(Conj(e)) and Shift(0,e) simplify at construction. Every expression
// carries a finite sup-norm bound computed bottom-up.
// ---------------------------------------------------------------------------

class ObservableExpr;
using ObsPtr = std::shared_ptr<const ObservableExpr>;

enum class ObsKind { TorusCharacter, PinskerFn, CenteredCoordinate, Constant, Conj, Prod, Sum, Scale, Shift, Tensor };

class ObservableExpr {
public:
    ObsKind kind;

    // leaves
    std::vector<std::int64_t> freq;           // TorusCharacter
    std::map<std::int64_t, int> cylinder;     // PinskerFn
    int cutoff = 0;                           // PinskerFn k
    int level = 0;                            // PinskerFn l
    std::int64_t index = 0;                   // CenteredCoordinate
    double mean = 0;                          // CenteredCoordinate
    double amplitude = 0;                     // CenteredCoordinate sup bound
    cplx scalar{0.0, 0.0};                    // Constant / Scale

    // nodes
    std::vector<ObsPtr> children;
    std::int64_t shift = 0;  // Shift

    double bound = 0;  // sup-norm bound, finite by construction

    // coordinate span read on symbol words (inclusive); {0,-1} when none
    std::int64_t read_lo = 0;
    std::int64_t read_hi = -1;
    bool reads_word() const { return read_hi >= read_lo; }
};

ObsPtr torus_character(std::vector<std::int64_t> freq);
// A is given as {coordinate index -> symbol}; requires a nonempty cylinder.
ObsPtr pinsker_fn(std::map<std::int64_t, int> cylinder, int cutoff, int level, const Bernoulli& measure);
// coordinate `index` minus its mean under the given Bernoulli measure
ObsPtr centered_coordinate(std::int64_t index, const Bernoulli& measure);
ObsPtr constant(cplx value);
ObsPtr conj(ObsPtr e);
ObsPtr prod(std::vector<ObsPtr> children);
// pointwise sum; the sup bound adds (spans of linear combinations)
ObsPtr sum(std::vector<ObsPtr> children);
ObsPtr scale(cplx factor, ObsPtr e);
ObsPtr shift_by(std::int64_t m, ObsPtr e);
ObsPtr tensor(ObsPtr left, ObsPtr right);

cplx eval(const ObservableExpr& obs, const SystemSpec& system, const Point& x);
inline cplx eval(const ObsPtr& obs, const SystemSpec& system, const Point& x) { return eval(*obs, system, x); }

// ---------------------------------------------------------------------------
// Cube products: for h = (h_1,...,h_m) and scale j builds
//   prod over eta in {0,1}^m of conj^{|eta|} f o T^{j (h . eta)}.
// m = 0 returns f itself. The multi-function variant takes one observable per
// cube vertex, indexed by the bitmask of eta.
// ---------------------------------------------------------------------------

ObsPtr cube_product(const ObsPtr& f, const std::vector<std::int64_t>& h, std::int64_t scale_j = 1);
ObsPtr cube_product_multi(const std::vector<ObsPtr>& vertex_fns, const std::vector<std::int64_t>& h,
                          std::int64_t scale_j = 1);

// ---------------------------------------------------------------------------
// Exact integrals. Characters integrate to their scalar iff the total
// frequency vector vanishes; Bernoulli cylinder algebra integrates to products
// of marginals. Throws NoClosedFormError when the expression does not reduce
// (callers fall back to sampling).
// ---------------------------------------------------------------------------

cplx exact_integral(const ObservableExpr& obs, const SystemSpec& system);
inline cplx exact_integral(const ObsPtr& obs, const SystemSpec& system) { return exact_integral(*obs, system); }

}  // namespace wwkit
