#pragma once

#include <string>
#include <vector>

#include "wwkit/ww.hpp"

namespace wwkit {

struct RecurrenceQuery {
    std::vector<ObsPtr> observables;       // f_1..f_J
    std::vector<std::int64_t> exponents;   // pairwise distinct, all nonzero
    SystemSpec system;
    std::int64_t N = 0;
    int p = 1;  // {1,2}
    SamplePlan plan;
};

// Outcome of one verified inequality. Whenever a certified sup bracket enters
// a side, the polarity is chosen so that a reported pass is conservative:
// upper values on the smaller side, lower values on the larger side; the
// residual bracket width enters `bracket_budget` and is part of `tolerance`.
struct CheckReport {
    std::string check;
    std::string system;
    std::string params;  // JSON object with the inputs that shaped the check
    double lhs = 0;
    double rhs = 0;
    double constant = 0;
    double margin = 0;  // rhs - lhs
    bool pass = false;
    std::uint64_t seed = 0;
    std::int64_t N = 0;
    double tolerance = 0;
    double bracket_budget = 0;
    std::vector<double> scale_factors;  // sup-norm normalizations applied
    std::string notes;

    std::string to_json() const;
};

void require_valid_exponents(const std::vector<std::int64_t>& a);

// (1/N) sum_n prod_j f_j(T^{a_j n} x), advanced with one orbit cursor per j
cplx recurrence_avg_at_point(const RecurrenceQuery& q, const Point& x);

double recurrence_norm_at(const RecurrenceQuery& q, const std::vector<Point>& points);
double recurrence_norm(const RecurrenceQuery& q);

// Explicit constant and threshold for the J-term recurrence bound:
//   J = 2: C = (1+sqrt2) (4|a_2| + 2|a_1| + 2)^{1/2} |a_1|, valid for all N;
//   J >= 3: C_J = sqrt(6|a_1| + 4|a_1| C_{J-1}) + sqrt(4 C_{J-1} |a_1|) with
//   C_{J-1} taken at the difference exponents (a_j - a_J)_{j<J}, valid for
//   N >= N_J = max(a_1^2, N_{J-1}).
struct BourgainConstant {
    double C = 0;
    std::int64_t N_threshold = 1;
};
BourgainConstant bourgain_constant(int J, const std::vector<std::int64_t>& a);

// Verifies ||A_N||_1 <= C (1/N + ww_1(f_1)^{2/3}) for J = 2 and the
// square-root chain with the order-(J-1) average for J >= 3. Inputs are
// rescaled by their structural sup-norm bounds first; both sides run on one
// shared sample set. On failure the check reruns once at doubled oversample.
CheckReport bourgain_check(const RecurrenceQuery& q, const WWOptions& opts = {});

// || (1/N) sum_n prod_j f_j(T^{a_j n} x) prod_k g_k o S^{b_k n} ||_{L^2(nu)}
// with x fixed and nu sampled by plan_y.
double return_times_norm(const SystemSpec& sys_x, const Point& x, const std::vector<ObsPtr>& fs,
                         const std::vector<std::int64_t>& as, const SystemSpec& sys_y,
                         const std::vector<ObsPtr>& gs, const std::vector<std::int64_t>& bs, std::int64_t N,
                         const SamplePlan& plan_y);

// K = 2 return-times chain with explicit constants: verifies
//   ||.||^2_{L^2(nu)} <= 2/(H+1) + 4/(H+1) sum_{h=1}^H [1/H + sup_h]
// at H = floor(sqrt N), where sup_h is the certified lower bracket of
// sup_t |(1/N) sum_n e^{2 pi i n t} prod_j [f_j conj(f_j o T^{jh})](T^{jn}x)|.
CheckReport rt_chain_check(const SystemSpec& sys_x, const Point& x, const std::vector<ObsPtr>& fs,
                           const SystemSpec& sys_y, const ObsPtr& g1, const ObsPtr& g2, std::int64_t N,
                           const SamplePlan& plan_y, const WWOptions& opts = {});

// ---------------------------------------------------------------------------
// Classical one-line inequalities
// ---------------------------------------------------------------------------

// ||sup_t |(1/N) sum e^{2 pi i n t} f o T^{an}|||_p <= |a| ||same at a=1||_p
CheckReport classical_power_lemma(const SystemSpec& system, const ObsPtr& f, std::int64_t a, std::int64_t N, int p,
                                  const SamplePlan& plan, const WWOptions& opts = {});

// ||sup_{N <= N_max} (1/N) sum f o T^n||_p <= p/(p-1) ||f||_p for real f;
// truncating the sup only lowers the left side, so the check stays valid.
CheckReport classical_maximal(const SystemSpec& system, const ObsPtr& f, double p, std::int64_t N_max,
                              const SamplePlan& plan);

// ((1/N) sum a_n^p)^{1/p} <= ((1/N) sum a_n^q)^{1/q} for 0 < p <= q
CheckReport classical_holder_avg(const std::vector<double>& values, double p, double q);

}  // namespace wwkit
