#include "wwkit/seminorms.hpp"

#include <cmath>

namespace wwkit {

Correlation inner_corr(const ObsPtr& f, const SystemSpec& system, std::int64_t h,
                       const std::optional<SamplePlan>& plan) {
    if (h < 0) throw std::invalid_argument("correlation lag must be >= 0");
    const ObsPtr expr = prod({f, conj(shift_by(h, f))});
    try {
        return {exact_integral(expr, system), 0.0, true};
    } catch (const NoClosedFormError&) {
        if (!plan) throw;
    }
    std::int64_t lo = 0, hi = 0;
    if (expr->reads_word()) {
        lo = expr->read_lo;
        hi = expr->read_hi;
    }
    auto points = sample_points(system, *plan, 0, lo, hi);
    cplx mean = 0.0;
    double sq = 0;
    for (const Point& x : points) {
        cplx v = eval(expr, system, x);
        mean += v;
        sq += std::norm(v);
    }
    const double n = static_cast<double>(points.size());
    mean /= n;
    const double var = std::max(0.0, sq / n - std::norm(mean));
    return {mean, std::sqrt(var / n), false};
}

namespace {

struct RawResult {
    double raw = 0;  // the 2^k-th power of the level-k seminorm
    double var = 0;  // variance estimate of raw under sampled integration
    bool exact = true;
    std::int64_t integrals = 0;
};

RawResult raw_level(const ObsPtr& f, const SeminormQuery& q, int k) {
    RawResult out;
    if (k == 2) {
        for (std::int64_t h = 1; h <= q.H; ++h) {
            Correlation c = inner_corr(f, q.system, h, q.plan);
            out.raw += std::norm(c.value);
            // d|c|^2 = 2|c| d|c|
            out.var += 4.0 * std::norm(c.value) * c.stderr_est * c.stderr_est;
            out.exact = out.exact && c.exact;
            ++out.integrals;
        }
        out.raw /= static_cast<double>(q.H);
        out.var /= static_cast<double>(q.H * q.H);
        return out;
    }
    for (std::int64_t h = 1; h <= q.H; ++h) {
        RawResult inner = raw_level(prod({f, conj(shift_by(h, f))}), q, k - 1);
        out.raw += inner.raw;
        out.var += inner.var;
        out.exact = out.exact && inner.exact;
        out.integrals += inner.integrals;
        if (out.integrals > q.budget) {
            throw BudgetError("ghk_seminorm: correlation budget " + std::to_string(q.budget) + " exceeded");
        }
    }
    out.raw /= static_cast<double>(q.H);
    out.var /= static_cast<double>(q.H * q.H);
    return out;
}

}  // namespace

SeminormResult ghk_seminorm(const SeminormQuery& q) {
    if (q.k < 2) throw std::invalid_argument("seminorm order must be >= 2");
    if (q.H < 1) throw std::invalid_argument("H must be >= 1");
    double cost = std::pow(static_cast<double>(q.H), q.k - 1);
    if (cost > static_cast<double>(q.budget)) {
        throw BudgetError("ghk_seminorm: H^{k-1} = " + std::to_string(cost) + " exceeds budget " +
                          std::to_string(q.budget));
    }
    RawResult raw = raw_level(q.f, q, q.k);
    SeminormResult res;
    const double inv = 1.0 / std::pow(2.0, q.k);
    res.value = std::pow(raw.raw, inv);
    res.exact = raw.exact;
    res.integrals = raw.integrals;
    if (!raw.exact && raw.raw > 0) {
        // first-order propagation through x -> x^{1/2^k}
        res.stderr_est = inv * std::pow(raw.raw, inv - 1.0) * std::sqrt(raw.var);
    }
    return res;
}

std::vector<ProbeRow> equivalence_probe(const ObsPtr& f, const SystemSpec& system, int k,
                                        const std::vector<std::int64_t>& Ns, std::int64_t H,
                                        const SamplePlan& plan, const WWOptions& opts, std::int64_t probe_h_cap) {
    if (k < 2) throw std::invalid_argument("equivalence probe needs order >= 2");
    SeminormQuery sq;
    sq.f = f;
    sq.system = system;
    sq.k = k + 1;
    sq.H = H;
    sq.plan = plan;
    SeminormResult sem = ghk_seminorm(sq);

    std::vector<ProbeRow> rows;
    rows.reserve(Ns.size());
    const int m = k - 1;
    for (std::int64_t N : Ns) {
        ProbeRow row;
        row.N = N;
        row.seminorm_finite_h = sem.value;
        row.stderr_est = sem.stderr_est;

        const std::size_t vertices = std::size_t{1} << m;
        std::vector<ObsPtr> fns(vertices, f);
        const std::int64_t B3 = std::min(N, probe_h_cap);

        auto pts = sample_points(system, plan, ww_horizon(k, N, 1.0, 1),
                                 f->reads_word() ? f->read_lo : 0, f->reads_word() ? f->read_hi : 0);

        // pointwise (2b) quantity at the first sampled point, full [N]^{k-1} range
        row.ww_2b = uww_pointwise(fns, system, pts.front(), N, opts).lower;

        // (3b): squared-norm average, h-range capped by the probe budget
        {
            double acc = 0;
            std::int64_t count = 0;
            std::vector<std::int64_t> h(static_cast<std::size_t>(m), 1);
            while (true) {
                TermEstimate t = ww_norm_term_at(fns, system, h, N, 2, pts, 1, opts);
                acc += t.lower * t.lower;
                ++count;
                int pos = m - 1;
                while (pos >= 0 && h[static_cast<std::size_t>(pos)] == B3) {
                    h[static_cast<std::size_t>(pos)] = 1;
                    --pos;
                }
                if (pos < 0) break;
                ++h[static_cast<std::size_t>(pos)];
            }
            row.ww_3b = acc / static_cast<double>(count);
        }

        // (4b): the order-k average with the sqrt range and 2/3 exponent
        {
            WWQuery wq;
            wq.vertex_fns = fns;
            wq.system = system;
            wq.order = k;
            wq.N = N;
            wq.p = 2;
            wq.beta = 0.5;
            wq.plan = plan;
            row.ww_4b = ww_average_with_points(wq, pts, opts).value;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace wwkit
