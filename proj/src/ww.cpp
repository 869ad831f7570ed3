#include "wwkit/ww.hpp"

#include <bit>
#include <cmath>

#include "wwkit/parallel.hpp"

namespace wwkit {

WeightedSeq orbit_weights(const ObsPtr& obs, const SystemSpec& system, const Point& x, std::int64_t N) {
    if (N < 1) throw std::invalid_argument("orbit_weights needs N >= 1");
    WeightedSeq seq;
    seq.values.resize(static_cast<std::size_t>(N));
    Point cur = x;
    for (std::int64_t n = 1; n <= N; ++n) {
        step(system, cur);
        seq.values[static_cast<std::size_t>(n - 1)] = eval(obs, system, cur);
    }
    return seq;
}

std::int64_t exact_isqrt(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("isqrt of negative value");
    auto y = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while ((y + 1) * (y + 1) <= n) ++y;
    while (y > 0 && y * y > n) --y;
    return y;
}

std::int64_t h_range(std::int64_t N, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0,1]");
    if (beta == 1.0) return N;
    if (beta == 0.5) return exact_isqrt(N);
    auto b = static_cast<std::int64_t>(std::pow(static_cast<double>(N), beta));
    while (std::pow(static_cast<double>(b + 1), 1.0 / beta) <= static_cast<double>(N)) ++b;
    while (b > 1 && std::pow(static_cast<double>(b), 1.0 / beta) > static_cast<double>(N)) --b;
    return std::max<std::int64_t>(b, 1);
}

std::int64_t ww_horizon(int order, std::int64_t N, double beta, std::int64_t scale_j) {
    return static_cast<std::int64_t>(order - 1) * h_range(N, beta) * scale_j + N;
}

namespace {

double p_norm(const std::vector<double>& vals, int p) {
    double acc = 0;
    for (double v : vals) acc += (p == 1) ? v : v * v;
    acc /= static_cast<double>(vals.size());
    return (p == 1) ? acc : std::sqrt(acc);
}

void check_p(int p) {
    if (p != 1 && p != 2) throw std::invalid_argument("p must be 1 or 2");
}

std::pair<std::int64_t, std::int64_t> word_span(const std::vector<ObsPtr>& fns) {
    std::int64_t lo = 0, hi = 0;
    for (const auto& f : fns) {
        if (f->reads_word()) {
            lo = std::min(lo, f->read_lo);
            hi = std::max(hi, f->read_hi);
        }
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Orbit tables. Vertex-function values along the orbit are independent of the
// cube tuple h, so one pass per sample feeds every h-term: the h-loop then
// only multiplies shifted table entries. The tabled values coincide
// bit-for-bit with walking the cube expression itself, because torus
// iteration is an exact fixed-point group law and word shifts only move the
// origin.
// ---------------------------------------------------------------------------

struct CubeLayout {
    std::vector<ObsPtr> distinct;           // unique vertex functions
    std::vector<std::size_t> table_index;   // per cube vertex (mask order)
};

CubeLayout layout_of(const std::vector<ObsPtr>& vertex_fns) {
    CubeLayout layout;
    layout.table_index.reserve(vertex_fns.size());
    for (const auto& f : vertex_fns) {
        std::size_t idx = layout.distinct.size();
        for (std::size_t d = 0; d < layout.distinct.size(); ++d) {
            if (layout.distinct[d].get() == f.get()) {
                idx = d;
                break;
            }
        }
        if (idx == layout.distinct.size()) layout.distinct.push_back(f);
        layout.table_index.push_back(idx);
    }
    return layout;
}

// tables[sample][d][m-1] = f_d(T^m x_sample), m = 1..len
using OrbitTables = std::vector<std::vector<std::vector<cplx>>>;

OrbitTables build_orbit_tables(const CubeLayout& layout, const SystemSpec& system, const std::vector<Point>& points,
                               std::int64_t len, int threads) {
    OrbitTables tables(points.size());
    parallel_for(static_cast<std::int64_t>(points.size()), threads, [&](std::int64_t i) {
        auto& per_fn = tables[static_cast<std::size_t>(i)];
        per_fn.assign(layout.distinct.size(), std::vector<cplx>(static_cast<std::size_t>(len)));
        Point cur = points[static_cast<std::size_t>(i)];
        for (std::int64_t m = 1; m <= len; ++m) {
            step(system, cur);
            for (std::size_t d = 0; d < layout.distinct.size(); ++d) {
                per_fn[d][static_cast<std::size_t>(m - 1)] = eval(layout.distinct[d], system, cur);
            }
        }
    });
    return tables;
}

void fill_cube_values(WeightedSeq& u, const std::vector<std::vector<cplx>>& sample_table, const CubeLayout& layout,
                      const std::vector<std::int64_t>& h, std::int64_t scale_j, std::int64_t N) {
    const std::size_t m = h.size();
    const std::size_t vertices = std::size_t{1} << m;
    u.values.assign(static_cast<std::size_t>(N), cplx(1.0, 0.0));
    for (std::size_t mask = 0; mask < vertices; ++mask) {
        std::int64_t dot = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (mask & (std::size_t{1} << i)) dot += h[i];
        }
        const std::int64_t offset = scale_j * dot;
        const auto& table = sample_table[layout.table_index[mask]];
        const bool conjugate = (std::popcount(mask) % 2 == 1);
        for (std::int64_t n = 0; n < N; ++n) {
            const cplx v = table[static_cast<std::size_t>(n + offset)];
            u.values[static_cast<std::size_t>(n)] *= conjugate ? std::conj(v) : v;
        }
    }
}

TermEstimate term_from_tables(const OrbitTables& tables, const CubeLayout& layout, const std::vector<std::int64_t>& h,
                              std::int64_t N, int p, std::int64_t scale_j, const WWOptions& opts,
                              std::vector<double>* per_sample_lower) {
    const auto S = static_cast<std::int64_t>(tables.size());
    std::vector<double> lowers(static_cast<std::size_t>(S)), uppers(static_cast<std::size_t>(S));
    parallel_for(S, opts.threads, [&](std::int64_t i) {
        WeightedSeq u;
        fill_cube_values(u, tables[static_cast<std::size_t>(i)], layout, h, scale_j, N);
        SupEstimate est = sup_modulus(u, opts.oversample, opts.refine);
        lowers[static_cast<std::size_t>(i)] = est.lower;
        uppers[static_cast<std::size_t>(i)] = est.upper;
    });
    TermEstimate t{p_norm(lowers, p), p_norm(uppers, p)};
    if (per_sample_lower != nullptr) *per_sample_lower = std::move(lowers);
    return t;
}

std::int64_t max_cube_offset(const std::vector<std::int64_t>& h, std::int64_t scale_j) {
    std::int64_t total = 0;
    for (std::int64_t hi : h) total += hi;
    return scale_j * total;
}

}  // namespace

TermEstimate ww_norm_term_at(const std::vector<ObsPtr>& vertex_fns, const SystemSpec& system,
                             const std::vector<std::int64_t>& h, std::int64_t N, int p,
                             const std::vector<Point>& points, std::int64_t scale_j, const WWOptions& opts,
                             std::vector<double>* per_sample_lower) {
    check_p(p);
    (void)cube_product_multi(vertex_fns, h, scale_j);  // validates shapes and h entries
    const CubeLayout layout = layout_of(vertex_fns);
    OrbitTables tables = build_orbit_tables(layout, system, points, N + max_cube_offset(h, scale_j), opts.threads);
    return term_from_tables(tables, layout, h, N, p, scale_j, opts, per_sample_lower);
}

TermEstimate ww_norm_term(const ObsPtr& f, const SystemSpec& system, const std::vector<std::int64_t>& h,
                          std::int64_t N, int p, const SamplePlan& plan, std::int64_t scale_j, const WWOptions& opts) {
    std::vector<ObsPtr> fns(std::size_t{1} << h.size(), f);
    std::int64_t shift_total = 0;
    for (std::int64_t hi : h) shift_total += hi * scale_j;
    auto [lo, hi_idx] = word_span(fns);
    auto points = sample_points(system, plan, shift_total + N, lo, hi_idx);
    return ww_norm_term_at(fns, system, h, N, p, points, scale_j, opts);
}

WWResult ww_average_with_points(const WWQuery& q, const std::vector<Point>& points, const WWOptions& opts,
                                std::vector<std::vector<double>>* collect_lower) {
    if (q.order < 1) throw std::invalid_argument("order must be >= 1");
    if (q.N < 4) throw std::invalid_argument("N must be >= 4");
    check_p(q.p);
    const std::size_t vertices = std::size_t{1} << (q.order - 1);
    std::vector<ObsPtr> fns = q.vertex_fns;
    if (fns.size() == 1 && vertices > 1) fns.assign(vertices, fns[0]);
    if (fns.size() != vertices) throw std::invalid_argument("need 1 or 2^{order-1} observables");
    if (collect_lower != nullptr) collect_lower->clear();

    WWResult result;
    const CubeLayout layout = layout_of(fns);
    if (q.order == 1) {
        OrbitTables tables = build_orbit_tables(layout, q.system, points, q.N, opts.threads);
        std::vector<double> row;
        TermEstimate t = term_from_tables(tables, layout, {}, q.N, q.p, q.scale_j, opts,
                                          collect_lower ? &row : nullptr);
        if (collect_lower != nullptr) collect_lower->push_back(std::move(row));
        result.value = t.lower;
        result.certified_upper = t.upper;
        result.per_h.emplace_back(std::vector<std::int64_t>{}, t);
        return result;
    }

    const std::int64_t B = h_range(q.N, q.beta);
    const int m = q.order - 1;
    // one orbit-table pass per sample serves every h tuple
    OrbitTables tables =
        build_orbit_tables(layout, q.system, points, q.N + static_cast<std::int64_t>(m) * B * q.scale_j, opts.threads);
    std::vector<std::int64_t> h(static_cast<std::size_t>(m), 1);
    double acc_lower = 0, acc_upper = 0;
    std::int64_t count = 0;
    // lexicographic enumeration of [B]^m
    while (true) {
        std::vector<double> row;
        TermEstimate t = term_from_tables(tables, layout, h, q.N, q.p, q.scale_j, opts,
                                          collect_lower ? &row : nullptr);
        if (collect_lower != nullptr) collect_lower->push_back(std::move(row));
        acc_lower += std::pow(t.lower, opts.cube_exponent);
        acc_upper += std::pow(t.upper, opts.cube_exponent);
        result.per_h.emplace_back(h, t);
        ++count;
        int pos = m - 1;
        while (pos >= 0 && h[static_cast<std::size_t>(pos)] == B) {
            h[static_cast<std::size_t>(pos)] = 1;
            --pos;
        }
        if (pos < 0) break;
        ++h[static_cast<std::size_t>(pos)];
    }
    result.value = acc_lower / static_cast<double>(count);
    result.certified_upper = acc_upper / static_cast<double>(count);
    return result;
}

WWResult ww_average(const WWQuery& q, const WWOptions& opts) {
    const std::size_t vertices = std::size_t{1} << (q.order - 1);
    std::vector<ObsPtr> fns = q.vertex_fns;
    if (fns.size() == 1 && vertices > 1) fns.assign(vertices, fns[0]);
    auto [lo, hi] = word_span(fns);
    auto points = sample_points(q.system, q.plan, ww_horizon(q.order, q.N, q.beta, q.scale_j), lo, hi);
    return ww_average_with_points(q, points, opts);
}

PointwiseEstimate uww_pointwise(const std::vector<ObsPtr>& vertex_fns, const SystemSpec& system, const Point& x,
                                std::int64_t N, const WWOptions& opts, std::int64_t max_terms) {
    const auto m = static_cast<int>(std::llround(std::log2(static_cast<double>(vertex_fns.size()))));
    if ((std::size_t{1} << m) != vertex_fns.size() || m < 1) {
        throw std::invalid_argument("uww_pointwise needs 2^{k-1} observables with k >= 2");
    }
    double terms = std::pow(static_cast<double>(N), m);
    if (terms > static_cast<double>(max_terms)) {
        throw BudgetError("uww_pointwise: N^{k-1} = " + std::to_string(terms) + " exceeds budget " +
                          std::to_string(max_terms));
    }
    const auto total = static_cast<std::int64_t>(terms);
    const CubeLayout layout = layout_of(vertex_fns);
    const OrbitTables tables = build_orbit_tables(layout, system, {x}, N + static_cast<std::int64_t>(m) * N, 1);
    std::vector<double> lowers(static_cast<std::size_t>(total)), uppers(static_cast<std::size_t>(total));
    parallel_for(total, opts.threads, [&](std::int64_t idx) {
        std::vector<std::int64_t> h(static_cast<std::size_t>(m));
        std::int64_t rest = idx;
        for (int i = m - 1; i >= 0; --i) {
            h[static_cast<std::size_t>(i)] = rest % N + 1;
            rest /= N;
        }
        WeightedSeq u;
        fill_cube_values(u, tables[0], layout, h, 1, N);
        SupEstimate est = sup_modulus(u, opts.oversample, opts.refine);
        lowers[static_cast<std::size_t>(idx)] = est.lower;
        uppers[static_cast<std::size_t>(idx)] = est.upper;
    });
    PointwiseEstimate out;
    for (std::int64_t i = 0; i < total; ++i) {
        out.lower += lowers[static_cast<std::size_t>(i)] * lowers[static_cast<std::size_t>(i)];
        out.upper += uppers[static_cast<std::size_t>(i)] * uppers[static_cast<std::size_t>(i)];
    }
    out.lower /= static_cast<double>(total);
    out.upper /= static_cast<double>(total);
    return out;
}

}  // namespace wwkit
