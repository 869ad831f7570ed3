#include "wwkit/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "wwkit/parallel.hpp"

namespace wwkit {

std::string CheckReport::to_json() const {
    nlohmann::json j;
    j["check"] = check;
    j["system"] = system;
    if (!params.empty()) {
        j["params"] = nlohmann::json::parse(params, nullptr, /*allow_exceptions=*/false);
        if (j["params"].is_discarded()) j["params"] = params;
    } else {
        j["params"] = nlohmann::json::object();
    }
    j["lhs"] = lhs;
    j["rhs"] = rhs;
    j["constant"] = constant;
    j["margin"] = margin;
    j["pass"] = pass;
    j["seed"] = seed;
    j["N"] = N;
    j["brackets"] = {{"budget", bracket_budget}, {"tolerance", tolerance}};
    if (!scale_factors.empty()) j["scale_factors"] = scale_factors;
    if (!notes.empty()) j["notes"] = notes;
    return j.dump();
}

void require_valid_exponents(const std::vector<std::int64_t>& a) {
    if (a.empty()) throw std::invalid_argument("need at least one exponent");
    std::set<std::int64_t> seen;
    for (std::int64_t e : a) {
        if (e == 0) throw std::invalid_argument("exponents must be nonzero");
        if (!seen.insert(e).second) throw std::invalid_argument("exponents must be pairwise distinct");
    }
}

namespace {

constexpr double kCheckTolAbs = 1e-6;

struct Normalized {
    std::vector<ObsPtr> fns;
    std::vector<double> scales;
};

Normalized normalize_by_bound(const std::vector<ObsPtr>& fns) {
    Normalized out;
    out.fns.reserve(fns.size());
    for (const auto& f : fns) {
        if (f->bound > 0) {
            out.fns.push_back(scale(1.0 / f->bound, f));
            out.scales.push_back(f->bound);
        } else {
            out.fns.push_back(f);
            out.scales.push_back(1.0);
        }
    }
    return out;
}

// word-coordinate reach of orbit terms f_j o T^{a_j n} for n in [1, N]
void orbit_reach(const std::vector<ObsPtr>& fns, const std::vector<std::int64_t>& as, std::int64_t N,
                 std::int64_t& lo, std::int64_t& hi) {
    for (std::size_t j = 0; j < fns.size(); ++j) {
        if (!fns[j]->reads_word()) continue;
        const std::int64_t reach_lo = std::min<std::int64_t>(as[j], as[j] * N);
        const std::int64_t reach_hi = std::max<std::int64_t>(as[j], as[j] * N);
        lo = std::min(lo, fns[j]->read_lo + reach_lo);
        hi = std::max(hi, fns[j]->read_hi + reach_hi);
    }
}

cplx avg_at_point(const std::vector<ObsPtr>& fns, const std::vector<std::int64_t>& as, const SystemSpec& system,
                  std::int64_t N, const Point& x) {
    const std::size_t J = fns.size();
    std::vector<Point> cursors(J, x);
    cplx acc = 0.0;
    for (std::int64_t n = 1; n <= N; ++n) {
        cplx term = 1.0;
        for (std::size_t j = 0; j < J; ++j) {
            cursors[j] = iterate(system, cursors[j], as[j]);
            term *= eval(fns[j], system, cursors[j]);
        }
        acc += term;
    }
    return acc / static_cast<double>(N);
}

double norm_of_avgs(const std::vector<ObsPtr>& fns, const std::vector<std::int64_t>& as, const SystemSpec& system,
                    std::int64_t N, int p, const std::vector<Point>& points, int threads) {
    const auto S = static_cast<std::int64_t>(points.size());
    std::vector<double> mags(static_cast<std::size_t>(S));
    parallel_for(S, threads, [&](std::int64_t i) {
        mags[static_cast<std::size_t>(i)] = std::abs(avg_at_point(fns, as, system, N, points[static_cast<std::size_t>(i)]));
    });
    double acc = 0;
    for (double m : mags) acc += (p == 1) ? m : m * m;
    acc /= static_cast<double>(S);
    return (p == 1) ? acc : std::sqrt(acc);
}

std::string json_params(std::initializer_list<std::pair<std::string, nlohmann::json>> kv) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : kv) j[k] = v;
    return j.dump();
}

}  // namespace

cplx recurrence_avg_at_point(const RecurrenceQuery& q, const Point& x) {
    require_valid_exponents(q.exponents);
    if (q.observables.size() != q.exponents.size()) throw std::invalid_argument("one exponent per observable");
    if (q.N < 1) throw std::invalid_argument("N must be >= 1");
    return avg_at_point(q.observables, q.exponents, q.system, q.N, x);
}

double recurrence_norm_at(const RecurrenceQuery& q, const std::vector<Point>& points) {
    require_valid_exponents(q.exponents);
    if (q.p != 1 && q.p != 2) throw std::invalid_argument("p must be 1 or 2");
    return norm_of_avgs(q.observables, q.exponents, q.system, q.N, q.p, points, 1);
}

double recurrence_norm(const RecurrenceQuery& q) {
    std::int64_t lo = 0, hi = 0;
    orbit_reach(q.observables, q.exponents, q.N, lo, hi);
    auto points = sample_points(q.system, q.plan, 0, lo, hi);
    return recurrence_norm_at(q, points);
}

BourgainConstant bourgain_constant(int J, const std::vector<std::int64_t>& a) {
    if (J < 2) throw std::invalid_argument("bourgain_constant needs J >= 2");
    if (static_cast<int>(a.size()) != J) throw std::invalid_argument("need one exponent per function");
    require_valid_exponents(a);
    if (J == 2) {
        const double a1 = std::abs(static_cast<double>(a[0]));
        const double a2 = std::abs(static_cast<double>(a[1]));
        return {(1.0 + std::sqrt(2.0)) * std::sqrt(4.0 * a2 + 2.0 * a1 + 2.0) * a1, 1};
    }
    std::vector<std::int64_t> diffs(a.begin(), a.end() - 1);
    for (auto& d : diffs) d -= a.back();
    const BourgainConstant prev = bourgain_constant(J - 1, diffs);
    const double a1 = std::abs(static_cast<double>(a[0]));
    const double C = std::sqrt(6.0 * a1 + 4.0 * a1 * prev.C) + std::sqrt(4.0 * prev.C * a1);
    const auto thr = static_cast<std::int64_t>(a[0] * a[0]);
    return {C, std::max(thr, prev.N_threshold)};
}

namespace {

CheckReport bourgain_check_once(const RecurrenceQuery& q, const WWOptions& opts) {
    const int J = static_cast<int>(q.observables.size());
    const BourgainConstant bc = bourgain_constant(J, q.exponents);
    if (q.N < bc.N_threshold) {
        throw std::invalid_argument("bourgain_check: N = " + std::to_string(q.N) + " is below the threshold N_J = " +
                                    std::to_string(bc.N_threshold) + " for these exponents");
    }

    Normalized norm = normalize_by_bound(q.observables);

    // one shared sample set for both sides of the inequality
    std::int64_t lo = 0, hi = 0;
    orbit_reach(norm.fns, q.exponents, q.N, lo, hi);
    const std::int64_t B = exact_isqrt(q.N);
    const std::int64_t ww_reach = static_cast<std::int64_t>(J - 2 > 0 ? J - 2 : 0) * B + q.N;
    if (norm.fns[0]->reads_word()) hi = std::max(hi, norm.fns[0]->read_hi + ww_reach);
    auto points = sample_points(q.system, q.plan, 0, lo, hi);

    const double lhs = norm_of_avgs(norm.fns, q.exponents, q.system, q.N, 1, points, opts.threads);

    double rhs = 0;
    const double C = bc.C;
    if (J == 2) {
        TermEstimate ww = ww_norm_term_at({norm.fns[0]}, q.system, {}, q.N, 1, points, 1, opts);
        rhs = C * (1.0 / static_cast<double>(q.N) + std::pow(ww.lower, 2.0 / 3.0));
    } else {
        WWQuery wq;
        wq.vertex_fns = {norm.fns[0]};
        wq.system = q.system;
        wq.order = J - 1;
        wq.N = q.N;
        wq.p = 1;
        wq.beta = 0.5;
        wq.scale_j = 1;
        wq.plan = q.plan;
        WWResult r = ww_average_with_points(wq, points, opts);
        const double ex = std::pow(2.0, -(J - 2));
        rhs = C * (std::pow(static_cast<double>(B), -ex) + std::pow(r.value, ex));
    }

    CheckReport rep;
    rep.check = (J == 2) ? "bourgain-double" : "bourgain-J" + std::to_string(J);
    rep.system = q.system.describe();
    rep.params = json_params({{"exponents", q.exponents}, {"samples", q.plan.count}, {"oversample", opts.oversample},
                              {"N_threshold", bc.N_threshold}});
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.constant = C;
    rep.margin = rhs - lhs;
    rep.tolerance = kCheckTolAbs;
    rep.bracket_budget = 0;  // right side uses certified lower sups only
    rep.pass = lhs <= rhs + rep.tolerance;
    rep.seed = q.plan.seed;
    rep.N = q.N;
    rep.scale_factors = norm.scales;
    rep.notes = "constant C=" + std::to_string(C) + ", threshold N_J=" + std::to_string(bc.N_threshold);
    return rep;
}

}  // namespace

CheckReport bourgain_check(const RecurrenceQuery& q, const WWOptions& opts) {
    CheckReport rep = bourgain_check_once(q, opts);
    if (!rep.pass) {
        WWOptions retry = opts;
        retry.oversample *= 2;
        rep = bourgain_check_once(q, retry);
        rep.notes += "; rerun at doubled oversample";
    }
    return rep;
}

double return_times_norm(const SystemSpec& sys_x, const Point& x, const std::vector<ObsPtr>& fs,
                         const std::vector<std::int64_t>& as, const SystemSpec& sys_y,
                         const std::vector<ObsPtr>& gs, const std::vector<std::int64_t>& bs, std::int64_t N,
                         const SamplePlan& plan_y) {
    if (fs.empty() || gs.empty()) throw std::invalid_argument("need J >= 1 and K >= 1 observables");
    if (fs.size() != as.size() || gs.size() != bs.size()) throw std::invalid_argument("one exponent per observable");
    require_valid_exponents(as);
    require_valid_exponents(bs);

    // the x-side weights do not depend on y; materialize them once
    std::vector<cplx> weights(static_cast<std::size_t>(N));
    {
        std::vector<Point> cursors(fs.size(), x);
        for (std::int64_t n = 1; n <= N; ++n) {
            cplx w = 1.0;
            for (std::size_t j = 0; j < fs.size(); ++j) {
                cursors[j] = iterate(sys_x, cursors[j], as[j]);
                w *= eval(fs[j], sys_x, cursors[j]);
            }
            weights[static_cast<std::size_t>(n - 1)] = w;
        }
    }

    std::int64_t lo = 0, hi = 0;
    orbit_reach(gs, bs, N, lo, hi);
    auto ys = sample_points(sys_y, plan_y, 0, lo, hi);
    double acc = 0;
    for (const Point& y : ys) {
        std::vector<Point> cursors(gs.size(), y);
        cplx sum = 0.0;
        for (std::int64_t n = 1; n <= N; ++n) {
            cplx term = weights[static_cast<std::size_t>(n - 1)];
            for (std::size_t k = 0; k < gs.size(); ++k) {
                cursors[k] = iterate(sys_y, cursors[k], bs[k]);
                term *= eval(gs[k], sys_y, cursors[k]);
            }
            sum += term;
        }
        acc += std::norm(sum / static_cast<double>(N));
    }
    return std::sqrt(acc / static_cast<double>(ys.size()));
}

CheckReport rt_chain_check(const SystemSpec& sys_x, const Point& x, const std::vector<ObsPtr>& fs,
                           const SystemSpec& sys_y, const ObsPtr& g1, const ObsPtr& g2, std::int64_t N,
                           const SamplePlan& plan_y, const WWOptions& opts) {
    if (fs.empty()) throw std::invalid_argument("need J >= 1 observables on the first system");
    if (N < 4) throw std::invalid_argument("N must be >= 4");
    Normalized nf = normalize_by_bound(fs);
    Normalized ng = normalize_by_bound({g1, g2});

    std::vector<std::int64_t> as(nf.fns.size());
    for (std::size_t j = 0; j < as.size(); ++j) as[j] = static_cast<std::int64_t>(j + 1);

    const double lhs_norm = return_times_norm(sys_x, x, nf.fns, as, sys_y, ng.fns, {1, 2}, N, plan_y);
    const double lhs = lhs_norm * lhs_norm;

    const std::int64_t H = exact_isqrt(N);
    const auto J = nf.fns.size();
    std::vector<double> sups(static_cast<std::size_t>(H));
    parallel_for(H, opts.threads, [&](std::int64_t hidx) {
        const std::int64_t h = hidx + 1;
        std::vector<ObsPtr> corr(J);
        for (std::size_t j = 0; j < J; ++j) {
            const auto jj = static_cast<std::int64_t>(j + 1);
            corr[j] = prod({nf.fns[j], conj(shift_by(jj * h, nf.fns[j]))});
        }
        WeightedSeq u;
        u.values.resize(static_cast<std::size_t>(N));
        std::vector<Point> cursors(J, x);
        for (std::int64_t n = 1; n <= N; ++n) {
            cplx term = 1.0;
            for (std::size_t j = 0; j < J; ++j) {
                cursors[j] = iterate(sys_x, cursors[j], static_cast<std::int64_t>(j + 1));
                term *= eval(corr[j], sys_x, cursors[j]);
            }
            u.values[static_cast<std::size_t>(n - 1)] = term;
        }
        sups[static_cast<std::size_t>(hidx)] = sup_modulus(u, opts.oversample, opts.refine).lower;
    });

    const double dH = static_cast<double>(H);
    double sum_terms = 0;
    for (double s : sups) sum_terms += 1.0 / dH + s;
    const double rhs = 2.0 / (dH + 1.0) + 4.0 / (dH + 1.0) * sum_terms;

    CheckReport rep;
    rep.check = "return-times-chain-K2";
    rep.system = sys_x.describe() + " x " + sys_y.describe();
    rep.params = json_params({{"J", J}, {"H", H}, {"samples_y", plan_y.count}, {"oversample", opts.oversample}});
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.constant = 4.0 / (dH + 1.0);
    rep.margin = rhs - lhs;
    rep.tolerance = kCheckTolAbs;
    rep.bracket_budget = 0;  // right side uses certified lower sups only
    rep.pass = lhs <= rhs + rep.tolerance;
    rep.seed = plan_y.seed;
    rep.N = N;
    rep.scale_factors = nf.scales;
    rep.scale_factors.insert(rep.scale_factors.end(), ng.scales.begin(), ng.scales.end());
    return rep;
}

// ---------------------------------------------------------------------------
// Classical checks
// ---------------------------------------------------------------------------

namespace {

struct SupAggregate {
    double lower = 0;
    double upper = 0;
};

// p-norm over samples of certified sup brackets for the weights f(T^{an} x)
SupAggregate sup_norm_aggregate(const SystemSpec& system, const ObsPtr& f, std::int64_t a, std::int64_t N, int p,
                                const std::vector<Point>& points, const WWOptions& opts) {
    std::vector<double> lowers, uppers;
    lowers.reserve(points.size());
    uppers.reserve(points.size());
    for (const Point& x : points) {
        WeightedSeq u;
        u.values.resize(static_cast<std::size_t>(N));
        Point cursor = x;
        for (std::int64_t n = 1; n <= N; ++n) {
            cursor = iterate(system, cursor, a);
            u.values[static_cast<std::size_t>(n - 1)] = eval(f, system, cursor);
        }
        SupEstimate est = sup_modulus_tight(u, 0.02, opts.oversample << 8);
        lowers.push_back(est.lower);
        uppers.push_back(est.upper);
    }
    auto pnorm = [&](const std::vector<double>& v) {
        double acc = 0;
        for (double x : v) acc += (p == 1) ? x : x * x;
        acc /= static_cast<double>(v.size());
        return (p == 1) ? acc : std::sqrt(acc);
    };
    return {pnorm(lowers), pnorm(uppers)};
}

bool structurally_real(const ObservableExpr& o) {
    switch (o.kind) {
        case ObsKind::PinskerFn:
        case ObsKind::CenteredCoordinate:
            return true;
        case ObsKind::Constant:
            return o.scalar.imag() == 0.0;
        case ObsKind::Conj:
            return structurally_real(*o.children[0]);
        case ObsKind::Scale:
            return o.scalar.imag() == 0.0 && structurally_real(*o.children[0]);
        case ObsKind::Shift:
            return structurally_real(*o.children[0]);
        case ObsKind::Prod:
        case ObsKind::Sum:
        case ObsKind::Tensor: {
            for (const auto& c : o.children) {
                if (!structurally_real(*c)) return false;
            }
            return true;
        }
        default:
            return false;
    }
}

}  // namespace

CheckReport classical_power_lemma(const SystemSpec& system, const ObsPtr& f, std::int64_t a, std::int64_t N, int p,
                                  const SamplePlan& plan, const WWOptions& opts) {
    if (a == 0) throw std::invalid_argument("the exponent a must be nonzero");
    if (p != 1 && p != 2) throw std::invalid_argument("p must be 1 or 2");
    std::int64_t lo = 0, hi = 0;
    orbit_reach({f, f}, {a, 1}, N, lo, hi);
    auto points = sample_points(system, plan, 0, lo, hi);

    SupAggregate lhs_agg = sup_norm_aggregate(system, f, a, N, p, points, opts);
    SupAggregate rhs_agg = sup_norm_aggregate(system, f, 1, N, p, points, opts);
    const double amag = std::abs(static_cast<double>(a));

    CheckReport rep;
    rep.check = "power-lemma";
    rep.system = system.describe();
    rep.params = json_params({{"a", a}, {"p", p}, {"samples", plan.count}});
    rep.lhs = lhs_agg.upper;
    rep.rhs = amag * rhs_agg.lower;
    rep.constant = amag;
    rep.margin = rep.rhs - rep.lhs;
    rep.bracket_budget = (lhs_agg.upper - lhs_agg.lower) + amag * (rhs_agg.upper - rhs_agg.lower);
    rep.tolerance = rep.bracket_budget + 1e-9 * std::max(rep.lhs, rep.rhs);
    rep.pass = rep.lhs <= rep.rhs + rep.tolerance;
    rep.seed = plan.seed;
    rep.N = N;
    return rep;
}

CheckReport classical_maximal(const SystemSpec& system, const ObsPtr& f, double p, std::int64_t N_max,
                              const SamplePlan& plan) {
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("maximal inequality needs p in (1, infinity)");
    if (!structurally_real(*f)) throw std::invalid_argument("maximal inequality needs a real-valued observable");
    std::int64_t lo = 0, hi = 0;
    orbit_reach({f}, {1}, N_max, lo, hi);
    auto points = sample_points(system, plan, 0, lo, hi);

    double lhs_acc = 0;
    double sampled_fp = 0;
    for (const Point& x : points) {
        Point cursor = x;
        double running = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::int64_t n = 1; n <= N_max; ++n) {
            cursor = iterate(system, cursor, 1);
            running += eval(f, system, cursor).real();
            best = std::max(best, running / static_cast<double>(n));
        }
        lhs_acc += std::pow(std::abs(best), p);
        sampled_fp += std::pow(std::abs(eval(f, system, x).real()), p);
    }
    const double lhs = std::pow(lhs_acc / static_cast<double>(points.size()), 1.0 / p);

    double f_norm;
    bool exact = false;
    if (p == 2.0) {
        try {
            f_norm = std::sqrt(std::abs(exact_integral(prod({f, conj(f)}), system)));
            exact = true;
        } catch (const NoClosedFormError&) {
            f_norm = std::pow(sampled_fp / static_cast<double>(points.size()), 1.0 / p);
        }
    } else {
        f_norm = std::pow(sampled_fp / static_cast<double>(points.size()), 1.0 / p);
    }

    CheckReport rep;
    rep.check = "maximal-inequality";
    rep.system = system.describe();
    rep.params = json_params({{"p", p}, {"N_max", N_max}, {"samples", plan.count}, {"exact_norm", exact}});
    rep.lhs = lhs;
    rep.constant = p / (p - 1.0);
    rep.rhs = rep.constant * f_norm;
    rep.margin = rep.rhs - rep.lhs;
    rep.tolerance = 1e-9 * std::max(rep.lhs, rep.rhs);
    rep.pass = rep.lhs <= rep.rhs + rep.tolerance;
    rep.seed = plan.seed;
    rep.N = N_max;
    return rep;
}

CheckReport classical_holder_avg(const std::vector<double>& values, double p, double q) {
    if (values.empty()) throw std::invalid_argument("need at least one value");
    if (!(0 < p && p <= q)) throw std::invalid_argument("need 0 < p <= q");
    for (double v : values) {
        if (v < 0) throw std::invalid_argument("values must be nonnegative");
    }
    auto mean_pow = [&](double r) {
        double acc = 0;
        for (double v : values) acc += std::pow(v, r);
        return std::pow(acc / static_cast<double>(values.size()), 1.0 / r);
    };
    CheckReport rep;
    rep.check = "holder-on-averages";
    rep.system = "sequence";
    rep.params = json_params({{"p", p}, {"q", q}, {"count", values.size()}});
    rep.lhs = mean_pow(p);
    rep.rhs = mean_pow(q);
    rep.constant = 1.0;
    rep.margin = rep.rhs - rep.lhs;
    rep.tolerance = 1e-9 * std::max(rep.lhs, rep.rhs);
    rep.pass = rep.lhs <= rep.rhs + rep.tolerance;
    rep.N = static_cast<std::int64_t>(values.size());
    return rep;
}

}  // namespace wwkit
