#include "wwkit/observables.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>

namespace wwkit {

namespace {

constexpr std::size_t kMaxReducedTerms = 1u << 16;

cplx unit_phase(double frac) { return std::polar(1.0, kTwoPi * frac); }

std::shared_ptr<ObservableExpr> make_node(ObsKind kind) {
    auto n = std::make_shared<ObservableExpr>();
    n->kind = kind;
    return n;
}

void span_union(ObservableExpr& node, const ObservableExpr& child) {
    if (!child.reads_word()) return;
    if (!node.reads_word()) {
        node.read_lo = child.read_lo;
        node.read_hi = child.read_hi;
    } else {
        node.read_lo = std::min(node.read_lo, child.read_lo);
        node.read_hi = std::max(node.read_hi, child.read_hi);
    }
}

}  // namespace

ObsPtr torus_character(std::vector<std::int64_t> freq) {
    if (freq.empty()) throw std::invalid_argument("character frequency vector must be nonempty");
    auto n = make_node(ObsKind::TorusCharacter);
    n->freq = std::move(freq);
    n->bound = 1.0;
    return n;
}

ObsPtr pinsker_fn(std::map<std::int64_t, int> cylinder, int cutoff, int level, const Bernoulli& measure) {
    if (cylinder.empty()) throw std::invalid_argument("pinsker_fn needs a nonempty cylinder");
    for (const auto& [idx, sym] : cylinder) {
        if (idx < level) throw std::invalid_argument("cylinder must be measurable on coordinates >= level");
        if (sym < 0 || sym >= measure.alphabet()) throw std::invalid_argument("cylinder symbol outside alphabet");
    }
    auto n = make_node(ObsKind::PinskerFn);
    n->cylinder = std::move(cylinder);
    n->cutoff = cutoff;
    n->level = level;
    n->bound = (cutoff <= level) ? 0.0 : 2.0;
    n->read_lo = n->cylinder.begin()->first;
    n->read_hi = n->cylinder.rbegin()->first;
    return n;
}

ObsPtr centered_coordinate(std::int64_t index, const Bernoulli& measure) {
    auto n = make_node(ObsKind::CenteredCoordinate);
    n->index = index;
    double mean = 0;
    for (int s = 0; s < measure.alphabet(); ++s) mean += s * measure.probs[static_cast<std::size_t>(s)];
    n->mean = mean;
    double amp = 0;
    for (int s = 0; s < measure.alphabet(); ++s) amp = std::max(amp, std::abs(s - mean));
    n->amplitude = amp;
    n->bound = amp;
    n->read_lo = n->read_hi = index;
    return n;
}

ObsPtr constant(cplx value) {
    auto n = make_node(ObsKind::Constant);
    n->scalar = value;
    n->bound = std::abs(value);
    return n;
}

ObsPtr conj(ObsPtr e) {
    if (e->kind == ObsKind::Conj) return e->children[0];
    if (e->kind == ObsKind::Constant) return constant(std::conj(e->scalar));
    auto n = make_node(ObsKind::Conj);
    n->bound = e->bound;
    span_union(*n, *e);
    n->children.push_back(std::move(e));
    return n;
}

ObsPtr prod(std::vector<ObsPtr> children) {
    if (children.empty()) return constant(1.0);
    if (children.size() == 1) return children[0];
    auto n = make_node(ObsKind::Prod);
    n->bound = 1.0;
    for (auto& c : children) {
        n->bound *= c->bound;
        span_union(*n, *c);
    }
    n->children = std::move(children);
    return n;
}

ObsPtr sum(std::vector<ObsPtr> children) {
    if (children.empty()) return constant(0.0);
    if (children.size() == 1) return children[0];
    auto n = make_node(ObsKind::Sum);
    n->bound = 0.0;
    for (auto& c : children) {
        n->bound += c->bound;
        span_union(*n, *c);
    }
    n->children = std::move(children);
    return n;
}

ObsPtr scale(cplx factor, ObsPtr e) {
    if (e->kind == ObsKind::Constant) return constant(factor * e->scalar);
    if (factor == cplx(1.0, 0.0)) return e;
    auto n = make_node(ObsKind::Scale);
    n->scalar = factor;
    n->bound = std::abs(factor) * e->bound;
    span_union(*n, *e);
    n->children.push_back(std::move(e));
    return n;
}

ObsPtr shift_by(std::int64_t m, ObsPtr e) {
    if (m == 0) return e;
    if (e->kind == ObsKind::Constant) return e;
    if (e->kind == ObsKind::Shift) {
        std::int64_t total = m + e->shift;
        return shift_by(total, e->children[0]);
    }
    auto n = make_node(ObsKind::Shift);
    n->shift = m;
    n->bound = e->bound;
    if (e->reads_word()) {
        n->read_lo = e->read_lo + m;
        n->read_hi = e->read_hi + m;
    }
    n->children.push_back(std::move(e));
    return n;
}

ObsPtr tensor(ObsPtr left, ObsPtr right) {
    auto n = make_node(ObsKind::Tensor);
    n->bound = left->bound * right->bound;
    span_union(*n, *left);
    span_union(*n, *right);
    n->children.push_back(std::move(left));
    n->children.push_back(std::move(right));
    return n;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

const TorusPoint& require_torus(const Point& x) {
    if (!x.is_torus()) throw std::invalid_argument("observable needs a torus point");
    return x.torus();
}

const SymbolWord& require_word(const Point& x) {
    if (!x.is_word()) throw std::invalid_argument("observable needs a symbol word");
    return x.word();
}

}  // namespace

cplx eval(const ObservableExpr& o, const SystemSpec& system, const Point& x) {
    switch (o.kind) {
        case ObsKind::Constant:
            return o.scalar;
        case ObsKind::TorusCharacter: {
            const TorusPoint& t = require_torus(x);
            if (o.freq.size() != t.fixed.size()) throw std::invalid_argument("character frequency dim mismatch");
            u128 acc = 0;  // a.x mod 1 in fixed point; wraparound handles signs
            for (std::size_t i = 0; i < o.freq.size(); ++i) {
                acc += static_cast<u128>(static_cast<i128>(o.freq[i])) * t.fixed[i];
            }
            return unit_phase(fixed_to_double(acc));
        }
        case ObsKind::PinskerFn: {
            if (o.bound == 0.0) return 0.0;
            const SymbolWord& w = require_word(x);
            double indicator = 1.0, tail = 1.0, head_weight = 1.0;
            const auto& probs = std::get<Bernoulli>(system.v).probs;
            for (const auto& [idx, sym] : o.cylinder) {
                const bool match = (w.at(idx) == sym);
                if (!match) indicator = 0.0;
                if (idx >= o.cutoff) {
                    if (!match) tail = 0.0;
                } else {
                    head_weight *= probs[static_cast<std::size_t>(sym)];
                }
            }
            return indicator - head_weight * tail;
        }
        case ObsKind::CenteredCoordinate: {
            const SymbolWord& w = require_word(x);
            return static_cast<double>(w.at(o.index)) - o.mean;
        }
        case ObsKind::Conj:
            return std::conj(eval(*o.children[0], system, x));
        case ObsKind::Prod: {
            cplx out = 1.0;
            for (const auto& c : o.children) out *= eval(*c, system, x);
            return out;
        }
        case ObsKind::Sum: {
            cplx out = 0.0;
            for (const auto& c : o.children) out += eval(*c, system, x);
            return out;
        }
        case ObsKind::Scale:
            return o.scalar * eval(*o.children[0], system, x);
        case ObsKind::Shift:
            return eval(*o.children[0], system, iterate(system, x, o.shift));
        case ObsKind::Tensor: {
            if (!system.is_product()) throw std::invalid_argument("tensor observable needs a product system");
            if (!x.is_pair()) throw std::invalid_argument("tensor observable needs a pair point");
            const auto& sys = std::get<ProductSys>(system.v);
            return eval(*o.children[0], *sys.left, *x.pair().left) * eval(*o.children[1], *sys.right, *x.pair().right);
        }
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Cube products
// ---------------------------------------------------------------------------

ObsPtr cube_product_multi(const std::vector<ObsPtr>& vertex_fns, const std::vector<std::int64_t>& h,
                          std::int64_t scale_j) {
    const std::size_t m = h.size();
    if (scale_j < 1) throw std::invalid_argument("cube scale must be >= 1");
    for (std::int64_t hi : h) {
        if (hi < 1) throw std::invalid_argument("cube shifts must be >= 1");
    }
    const std::size_t vertices = std::size_t{1} << m;
    if (vertex_fns.size() != vertices) throw std::invalid_argument("cube needs one observable per vertex");
    std::vector<ObsPtr> factors;
    factors.reserve(vertices);
    for (std::size_t mask = 0; mask < vertices; ++mask) {
        std::int64_t dot = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (mask & (std::size_t{1} << i)) dot += h[i];
        }
        ObsPtr term = shift_by(scale_j * dot, vertex_fns[mask]);
        if (std::popcount(mask) % 2 == 1) term = conj(std::move(term));
        factors.push_back(std::move(term));
    }
    return prod(std::move(factors));
}

ObsPtr cube_product(const ObsPtr& f, const std::vector<std::int64_t>& h, std::int64_t scale_j) {
    if (h.empty()) return f;
    std::vector<ObsPtr> fns(std::size_t{1} << h.size(), f);
    return cube_product_multi(fns, h, scale_j);
}

// ---------------------------------------------------------------------------
// Exact integration
// ---------------------------------------------------------------------------

namespace {

// --- torus: finite trigonometric polynomials -------------------------------

struct TorusPoly {
    std::map<std::vector<std::int64_t>, cplx> terms;
};

void add_term(TorusPoly& p, std::vector<std::int64_t> freq, cplx coeff) {
    auto [it, inserted] = p.terms.emplace(std::move(freq), coeff);
    if (!inserted) it->second += coeff;
    if (p.terms.size() > kMaxReducedTerms) throw NoClosedFormError("expression too large to reduce exactly");
}

// frequency transform and phase of f(T^m x) for a character of frequency a
void shift_character(const SystemSpec& system, const std::vector<std::int64_t>& a, std::int64_t m,
                     std::vector<std::int64_t>& out_freq, cplx& phase) {
    const int dim = system.torus_dim();
    u128 angle = system.is_rotation() ? std::get<Rotation>(system.v).angle_fixed : std::get<Skew>(system.v).angle_fixed;
    std::vector<SignedU128> P(static_cast<std::size_t>(dim) + 1);
    for (int j = 1; j <= dim; ++j) P[static_cast<std::size_t>(j)] = faulhaber_wide(j, m);
    auto poly_i128 = [&](int j) -> i128 {
        const auto& s = P[static_cast<std::size_t>(j)];
        if (s.magnitude > static_cast<u128>(static_cast<i128>(1) << 100)) {
            throw std::overflow_error("shift too large for exact frequency transform");
        }
        i128 v = static_cast<i128>(s.magnitude);
        return s.negative ? -v : v;
    };
    out_freq.assign(static_cast<std::size_t>(dim), 0);
    u128 frac = 0;
    for (int d = 1; d <= dim; ++d) {
        i128 b = a[static_cast<std::size_t>(d - 1)];
        for (int i = d + 1; i <= dim; ++i) b += static_cast<i128>(a[static_cast<std::size_t>(i - 1)]) * poly_i128(i - d);
        if (b > std::numeric_limits<std::int64_t>::max() || b < std::numeric_limits<std::int64_t>::min()) {
            throw std::overflow_error("transformed frequency exceeds 64-bit range");
        }
        out_freq[static_cast<std::size_t>(d - 1)] = static_cast<std::int64_t>(b);
        // phase contribution a_d * P_d(m) * alpha, mod 1 in fixed point
        u128 pa = P[static_cast<std::size_t>(d)].magnitude * angle;
        if (P[static_cast<std::size_t>(d)].negative) pa = static_cast<u128>(0) - pa;
        frac += static_cast<u128>(static_cast<i128>(a[static_cast<std::size_t>(d - 1)])) * pa;
    }
    phase = unit_phase(fixed_to_double(frac));
}

TorusPoly reduce_torus(const ObservableExpr& o, const SystemSpec& system) {
    TorusPoly p;
    const int dim = system.torus_dim();
    switch (o.kind) {
        case ObsKind::Constant:
            if (o.scalar != cplx(0.0, 0.0)) add_term(p, std::vector<std::int64_t>(static_cast<std::size_t>(dim), 0), o.scalar);
            return p;
        case ObsKind::TorusCharacter: {
            if (static_cast<int>(o.freq.size()) != dim) throw std::invalid_argument("character frequency dim mismatch");
            add_term(p, o.freq, 1.0);
            return p;
        }
        case ObsKind::Conj: {
            TorusPoly c = reduce_torus(*o.children[0], system);
            for (const auto& [f, coeff] : c.terms) {
                std::vector<std::int64_t> neg(f.size());
                for (std::size_t i = 0; i < f.size(); ++i) neg[i] = -f[i];
                add_term(p, std::move(neg), std::conj(coeff));
            }
            return p;
        }
        case ObsKind::Scale: {
            TorusPoly c = reduce_torus(*o.children[0], system);
            for (auto& [f, coeff] : c.terms) coeff *= o.scalar;
            return c;
        }
        case ObsKind::Prod: {
            add_term(p, std::vector<std::int64_t>(static_cast<std::size_t>(dim), 0), 1.0);
            for (const auto& child : o.children) {
                TorusPoly c = reduce_torus(*child, system);
                TorusPoly next;
                for (const auto& [fa, ca] : p.terms) {
                    for (const auto& [fb, cb] : c.terms) {
                        std::vector<std::int64_t> f(fa.size());
                        for (std::size_t i = 0; i < fa.size(); ++i) f[i] = fa[i] + fb[i];
                        add_term(next, std::move(f), ca * cb);
                    }
                }
                p = std::move(next);
            }
            return p;
        }
        case ObsKind::Sum: {
            for (const auto& child : o.children) {
                TorusPoly c = reduce_torus(*child, system);
                for (const auto& [f, coeff] : c.terms) add_term(p, f, coeff);
            }
            return p;
        }
        case ObsKind::Shift: {
            TorusPoly c = reduce_torus(*o.children[0], system);
            for (const auto& [f, coeff] : c.terms) {
                std::vector<std::int64_t> nf;
                cplx phase;
                shift_character(system, f, o.shift, nf, phase);
                add_term(p, std::move(nf), coeff * phase);
            }
            return p;
        }
        default:
            throw NoClosedFormError("no closed form: observable does not reduce on a torus system");
    }
}

// --- Bernoulli: cylinder algebra --------------------------------------------

using Cylinder = std::map<std::int64_t, int>;

struct CylinderPoly {
    std::map<Cylinder, cplx> terms;
};

void add_term(CylinderPoly& p, Cylinder cyl, cplx coeff) {
    auto [it, inserted] = p.terms.emplace(std::move(cyl), coeff);
    if (!inserted) it->second += coeff;
    if (p.terms.size() > kMaxReducedTerms) throw NoClosedFormError("expression too large to reduce exactly");
}

// merged cylinder, or nullopt when two factors pin the same coordinate to
// different symbols (the product is then identically zero)
std::optional<Cylinder> merge(const Cylinder& a, const Cylinder& b) {
    Cylinder out = a;
    for (const auto& [idx, sym] : b) {
        auto [it, inserted] = out.emplace(idx, sym);
        if (!inserted && it->second != sym) return std::nullopt;
    }
    return out;
}

CylinderPoly reduce_bernoulli(const ObservableExpr& o, const Bernoulli& measure) {
    CylinderPoly p;
    switch (o.kind) {
        case ObsKind::Constant:
            if (o.scalar != cplx(0.0, 0.0)) add_term(p, {}, o.scalar);
            return p;
        case ObsKind::PinskerFn: {
            if (o.bound == 0.0) return p;
            double head_weight = 1.0;
            Cylinder tail;
            for (const auto& [idx, sym] : o.cylinder) {
                if (idx < o.cutoff) head_weight *= measure.probs[static_cast<std::size_t>(sym)];
                else tail.emplace(idx, sym);
            }
            add_term(p, o.cylinder, 1.0);
            add_term(p, std::move(tail), -head_weight);
            return p;
        }
        case ObsKind::CenteredCoordinate: {
            for (int s = 0; s < measure.alphabet(); ++s) {
                double w = s - o.mean;
                if (w != 0.0) add_term(p, Cylinder{{o.index, s}}, w);
            }
            return p;
        }
        case ObsKind::Conj: {
            CylinderPoly c = reduce_bernoulli(*o.children[0], measure);
            for (auto& [cyl, coeff] : c.terms) coeff = std::conj(coeff);
            return c;
        }
        case ObsKind::Scale: {
            CylinderPoly c = reduce_bernoulli(*o.children[0], measure);
            for (auto& [cyl, coeff] : c.terms) coeff *= o.scalar;
            return c;
        }
        case ObsKind::Prod: {
            add_term(p, {}, 1.0);
            for (const auto& child : o.children) {
                CylinderPoly c = reduce_bernoulli(*child, measure);
                CylinderPoly next;
                for (const auto& [ca, wa] : p.terms) {
                    for (const auto& [cb, wb] : c.terms) {
                        auto merged = merge(ca, cb);
                        if (merged) add_term(next, std::move(*merged), wa * wb);
                    }
                }
                p = std::move(next);
            }
            return p;
        }
        case ObsKind::Sum: {
            for (const auto& child : o.children) {
                CylinderPoly c = reduce_bernoulli(*child, measure);
                for (const auto& [cyl, coeff] : c.terms) add_term(p, cyl, coeff);
            }
            return p;
        }
        case ObsKind::Shift: {
            CylinderPoly c = reduce_bernoulli(*o.children[0], measure);
            for (const auto& [cyl, coeff] : c.terms) {
                Cylinder shifted;
                for (const auto& [idx, sym] : cyl) shifted.emplace(idx + o.shift, sym);
                add_term(p, std::move(shifted), coeff);
            }
            return p;
        }
        default:
            throw NoClosedFormError("no closed form: observable does not reduce on a Bernoulli system");
    }
}

// --- product systems: sums of tensor monomials ------------------------------

struct TensorTerm {
    cplx coeff;
    ObsPtr left;
    ObsPtr right;
};

std::vector<TensorTerm> reduce_product(const ObservableExpr& o) {
    switch (o.kind) {
        case ObsKind::Constant:
            return {{o.scalar, constant(1.0), constant(1.0)}};
        case ObsKind::Tensor:
            return {{cplx(1.0, 0.0), o.children[0], o.children[1]}};
        case ObsKind::Conj: {
            auto terms = reduce_product(*o.children[0]);
            for (auto& t : terms) {
                t.coeff = std::conj(t.coeff);
                t.left = conj(t.left);
                t.right = conj(t.right);
            }
            return terms;
        }
        case ObsKind::Scale: {
            auto terms = reduce_product(*o.children[0]);
            for (auto& t : terms) t.coeff *= o.scalar;
            return terms;
        }
        case ObsKind::Shift: {
            auto terms = reduce_product(*o.children[0]);
            for (auto& t : terms) {
                t.left = shift_by(o.shift, t.left);
                t.right = shift_by(o.shift, t.right);
            }
            return terms;
        }
        case ObsKind::Sum: {
            std::vector<TensorTerm> acc;
            for (const auto& child : o.children) {
                auto terms = reduce_product(*child);
                acc.insert(acc.end(), terms.begin(), terms.end());
            }
            if (acc.size() > kMaxReducedTerms) throw NoClosedFormError("expression too large to reduce exactly");
            return acc;
        }
        case ObsKind::Prod: {
            std::vector<TensorTerm> acc{{cplx(1.0, 0.0), constant(1.0), constant(1.0)}};
            for (const auto& child : o.children) {
                auto terms = reduce_product(*child);
                std::vector<TensorTerm> next;
                next.reserve(acc.size() * terms.size());
                for (const auto& a : acc) {
                    for (const auto& b : terms) {
                        next.push_back({a.coeff * b.coeff, prod({a.left, b.left}), prod({a.right, b.right})});
                    }
                }
                if (next.size() > kMaxReducedTerms) throw NoClosedFormError("expression too large to reduce exactly");
                acc = std::move(next);
            }
            return acc;
        }
        default:
            throw NoClosedFormError("no closed form: observable does not split over the product system");
    }
}

}  // namespace

cplx exact_integral(const ObservableExpr& o, const SystemSpec& system) {
    if (system.is_torus()) {
        TorusPoly p = reduce_torus(o, system);
        std::vector<std::int64_t> zero(static_cast<std::size_t>(system.torus_dim()), 0);
        auto it = p.terms.find(zero);
        return it == p.terms.end() ? cplx(0.0, 0.0) : it->second;
    }
    if (system.is_bernoulli()) {
        const auto& b = std::get<Bernoulli>(system.v);
        CylinderPoly p = reduce_bernoulli(o, b);
        cplx total = 0.0;
        for (const auto& [cyl, coeff] : p.terms) {
            double w = 1.0;
            for (const auto& [idx, sym] : cyl) w *= b.probs[static_cast<std::size_t>(sym)];
            total += coeff * w;
        }
        return total;
    }
    const auto& pr = std::get<ProductSys>(system.v);
    cplx total = 0.0;
    for (const auto& t : reduce_product(o)) {
        total += t.coeff * exact_integral(*t.left, *pr.left) * exact_integral(*t.right, *pr.right);
    }
    return total;
}

}  // namespace wwkit
