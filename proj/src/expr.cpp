#include "jetlaw/expr.hpp"

#include <algorithm>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace jetlaw {

// ---------------------------------------------------------------------------
// Function table
// ---------------------------------------------------------------------------

namespace {

struct FnInfo {
    int arity = 0;
    bool deriv_self = false;    // exp
    std::string deriv_alias;    // q' = g style rewrite (arity 1 only)
};

struct FnTable {
    std::unordered_map<std::string, FnInfo> map;
    mutable std::shared_mutex mu;

    FnTable() { map.emplace("exp", FnInfo{1, true, {}}); }
};

FnTable& fn_table() {
    static FnTable t;
    return t;
}

FnInfo fn_info(std::string_view name) {
    auto& t = fn_table();
    std::shared_lock lock(t.mu);
    auto it = t.map.find(std::string(name));
    if (it == t.map.end())
        throw Error("unknown function name '" + std::string(name) + "'");
    return it->second;
}

} // namespace

namespace functions {

void ensure(std::string_view name, int arity) {
    if (arity < 1) throw Error("function '" + std::string(name) + "' must take at least one argument");
    auto& t = fn_table();
    std::unique_lock lock(t.mu);
    auto [it, inserted] = t.map.emplace(std::string(name), FnInfo{arity, false, {}});
    if (!inserted && it->second.arity != arity)
        throw Error("function '" + std::string(name) + "' already declared with arity " +
                    std::to_string(it->second.arity) + ", got " + std::to_string(arity));
}

bool is_declared(std::string_view name) {
    auto& t = fn_table();
    std::shared_lock lock(t.mu);
    return t.map.count(std::string(name)) > 0;
}

int arity_of(std::string_view name) { return fn_info(name).arity; }

void declare_antiderivative(std::string_view name, std::string_view deriv_name) {
    ensure(deriv_name, 1);
    auto& t = fn_table();
    std::unique_lock lock(t.mu);
    auto [it, inserted] = t.map.emplace(std::string(name), FnInfo{1, false, std::string(deriv_name)});
    if (!inserted) {
        if (it->second.arity != 1 || it->second.deriv_self ||
            it->second.deriv_alias != std::string(deriv_name))
            throw Error("function '" + std::string(name) + "' already declared differently");
    }
}

void reset() {
    auto& t = fn_table();
    std::unique_lock lock(t.mu);
    t.map.clear();
    t.map.emplace("exp", FnInfo{1, true, {}});
}

} // namespace functions

// ---------------------------------------------------------------------------
// Generator interning
// ---------------------------------------------------------------------------

bool Generator::structurally_equal(const Generator& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case GenKind::Indep: return indep == o.indep;
        case GenKind::Const: return name == o.name;
        case GenKind::Jet:   return jet_x == o.jet_x && jet_y == o.jet_y;
        case GenKind::Fn:    return name == o.name && deriv == o.deriv && args == o.args;
    }
    return false;
}

namespace {

std::size_t generator_hash(const Generator& g) {
    std::size_t h = static_cast<std::size_t>(g.kind) * 0x9e3779b97f4a7c15ull;
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
    switch (g.kind) {
        case GenKind::Indep: mix(static_cast<std::size_t>(g.indep)); break;
        case GenKind::Const: mix(std::hash<std::string>{}(g.name)); break;
        case GenKind::Jet:   mix(static_cast<std::size_t>(g.jet_x)); mix(static_cast<std::size_t>(g.jet_y)); break;
        case GenKind::Fn:
            mix(std::hash<std::string>{}(g.name));
            for (int d : g.deriv) mix(static_cast<std::size_t>(d));
            for (const auto& a : g.args) mix(a.hash());
            break;
    }
    return h;
}

struct Interner {
    std::unordered_set<Generator, GenHash, GenEq> pool; // node-based: stable addresses
    mutable std::shared_mutex mu;
};

Interner& interner() {
    static Interner i;
    return i;
}

Gen intern(Generator&& g) {
    g.cached_hash = generator_hash(g);
    auto& in = interner();
    {
        std::shared_lock lock(in.mu);
        auto it = in.pool.find(g);
        if (it != in.pool.end()) return &*it;
    }
    std::unique_lock lock(in.mu);
    auto [it, ignored] = in.pool.insert(std::move(g));
    return &*it;
}

} // namespace

Gen indep_var(Indep v) {
    Generator g;
    g.kind = GenKind::Indep;
    g.indep = v;
    return intern(std::move(g));
}

Gen var_x() { return indep_var(Indep::X); }
Gen var_y() { return indep_var(Indep::Y); }
Gen var_t() { return indep_var(Indep::T); }

Gen sym_const(std::string_view name) {
    if (name.empty()) throw Error("empty constant name");
    Generator g;
    g.kind = GenKind::Const;
    g.name = std::string(name);
    return intern(std::move(g));
}

Gen jet(int i, int j) {
    if (i < 0 || j < 0) throw Error("jet variable orders must be nonnegative");
    Generator g;
    g.kind = GenKind::Jet;
    g.jet_x = i;
    g.jet_y = j;
    return intern(std::move(g));
}

Gen fn_atom(std::string_view name, std::vector<int> deriv, std::vector<Expression> args) {
    FnInfo info = fn_info(name);
    if (static_cast<int>(args.size()) != info.arity)
        throw Error("function '" + std::string(name) + "' expects " + std::to_string(info.arity) +
                    " argument(s), got " + std::to_string(args.size()));
    if (deriv.size() != args.size())
        throw Error("derivative index length mismatch for '" + std::string(name) + "'");
    for (int d : deriv)
        if (d < 0) throw Error("negative derivative index for '" + std::string(name) + "'");

    // Derivative rewrites: exp stays exp; antiderivative aliases unwind.
    std::string nm(name);
    while (true) {
        if (info.deriv_self) {
            std::fill(deriv.begin(), deriv.end(), 0);
            break;
        }
        if (!info.deriv_alias.empty() && deriv[0] > 0) {
            --deriv[0];
            nm = info.deriv_alias;
            info = fn_info(nm);
            if (info.arity != 1)
                throw Error("derivative alias '" + nm + "' must have arity 1");
            continue;
        }
        break;
    }

    Generator g;
    g.kind = GenKind::Fn;
    g.name = std::move(nm);
    g.deriv = std::move(deriv);
    g.args = std::move(args);
    return intern(std::move(g));
}

Expression U(int i, int j) { return Expression::from_gen(jet(i, j)); }
Expression C(std::string_view name) { return Expression::from_gen(sym_const(name)); }

Expression fn(std::string_view name, std::vector<Expression> args) {
    if (!functions::is_declared(name)) functions::ensure(name, static_cast<int>(args.size()));
    return Expression::from_gen(fn_atom(name, std::vector<int>(args.size(), 0), std::move(args)));
}

Expression exp_of(const Expression& arg) { return fn("exp", {arg}); }

// ---------------------------------------------------------------------------
// Total order on generators: Indep < Const < Jet (graded by i+j, then by i)
// < Fn (name, derivative index, then arguments).
// ---------------------------------------------------------------------------

namespace {
template <typename T>
int cmp3(const T& a, const T& b) { return a < b ? -1 : (b < a ? 1 : 0); }
} // namespace

int compare(Gen a, Gen b) {
    if (a == b) return 0;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    switch (a->kind) {
        case GenKind::Indep:
            return cmp3(a->indep, b->indep);
        case GenKind::Const:
            return cmp3(a->name, b->name);
        case GenKind::Jet: {
            if (int c = cmp3(a->jet_x + a->jet_y, b->jet_x + b->jet_y)) return c;
            return cmp3(a->jet_x, b->jet_x);
        }
        case GenKind::Fn: {
            if (int c = cmp3(a->name, b->name)) return c;
            if (int c = cmp3(a->deriv.size(), b->deriv.size())) return c;
            for (std::size_t k = 0; k < a->deriv.size(); ++k)
                if (int c = cmp3(a->deriv[k], b->deriv[k])) return c;
            if (int c = cmp3(a->args.size(), b->args.size())) return c;
            for (std::size_t k = 0; k < a->args.size(); ++k)
                if (int c = compare(a->args[k], b->args[k])) return c;
            return 0;
        }
    }
    return 0;
}

int compare(const Monomial& a, const Monomial& b) {
    std::size_t n = std::min(a.factors.size(), b.factors.size());
    for (std::size_t k = 0; k < n; ++k) {
        if (int c = compare(a.factors[k].gen, b.factors[k].gen)) return c;
        if (int c = cmp3(a.factors[k].exp, b.factors[k].exp)) return c;
    }
    return cmp3(a.factors.size(), b.factors.size());
}

int compare(const Expression& a, const Expression& b) {
    std::size_t n = std::min(a.terms().size(), b.terms().size());
    for (std::size_t k = 0; k < n; ++k) {
        if (int c = compare(a.terms()[k].mono, b.terms()[k].mono)) return c;
        if (int c = cmp3(a.terms()[k].coeff, b.terms()[k].coeff)) return c;
    }
    return cmp3(a.terms().size(), b.terms().size());
}

// ---------------------------------------------------------------------------
// Expression arithmetic
// ---------------------------------------------------------------------------

Expression::Expression(const Rational& c) {
    if (c != 0) terms_.push_back(Term{Monomial{}, c});
}

Expression Expression::from_gen(Gen g, std::int32_t exp) {
    if (exp == 0) return Expression(Rational(1));
    if (exp < 0 && g->kind != GenKind::Const)
        throw Error("negative exponent on generator " + g->str() + " (only symbolic constants may carry negative powers)");
    Expression e;
    e.terms_.push_back(Term{Monomial{{Factor{g, exp}}}, Rational(1)});
    return e;
}

Expression Expression::from_terms(std::vector<Term> terms) {
    Expression e;
    e.terms_ = std::move(terms);
    return e;
}

Expression Expression::operator-() const {
    Expression r(*this);
    for (auto& t : r.terms_) t.coeff = -t.coeff;
    return r;
}

Expression Expression::operator+(const Expression& o) const {
    Expression r;
    r.terms_.reserve(terms_.size() + o.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < terms_.size() && j < o.terms_.size()) {
        int c = compare(terms_[i].mono, o.terms_[j].mono);
        if (c > 0) {
            r.terms_.push_back(terms_[i++]);
        } else if (c < 0) {
            r.terms_.push_back(o.terms_[j++]);
        } else {
            Rational s = terms_[i].coeff + o.terms_[j].coeff;
            if (s != 0) r.terms_.push_back(Term{terms_[i].mono, std::move(s)});
            ++i; ++j;
        }
    }
    for (; i < terms_.size(); ++i) r.terms_.push_back(terms_[i]);
    for (; j < o.terms_.size(); ++j) r.terms_.push_back(o.terms_[j]);
    return r;
}

Expression Expression::operator-(const Expression& o) const { return *this + (-o); }

namespace {

Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.factors.reserve(a.factors.size() + b.factors.size());
    std::size_t i = 0, j = 0;
    while (i < a.factors.size() && j < b.factors.size()) {
        int c = compare(a.factors[i].gen, b.factors[j].gen);
        if (c < 0) {
            r.factors.push_back(a.factors[i++]);
        } else if (c > 0) {
            r.factors.push_back(b.factors[j++]);
        } else {
            std::int32_t e = a.factors[i].exp + b.factors[j].exp;
            if (e != 0) r.factors.push_back(Factor{a.factors[i].gen, e});
            ++i; ++j;
        }
    }
    for (; i < a.factors.size(); ++i) r.factors.push_back(a.factors[i]);
    for (; j < b.factors.size(); ++j) r.factors.push_back(b.factors[j]);
    return r;
}

} // namespace

Expression Expression::operator*(const Expression& o) const {
    if (is_zero() || o.is_zero()) return Expression();
    ExprBuilder b;
    b.add_product(*this, o);
    return b.take();
}

Expression& Expression::operator+=(const Expression& o) { *this = *this + o; return *this; }
Expression& Expression::operator-=(const Expression& o) { *this = *this - o; return *this; }
Expression& Expression::operator*=(const Expression& o) { *this = *this * o; return *this; }

Expression Expression::inverse() const {
    if (terms_.size() != 1)
        throw Error("cannot invert '" + str() + "': not a single monomial");
    const Term& t = terms_[0];
    Monomial m;
    for (const auto& f : t.mono.factors) {
        if (f.gen->kind != GenKind::Const)
            throw Error("cannot invert '" + str() + "': generator " + f.gen->str() +
                        " is not a symbolic constant");
        m.factors.push_back(Factor{f.gen, -f.exp});
    }
    Expression r;
    r.terms_.push_back(Term{std::move(m), Rational(1) / t.coeff});
    return r;
}

Expression Expression::pow(int n) const {
    if (n == 0) return Expression(Rational(1));
    Expression base = n < 0 ? inverse() : *this;
    unsigned k = n < 0 ? static_cast<unsigned>(-(long)n) : static_cast<unsigned>(n);
    Expression acc(Rational(1));
    while (k) {
        if (k & 1u) acc *= base;
        if (k >>= 1) base *= base;
    }
    return acc;
}

Expression Expression::divide_by(const Expression& divisor) const {
    return *this * divisor.inverse();
}

std::size_t Expression::hash() const {
    std::size_t h = 0x2545f4914f6cdd1dull;
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
    for (const auto& t : terms_) {
        for (const auto& f : t.mono.factors) {
            mix(f.gen->cached_hash);
            mix(static_cast<std::size_t>(static_cast<std::uint32_t>(f.exp)));
        }
        mix(hash_value(t.coeff));
        mix(0xabcd);
    }
    return h;
}

std::optional<std::pair<Rational, Gen>> Expression::as_scaled_generator() const {
    if (terms_.size() != 1) return std::nullopt;
    const Term& t = terms_[0];
    if (t.mono.factors.size() != 1 || t.mono.factors[0].exp != 1) return std::nullopt;
    return std::make_pair(t.coeff, t.mono.factors[0].gen);
}

std::optional<Rational> Expression::as_rational() const {
    if (terms_.empty()) return Rational(0);
    if (terms_.size() == 1 && terms_[0].mono.empty()) return terms_[0].coeff;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// ExprBuilder
// ---------------------------------------------------------------------------

void ExprBuilder::add(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = acc_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) acc_.erase(it);
    }
}

void ExprBuilder::add(const Expression& e) {
    for (const auto& t : e.terms()) add(t.mono, t.coeff);
}

void ExprBuilder::add_scaled(const Expression& e, const Rational& c) {
    if (c == 0) return;
    for (const auto& t : e.terms()) add(t.mono, t.coeff * c);
}

void ExprBuilder::add_product(const Expression& a, const Expression& b) {
    for (const auto& ta : a.terms())
        for (const auto& tb : b.terms())
            add(mono_mul(ta.mono, tb.mono), ta.coeff * tb.coeff);
}

Expression ExprBuilder::take() {
    std::vector<Term> terms;
    terms.reserve(acc_.size());
    for (auto& [m, c] : acc_) terms.push_back(Term{m, std::move(c)});
    acc_.clear();
    return Expression::from_terms(std::move(terms));
}

// ---------------------------------------------------------------------------
// pdiff and substitution
// ---------------------------------------------------------------------------

namespace {

// Shared skeleton for derivations (pdiff, total derivatives): linear, Leibniz
// over monomial factors, chain rule through FnAtom arguments.
template <typename BaseRule>
Expression derive_impl(const Expression& e, const BaseRule& rule);

template <typename BaseRule>
Expression derive_generator(Gen g, const BaseRule& rule) {
    if (auto d = rule(g)) return *d;
    if (g->kind == GenKind::Fn) {
        ExprBuilder b;
        for (std::size_t k = 0; k < g->args.size(); ++k) {
            Expression da = derive_impl(g->args[k], rule);
            if (da.is_zero()) continue;
            std::vector<int> bumped = g->deriv;
            ++bumped[k];
            Gen dg = fn_atom(g->name, std::move(bumped), g->args);
            b.add_product(Expression::from_gen(dg), da);
        }
        return b.take();
    }
    return Expression();
}

template <typename BaseRule>
Expression derive_impl(const Expression& e, const BaseRule& rule) {
    ExprBuilder out;
    std::unordered_map<Gen, Expression> dcache;
    for (const auto& t : e.terms()) {
        for (std::size_t k = 0; k < t.mono.factors.size(); ++k) {
            const Factor& f = t.mono.factors[k];
            auto it = dcache.find(f.gen);
            if (it == dcache.end())
                it = dcache.emplace(f.gen, derive_generator(f.gen, rule)).first;
            const Expression& dg = it->second;
            if (dg.is_zero()) continue;

            // c * n * g^(n-1) * (other factors) * dg
            Monomial rest;
            rest.factors.reserve(t.mono.factors.size());
            for (std::size_t m = 0; m < t.mono.factors.size(); ++m) {
                if (m == k) {
                    if (f.exp != 1) rest.factors.push_back(Factor{f.gen, f.exp - 1});
                } else {
                    rest.factors.push_back(t.mono.factors[m]);
                }
            }
            Rational c = t.coeff * f.exp;
            for (const auto& dt : dg.terms())
                out.add(mono_mul(rest, dt.mono), c * dt.coeff);
        }
    }
    return out.take();
}

} // namespace

Expression pdiff(const Expression& e, Gen g) {
    auto rule = [g](Gen h) -> std::optional<Expression> {
        if (h == g) return Expression(Rational(1));
        if (h->kind == GenKind::Fn) return std::nullopt; // chain rule through arguments
        return Expression();
    };
    return derive_impl(e, rule);
}

namespace detail {

Expression derive_with_rule(const Expression& e,
                            const std::function<std::optional<Expression>(Gen)>& rule) {
    return derive_impl(e, rule);
}

} // namespace detail

namespace {

Expression substitute_impl(const Expression& e, const GenMap& map) {
    ExprBuilder out;
    for (const auto& t : e.terms()) {
        Expression term(t.coeff);
        for (const auto& f : t.mono.factors) {
            Gen g = f.gen;
            auto it = map.find(g);
            if (it == map.end() && g->kind == GenKind::Fn) {
                // Rewrite arguments, then give the rebuilt atom a chance to match.
                std::vector<Expression> new_args;
                new_args.reserve(g->args.size());
                bool changed = false;
                for (const auto& a : g->args) {
                    Expression na = substitute_impl(a, map);
                    if (!(na == a)) changed = true;
                    new_args.push_back(std::move(na));
                }
                if (changed) g = fn_atom(g->name, g->deriv, std::move(new_args));
                it = map.find(g);
            }
            if (it == map.end()) {
                term *= Expression::from_gen(g, f.exp);
            } else {
                term *= it->second.pow(f.exp); // pow() rejects negative powers of non-constants
            }
            if (term.is_zero()) break;
        }
        out.add(term);
    }
    return out.take();
}

} // namespace

Expression substitute(const Expression& e, const GenMap& map) {
    return substitute_impl(e, map);
}

Expression substitute_fn_zero(const Expression& e, std::string_view name) {
    ExprBuilder out;
    for (const auto& t : e.terms()) {
        Expression term(t.coeff);
        bool dead = false;
        for (const auto& f : t.mono.factors) {
            Gen g = f.gen;
            if (g->kind == GenKind::Fn) {
                if (g->name == name) { dead = true; break; }
                std::vector<Expression> na;
                na.reserve(g->args.size());
                bool changed = false;
                for (const auto& a : g->args) {
                    Expression sa = substitute_fn_zero(a, name);
                    if (!(sa == a)) changed = true;
                    na.push_back(std::move(sa));
                }
                if (changed) g = fn_atom(g->name, g->deriv, std::move(na));
            }
            term *= Expression::from_gen(g, f.exp);
        }
        if (!dead) out.add(term);
    }
    return out.take();
}

bool is_zero(const Expression& e) { return e.is_zero(); }

namespace {

void collect_jets_impl(const Expression& e, std::set<Gen>& out) {
    for (const auto& t : e.terms())
        for (const auto& f : t.mono.factors) {
            if (f.gen->kind == GenKind::Jet) out.insert(f.gen);
            else if (f.gen->kind == GenKind::Fn)
                for (const auto& a : f.gen->args) collect_jets_impl(a, out);
        }
}

} // namespace

std::set<Gen> collect_jets(const Expression& e) {
    std::set<Gen> out;
    collect_jets_impl(e, out);
    return out;
}

bool contains_generator(const Expression& e, Gen g) {
    for (const auto& t : e.terms())
        for (const auto& f : t.mono.factors) {
            if (f.gen == g) return true;
            if (f.gen->kind == GenKind::Fn)
                for (const auto& a : f.gen->args)
                    if (contains_generator(a, g)) return true;
        }
    return false;
}

// ---------------------------------------------------------------------------
// Printing (the canonical text form; the DSL parser reads this back).
// ---------------------------------------------------------------------------

std::string Generator::str() const {
    switch (kind) {
        case GenKind::Indep:
            return indep == Indep::X ? "x" : (indep == Indep::Y ? "y" : "t");
        case GenKind::Const:
            return name;
        case GenKind::Jet: {
            std::ostringstream os;
            os << "u[" << jet_x << "," << jet_y << "]";
            return os.str();
        }
        case GenKind::Fn: {
            std::ostringstream os;
            bool plain = std::all_of(deriv.begin(), deriv.end(), [](int d) { return d == 0; });
            if (plain) {
                os << name;
            } else {
                os << "d(" << name << ";";
                for (std::size_t k = 0; k < deriv.size(); ++k) {
                    if (k) os << ",";
                    os << deriv[k];
                }
                os << ")";
            }
            os << "(";
            for (std::size_t k = 0; k < args.size(); ++k) {
                if (k) os << ",";
                os << args[k].str();
            }
            os << ")";
            return os.str();
        }
    }
    return "?";
}

namespace {

std::string rational_str(const Rational& r) {
    std::ostringstream os;
    os << numerator(r);
    if (denominator(r) != 1) os << "/" << denominator(r);
    return os.str();
}

std::string term_str(const Term& t) {
    Rational c = t.coeff < 0 ? -t.coeff : t.coeff;
    std::ostringstream os;
    bool need_star = false;
    if (c != 1 || t.mono.empty()) {
        os << rational_str(c);
        need_star = true;
    }
    for (const auto& f : t.mono.factors) {
        if (need_star) os << "*";
        os << f.gen->str();
        if (f.exp != 1) os << "^" << f.exp;
        need_star = true;
    }
    return os.str();
}

} // namespace

std::string Expression::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const Term& t = terms_[k];
        if (k == 0) {
            if (t.coeff < 0) os << "-";
        } else {
            os << (t.coeff < 0 ? " - " : " + ");
        }
        os << term_str(t);
    }
    return os.str();
}

} // namespace jetlaw
