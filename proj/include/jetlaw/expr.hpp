#pragma once

#include "jetlaw/error.hpp"
#include "jetlaw/rational.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace jetlaw {

class Generator;

// Generators are interned: one immutable node per distinct generator, so
// equality is pointer equality and structural ordering only walks on ties.
using Gen = const Generator*;

enum class GenKind : std::uint8_t { Indep = 0, Const = 1, Jet = 2, Fn = 3 };
enum class Indep : std::uint8_t { X = 0, Y = 1, T = 2 };

// ---------------------------------------------------------------------------
// Expression: canonical sum of monomials with rational coefficients.
// Monomials are sorted factor lists; terms are sorted by a fixed total order
// on monomials (descending), zero coefficients never stored.
// ---------------------------------------------------------------------------

struct Factor {
    Gen gen;
    std::int32_t exp;

    bool operator==(const Factor& o) const { return gen == o.gen && exp == o.exp; }
};

struct Monomial {
    std::vector<Factor> factors; // sorted ascending by generator order, exp != 0

    bool operator==(const Monomial& o) const { return factors == o.factors; }
    bool empty() const { return factors.empty(); }
};

int compare(Gen a, Gen b);
int compare(const Monomial& a, const Monomial& b);

struct Term {
    Monomial mono;
    Rational coeff;

    bool operator==(const Term& o) const { return coeff == o.coeff && mono == o.mono; }
};

class Expression {
public:
    Expression() = default; // zero
    Expression(const Rational& c);
    Expression(long n) : Expression(Rational(n)) {}
    Expression(int n) : Expression(Rational(n)) {}

    static Expression from_gen(Gen g, std::int32_t exp = 1);
    static Expression from_terms(std::vector<Term> terms); // assumes canonical

    bool is_zero() const { return terms_.empty(); }
    const std::vector<Term>& terms() const { return terms_; }

    Expression operator-() const;
    Expression operator+(const Expression& o) const;
    Expression operator-(const Expression& o) const;
    Expression operator*(const Expression& o) const;
    Expression& operator+=(const Expression& o);
    Expression& operator-=(const Expression& o);
    Expression& operator*=(const Expression& o);

    // Integer powers. Negative powers require an invertible argument: a
    // single monomial whose generators are all symbolic constants.
    Expression pow(int n) const;
    Expression inverse() const;
    Expression divide_by(const Expression& divisor) const;

    bool operator==(const Expression& o) const { return terms_ == o.terms_; }
    bool operator!=(const Expression& o) const { return !(*this == o); }

    std::size_t hash() const;
    std::string str() const;

    // True if this is a single monomial c * g and returns (c, g).
    std::optional<std::pair<Rational, Gen>> as_scaled_generator() const;
    std::optional<Rational> as_rational() const;

private:
    std::vector<Term> terms_;
};

int compare(const Expression& a, const Expression& b);

inline Expression operator*(const Rational& c, const Expression& e) { return Expression(c) * e; }

// ---------------------------------------------------------------------------
// Generator node. Built only through the interning factories below.
// ---------------------------------------------------------------------------

class Generator {
public:
    GenKind kind;
    Indep indep{};                 // Indep
    std::string name;              // Const and Fn
    int jet_x = 0, jet_y = 0;      // Jet
    std::vector<int> deriv;        // Fn: partial-derivative multi-index
    std::vector<Expression> args;  // Fn: canonical argument expressions
    std::size_t cached_hash = 0;

    bool structurally_equal(const Generator& o) const;
    std::string str() const;
};

struct GenHash {
    std::size_t operator()(const Generator& g) const { return g.cached_hash; }
};
struct GenEq {
    bool operator()(const Generator& a, const Generator& b) const {
        return a.structurally_equal(b);
    }
};

// Interned factories (thread-safe).
Gen var_x();
Gen var_y();
Gen var_t();
Gen indep_var(Indep v);
Gen sym_const(std::string_view name);
Gen jet(int i, int j);
Gen fn_atom(std::string_view name, std::vector<int> deriv, std::vector<Expression> args);

// Convenience: u[i,j], named constants and undifferentiated atoms as Expressions.
Expression U(int i, int j);
Expression C(std::string_view name);
Expression fn(std::string_view name, std::vector<Expression> args);
Expression exp_of(const Expression& arg);

// ---------------------------------------------------------------------------
// Function declarations: fixed arity per name, plus derivative rewrites
// (exp' = exp; antiderivative pairs such as q' = g).
// ---------------------------------------------------------------------------

namespace functions {

// Registers name with the given arity, or checks it if already known.
void ensure(std::string_view name, int arity);
bool is_declared(std::string_view name);
int arity_of(std::string_view name);

// Declares `name` (arity 1) whose derivative is the atom `deriv_name`
// applied to the same argument.
void declare_antiderivative(std::string_view name, std::string_view deriv_name);

// Drops every declaration except the built-in exp. Intended for test setup;
// not safe concurrently with expression construction.
void reset();

} // namespace functions

// ---------------------------------------------------------------------------
// Kernel operations.
// ---------------------------------------------------------------------------

// Exact partial derivative by a generator. Chain rule through FnAtom
// arguments; a FnAtom used as the differentiation variable is treated as an
// independent generator.
Expression pdiff(const Expression& e, Gen g);

namespace detail {
// Derivation skeleton: rule(g) gives the derivative of a generator, nullopt
// requests the chain rule through FnAtom arguments. Used by the total
// derivatives; pdiff is the same skeleton with a Kronecker rule.
Expression derive_with_rule(const Expression& e,
                            const std::function<std::optional<Expression>(Gen)>& rule);
} // namespace detail

// Simultaneous exact-generator substitution. Keys match interned generators
// after their own arguments have been substituted; FnAtom arguments are
// rewritten recursively. Raising a replacement to a negative power requires
// it to be invertible (throws otherwise, e.g. a jet variable).
using GenMap = std::map<Gen, Expression>;
Expression substitute(const Expression& e, const GenMap& map);

// Sets the function `name` identically to zero: every atom with that name,
// of any derivative index, vanishes.
Expression substitute_fn_zero(const Expression& e, std::string_view name);

bool is_zero(const Expression& e);

// All jet variables occurring in e, including inside FnAtom arguments.
std::set<Gen> collect_jets(const Expression& e);
bool contains_generator(const Expression& e, Gen g);

// Accumulator used by the heavier producers (products, derivations,
// operator composition) to avoid repeated sorted merges.
class ExprBuilder {
public:
    void add(const Monomial& m, const Rational& c);
    void add(const Expression& e);
    void add_scaled(const Expression& e, const Rational& c);
    void add_product(const Expression& a, const Expression& b);
    Expression take();

private:
    struct MonoGreater {
        bool operator()(const Monomial& a, const Monomial& b) const {
            return compare(a, b) > 0;
        }
    };
    std::map<Monomial, Rational, MonoGreater> acc_;
};

} // namespace jetlaw
