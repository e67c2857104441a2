#pragma once

#include "jetlaw/jet.hpp"

#include <map>
#include <optional>

namespace jetlaw {

// Key of a D_x^i D_y^j monomial; ordered graded-lex on (i+j, i), the order
// the elimination scan walks.
struct OpKey {
    int i = 0;
    int j = 0;

    bool operator==(const OpKey& o) const { return i == o.i && j == o.j; }
};

struct OpKeyLess {
    bool operator()(const OpKey& a, const OpKey& b) const {
        if (a.i + a.j != b.i + b.j) return a.i + a.j < b.i + b.j;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    }
};

// A finite linear differential operator sum h_ij D_x^i D_y^j in standard
// form (all derivatives to the right of coefficients). Zero coefficients are
// never stored.
class DiffOperator {
public:
    using CoeffMap = std::map<OpKey, Expression, OpKeyLess>;

    DiffOperator() = default;

    static DiffOperator zero() { return {}; }
    static DiffOperator identity();
    static DiffOperator dx(int n = 1);
    static DiffOperator dy(int n = 1);
    static DiffOperator term(int i, int j, Expression coeff);

    DiffOperator& add_term(int i, int j, const Expression& coeff);
    const CoeffMap& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    Expression coeff(int i, int j) const;

    DiffOperator operator+(const DiffOperator& o) const;
    DiffOperator operator-(const DiffOperator& o) const;
    DiffOperator operator-() const;
    bool operator==(const DiffOperator& o) const { return c_ == o.c_; }
    bool operator!=(const DiffOperator& o) const { return !(*this == o); }

    // Highest key in graded-lex order, if any.
    std::optional<OpKey> top_key() const;

    std::string str() const;

private:
    CoeffMap c_;
};

// Sum of h_ij D_x^i D_y^j (e).
Expression apply(const DiffOperator& L, const Expression& e);

// Operator composition L1 after L2, renormalized to standard form via the
// Leibniz expansion of D_x^i D_y^j past coefficients.
DiffOperator compose(const DiffOperator& L1, const DiffOperator& L2);

// Formal adjoint: sum (-D_x)^i (-D_y)^j o h_ij, expanded to standard form.
DiffOperator adjoint(const DiffOperator& L);

// Coefficient-wise D_t.
DiffOperator dt_op(const DiffOperator& L, const EvolutionEquation& eq);

// (deg_x, deg_y); nullopt encodes -infinity for the zero operator.
std::pair<std::optional<int>, std::optional<int>> deg(const DiffOperator& L);

} // namespace jetlaw
