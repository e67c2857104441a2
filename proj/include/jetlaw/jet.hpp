#pragma once

#include "jetlaw/expr.hpp"

#include <memory>
#include <mutex>
#include <string>
#include <utility>

namespace jetlaw {

// An evolution equation in normal form u_t = F, with F a local function of
// x, y, t and the u[i,j]. Prolongations D_x^i D_y^j(F) are cached here since
// every D_t call and the operator scans reuse them heavily.
class EvolutionEquation {
public:
    EvolutionEquation(Expression rhs, std::string label);

    const Expression& rhs() const { return rhs_; }
    const std::string& label() const { return label_; }

    // D_x^i D_y^j (rhs), memoized.
    Expression prolonged_rhs(int i, int j) const;

    EvolutionEquation(const EvolutionEquation&) = delete;
    EvolutionEquation& operator=(const EvolutionEquation&) = delete;

private:
    Expression rhs_;
    std::string label_;
    mutable std::map<std::pair<int, int>, Expression> cache_;
    mutable std::mutex mu_;
};

using EquationPtr = std::shared_ptr<const EvolutionEquation>;

EquationPtr make_equation(Expression rhs, std::string label = "");

// u_t = -(u_xxx + a u_y + f)_x with symbolic or numeric a and either an
// opaque f(u, u_x) (given by name) or a concrete expression in u[0,0], u[1,0].
EquationPtr make_gir(const Expression& a, const Expression& f_of_u_ux,
                     std::string label = "");
EquationPtr make_gir_opaque(const Expression& a, std::string_view f_name,
                            std::string label = "");

// Total derivatives. D_x and D_y are equation-free; D_t substitutes the
// equation's prolonged right-hand sides for the t-derivatives.
Expression total_x(const Expression& e);
Expression total_y(const Expression& e);
Expression total_t(const Expression& e, const EvolutionEquation& eq);

Expression total_x_pow(const Expression& e, int n);
Expression total_y_pow(const Expression& e, int n);

} // namespace jetlaw
