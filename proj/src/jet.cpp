#include "jetlaw/jet.hpp"

#include <functional>

namespace jetlaw {

EvolutionEquation::EvolutionEquation(Expression rhs, std::string label)
    : rhs_(std::move(rhs)), label_(std::move(label)) {}

Expression EvolutionEquation::prolonged_rhs(int i, int j) const {
    if (i < 0 || j < 0) throw Error("prolongation orders must be nonnegative");
    std::lock_guard lock(mu_);
    auto key = std::make_pair(i, j);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    // Walk down to the nearest cached ancestor along (i,0...),(i,j).
    std::function<const Expression&(int, int)> get = [&](int a, int b) -> const Expression& {
        auto k = std::make_pair(a, b);
        if (auto it = cache_.find(k); it != cache_.end()) return it->second;
        Expression val;
        if (a == 0 && b == 0) val = rhs_;
        else if (b > 0) val = total_y(get(a, b - 1));
        else val = total_x(get(a - 1, 0));
        return cache_.emplace(k, std::move(val)).first->second;
    };
    return get(i, j);
}

EquationPtr make_equation(Expression rhs, std::string label) {
    return std::make_shared<const EvolutionEquation>(std::move(rhs), std::move(label));
}

EquationPtr make_gir(const Expression& a, const Expression& f_of_u_ux, std::string label) {
    Expression inner = U(3, 0) + a * U(0, 1) + f_of_u_ux;
    Expression rhs = -total_x(inner);
    if (label.empty()) label = "gir";
    return make_equation(std::move(rhs), std::move(label));
}

EquationPtr make_gir_opaque(const Expression& a, std::string_view f_name, std::string label) {
    functions::ensure(f_name, 2);
    return make_gir(a, fn(f_name, {U(0, 0), U(1, 0)}), std::move(label));
}

Expression total_x(const Expression& e) {
    static const Gen gx = var_x();
    auto rule = [](Gen g) -> std::optional<Expression> {
        switch (g->kind) {
            case GenKind::Indep:
                return g == gx ? Expression(Rational(1)) : Expression();
            case GenKind::Const: return Expression();
            case GenKind::Jet:   return U(g->jet_x + 1, g->jet_y);
            case GenKind::Fn:    return std::nullopt;
        }
        return Expression();
    };
    return detail::derive_with_rule(e, rule);
}

Expression total_y(const Expression& e) {
    static const Gen gy = var_y();
    auto rule = [](Gen g) -> std::optional<Expression> {
        switch (g->kind) {
            case GenKind::Indep:
                return g == gy ? Expression(Rational(1)) : Expression();
            case GenKind::Const: return Expression();
            case GenKind::Jet:   return U(g->jet_x, g->jet_y + 1);
            case GenKind::Fn:    return std::nullopt;
        }
        return Expression();
    };
    return detail::derive_with_rule(e, rule);
}

Expression total_t(const Expression& e, const EvolutionEquation& eq) {
    Expression out = pdiff(e, var_t());
    for (Gen g : collect_jets(e)) {
        Expression de = pdiff(e, g);
        if (de.is_zero()) continue;
        out += eq.prolonged_rhs(g->jet_x, g->jet_y) * de;
    }
    return out;
}

Expression total_x_pow(const Expression& e, int n) {
    Expression r = e;
    for (int k = 0; k < n; ++k) r = total_x(r);
    return r;
}

Expression total_y_pow(const Expression& e, int n) {
    Expression r = e;
    for (int k = 0; k < n; ++k) r = total_y(r);
    return r;
}

} // namespace jetlaw
