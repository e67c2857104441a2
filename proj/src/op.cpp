#include "jetlaw/op.hpp"

#include <sstream>

namespace jetlaw {

DiffOperator DiffOperator::identity() { return term(0, 0, Expression(1)); }
DiffOperator DiffOperator::dx(int n) { return term(n, 0, Expression(1)); }
DiffOperator DiffOperator::dy(int n) { return term(0, n, Expression(1)); }

DiffOperator DiffOperator::term(int i, int j, Expression coeff) {
    DiffOperator L;
    L.add_term(i, j, coeff);
    return L;
}

DiffOperator& DiffOperator::add_term(int i, int j, const Expression& coeff) {
    if (i < 0 || j < 0) throw Error("operator orders must be nonnegative");
    if (coeff.is_zero()) return *this;
    OpKey k{i, j};
    auto [it, inserted] = c_.try_emplace(k, coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second.is_zero()) c_.erase(it);
    }
    return *this;
}

Expression DiffOperator::coeff(int i, int j) const {
    auto it = c_.find(OpKey{i, j});
    return it == c_.end() ? Expression() : it->second;
}

DiffOperator DiffOperator::operator+(const DiffOperator& o) const {
    DiffOperator r(*this);
    for (const auto& [k, h] : o.c_) r.add_term(k.i, k.j, h);
    return r;
}

DiffOperator DiffOperator::operator-() const {
    DiffOperator r;
    for (const auto& [k, h] : c_) r.c_.emplace(k, -h);
    return r;
}

DiffOperator DiffOperator::operator-(const DiffOperator& o) const { return *this + (-o); }

std::optional<OpKey> DiffOperator::top_key() const {
    if (c_.empty()) return std::nullopt;
    return c_.rbegin()->first;
}

std::string DiffOperator::str() const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
        if (!first) os << " + ";
        first = false;
        os << "(" << it->second.str() << ")";
        if (it->first.i > 0) {
            os << "*Dx";
            if (it->first.i > 1) os << "^" << it->first.i;
        }
        if (it->first.j > 0) {
            os << "*Dy";
            if (it->first.j > 1) os << "^" << it->first.j;
        }
        if (it->first.i == 0 && it->first.j == 0) os << "*Id";
    }
    return os.str();
}

Expression apply(const DiffOperator& L, const Expression& e) {
    // Group by j so repeated D_y prefixes are shared.
    Expression out;
    std::map<int, Expression> ypow; // j -> D_y^j(e)
    for (const auto& [k, h] : L.coeffs()) {
        auto it = ypow.find(k.j);
        if (it == ypow.end()) {
            int best = -1;
            for (auto& [jj, v] : ypow)
                if (jj < k.j && jj > best) best = jj;
            Expression base = best >= 0 ? ypow[best] : e;
            for (int s = (best >= 0 ? best : 0); s < k.j; ++s) base = total_y(base);
            it = ypow.emplace(k.j, std::move(base)).first;
        }
        out += h * total_x_pow(it->second, k.i);
    }
    return out;
}

namespace {

Rational binom(int n, int k) {
    Rational r(1);
    for (int s = 0; s < k; ++s) r = r * (n - s) / (s + 1);
    return r;
}

} // namespace

DiffOperator compose(const DiffOperator& L1, const DiffOperator& L2) {
    DiffOperator out;
    for (const auto& [k1, h1] : L1.coeffs()) {
        // Precompute D_x^m D_y^n of each L2 coefficient lazily per (k2).
        for (const auto& [k2, h2] : L2.coeffs()) {
            std::vector<Expression> yrow(k1.j + 1);
            yrow[0] = h2;
            for (int n = 1; n <= k1.j; ++n) yrow[n] = total_y(yrow[n - 1]);
            for (int n = 0; n <= k1.j; ++n) {
                Expression cur = yrow[n];
                for (int m = 0; m <= k1.i; ++m) {
                    if (!cur.is_zero()) {
                        Rational c = binom(k1.i, m) * binom(k1.j, n);
                        out.add_term(k1.i - m + k2.i, k1.j - n + k2.j, h1 * (c * cur));
                    }
                    if (m < k1.i) cur = total_x(cur);
                }
            }
        }
    }
    return out;
}

DiffOperator adjoint(const DiffOperator& L) {
    DiffOperator out;
    for (const auto& [k, h] : L.coeffs()) {
        int sign = ((k.i + k.j) % 2 == 0) ? 1 : -1;
        std::vector<Expression> yrow(k.j + 1);
        yrow[0] = h;
        for (int n = 1; n <= k.j; ++n) yrow[n] = total_y(yrow[n - 1]);
        for (int n = 0; n <= k.j; ++n) {
            Expression cur = yrow[n];
            for (int m = 0; m <= k.i; ++m) {
                if (!cur.is_zero()) {
                    Rational c = binom(k.i, m) * binom(k.j, n) * sign;
                    out.add_term(k.i - m, k.j - n, c * cur);
                }
                if (m < k.i) cur = total_x(cur);
            }
        }
    }
    return out;
}

DiffOperator dt_op(const DiffOperator& L, const EvolutionEquation& eq) {
    DiffOperator out;
    for (const auto& [k, h] : L.coeffs()) out.add_term(k.i, k.j, total_t(h, eq));
    return out;
}

std::pair<std::optional<int>, std::optional<int>> deg(const DiffOperator& L) {
    if (L.is_zero()) return {std::nullopt, std::nullopt};
    int dx = 0, dy = 0;
    for (const auto& [k, h] : L.coeffs()) {
        dx = std::max(dx, k.i);
        dy = std::max(dy, k.j);
    }
    return {dx, dy};
}

} // namespace jetlaw
