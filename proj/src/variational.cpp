#include "jetlaw/variational.hpp"

namespace jetlaw {

Expression euler(const Expression& e) {
    Expression out;
    for (Gen g : collect_jets(e)) {
        Expression de = pdiff(e, g);
        if (de.is_zero()) continue;
        Expression term = total_x_pow(total_y_pow(de, g->jet_y), g->jet_x);
        if ((g->jet_x + g->jet_y) % 2 == 0) out += term;
        else out -= term;
    }
    return out;
}

DiffOperator frechet(const Expression& h) {
    DiffOperator L;
    for (Gen g : collect_jets(h)) L.add_term(g->jet_x, g->jet_y, pdiff(h, g));
    return L;
}

} // namespace jetlaw
