#pragma once

#include "jetlaw/op.hpp"

namespace jetlaw {

// Variational derivative: sum over the jets of e of
// (-1)^(i+j) D_x^i D_y^j (de/du[i,j]). Annihilates total divergences.
Expression euler(const Expression& e);

// Linearization D_h = sum dh/du[i,j] D_x^i D_y^j.
DiffOperator frechet(const Expression& h);

} // namespace jetlaw
