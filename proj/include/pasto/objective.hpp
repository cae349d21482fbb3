#pragma once

#include "pasto/types.hpp"

namespace pasto {

// z[primary] minus soft penalties lambda * min(0, z[g] - c)^2. Any violated
// hard barrier (z[g] < c, strict) gives -infinity.
double objective_value(const Objective& obj, const Vector& z);

// Gradient of the soft objective with respect to z. Throws
// NonDifferentiableObjective when a hard barrier is present.
Vector objective_grad(const Objective& obj, const Vector& z);

}  // namespace pasto
