#pragma once

#include "phasenet/matrix.hpp"

namespace phasenet {

/// Mean cross-entropy over the columns of a probability matrix:
/// (1/m) * sum_j -sum_i y(i,j) * log(probs(i,j)).
/// The log argument is clamped at 1e-15 so a model that assigns ~0
/// probability to the true class yields a large finite loss, not -inf.
double cross_entropy(const RealMatrix& probs, const RealMatrix& y);

} // namespace phasenet
