#include "phasenet/loss.hpp"

#include <algorithm>
#include <cmath>

#include "phasenet/errors.hpp"

namespace phasenet {

double cross_entropy(const RealMatrix& probs, const RealMatrix& y) {
    if (!probs.same_shape(y)) {
        throw shape_error("cross_entropy: shape mismatch");
    }
    if (probs.cols == 0) {
        throw shape_error("cross_entropy: empty batch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        for (std::size_t j = 0; j < probs.cols; ++j) {
            const double yij = y(i, j);
            if (yij != 0.0) {
                total -= yij * std::log(std::max(probs(i, j), 1e-15));
            }
        }
    }
    return total / static_cast<double>(probs.cols);
}

} // namespace phasenet
