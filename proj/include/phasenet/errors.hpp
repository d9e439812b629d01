#pragma once

#include <stdexcept>
#include <string>

namespace phasenet {

// Dimension disagreement between operands (matmul, add, forward, ...).
struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed or missing input data (IDX files, checkpoints, CSV).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid experiment configuration or config file.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace phasenet
