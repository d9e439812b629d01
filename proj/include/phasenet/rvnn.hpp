#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phasenet/matrix.hpp"

namespace phasenet {

/// Real-valued MLP with the same layout conventions as CvnnModel: bias only
/// as a constant input row, weights[k] is layer_dims[k+1] x layer_dims[k].
struct RvnnModel {
    std::vector<std::size_t> layer_dims;
    std::vector<RealMatrix> weights;
};

struct RvnnForwardCache {
    std::vector<RealMatrix> z;
    std::vector<RealMatrix> a; // a.back() holds the output probabilities
};

struct RvnnGradients {
    std::vector<RealMatrix> weights;
};

RealMatrix relu(const RealMatrix& z);

/// Column-wise softmax with the per-column max subtracted before exp.
RealMatrix softmax(const RealMatrix& z);

RvnnForwardCache r_forward(const RvnnModel& model, const RealMatrix& x);

/// Gradients of cross_entropy(r_forward(model, x), y) w.r.t. every weight.
RvnnGradients r_backward(const RvnnModel& model, const RvnnForwardCache& cache,
                         const RealMatrix& x, const RealMatrix& y);

void r_sgd_step(RvnnModel& model, const RvnnGradients& grads, double lr);

/// Glorot init: i.i.d. uniform on (-a, a) with a = sqrt(6 / (fan_in + fan_out)).
RvnnModel r_init_model(const std::vector<std::size_t>& layer_dims, std::uint64_t seed);

/// Binary checkpoint, format "RVNN1": same layout as "CVNN1" with a single
/// grid per layer.
void save_rvnn(const RvnnModel& model, const std::string& path);
RvnnModel load_rvnn(const std::string& path);

} // namespace phasenet
