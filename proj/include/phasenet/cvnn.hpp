#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phasenet/loss.hpp"
#include "phasenet/matrix.hpp"

namespace phasenet {

/// Complex-valued MLP. layer_dims = [n+1, h_1, ..., h_L, c]; weights[k] maps
/// layer k to layer k+1, so weights[k] is layer_dims[k+1] x layer_dims[k].
/// The bias enters only as the constant row appended to the input; hidden
/// layers carry no bias of their own.
struct CvnnModel {
    std::vector<std::size_t> layer_dims;
    std::vector<ComplexMatrix> weights;
};

/// Per-layer pre-activations and activations kept for the backward pass.
/// a.back() holds the output probabilities as a zero-imaginary matrix.
struct ForwardCache {
    std::vector<ComplexMatrix> z;
    std::vector<ComplexMatrix> a;
};

/// Loss gradients, one per weight matrix: re = dL/dW^R, im = dL/dW^I.
struct CvnnGradients {
    std::vector<ComplexMatrix> weights;
};

/// ReLU applied to the real and imaginary parts independently.
ComplexMatrix c_relu(const ComplexMatrix& z);

/// Softmax over squared moduli, per column: exp(|z|^2) / sum exp(|z|^2).
/// The per-column max of |z|^2 is subtracted before exponentiation; that is
/// an exact no-op on the quotient and keeps exp() from overflowing.
RealMatrix mod_softmax(const ComplexMatrix& z);

/// Full forward pass; x must already carry the bias row (rows == layer_dims[0]).
ForwardCache forward(const CvnnModel& model, const ComplexMatrix& x);

/// Gradients of cross_entropy(forward(model, x), y) with respect to every
/// real and imaginary weight component. cache must come from forward() on
/// the same model and x.
CvnnGradients backward(const CvnnModel& model, const ForwardCache& cache,
                       const ComplexMatrix& x, const RealMatrix& y);

/// W^R -= lr * dL/dW^R, W^I -= lr * dL/dW^I for every layer.
void sgd_step(CvnnModel& model, const CvnnGradients& grads, double lr);

/// Glorot-style init: each plane i.i.d. uniform on (-a, a) with
/// a = sqrt(6 / (fan_in + fan_out)) / sqrt(2); halving the per-plane variance
/// makes the total complex variance match the real Glorot choice.
CvnnModel init_model(const std::vector<std::size_t>& layer_dims, std::uint64_t seed);

/// Binary checkpoint, format "CVNN1": magic, then layer count and dims as
/// 64-bit little-endian integers, then per layer the re grid followed by the
/// im grid as little-endian 64-bit floats, row-major. Round-trips bit-exactly.
void save_cvnn(const CvnnModel& model, const std::string& path);
CvnnModel load_cvnn(const std::string& path);

} // namespace phasenet
