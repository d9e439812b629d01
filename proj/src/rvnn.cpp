#include "phasenet/rvnn.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "phasenet/errors.hpp"
#include "phasenet/rng.hpp"

namespace phasenet {

namespace {

double relu_gate(double v) {
    if (v > 0.0) return 1.0;
    if (v < 0.0) return 0.0;
    return 0.5;
}

} // namespace

RealMatrix relu(const RealMatrix& z) {
    RealMatrix out(z.rows, z.cols);
    for (std::size_t i = 0; i < z.v.size(); ++i) {
        out.v[i] = z.v[i] > 0.0 ? z.v[i] : 0.0;
    }
    return out;
}

RealMatrix softmax(const RealMatrix& z) {
    if (z.rows == 0 || z.cols == 0) {
        throw shape_error("softmax: empty input");
    }
    RealMatrix out = z;
    std::vector<double> col_max(z.cols, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < z.rows; ++i) {
        const double* r = out.row(i);
        for (std::size_t j = 0; j < z.cols; ++j) {
            if (r[j] > col_max[j]) col_max[j] = r[j];
        }
    }
    std::vector<double> col_sum(z.cols, 0.0);
    for (std::size_t i = 0; i < z.rows; ++i) {
        double* r = out.row(i);
        for (std::size_t j = 0; j < z.cols; ++j) {
            r[j] = std::exp(r[j] - col_max[j]);
            col_sum[j] += r[j];
        }
    }
    for (std::size_t i = 0; i < z.rows; ++i) {
        double* r = out.row(i);
        for (std::size_t j = 0; j < z.cols; ++j) {
            r[j] /= col_sum[j];
        }
    }
    return out;
}

RvnnForwardCache r_forward(const RvnnModel& model, const RealMatrix& x) {
    if (model.weights.empty()) {
        throw shape_error("r_forward: model has no weights");
    }
    if (x.rows != model.layer_dims.front()) {
        throw shape_error("r_forward: input rows do not match model input dim");
    }
    const std::size_t layers = model.weights.size();
    RvnnForwardCache cache;
    cache.z.reserve(layers);
    cache.a.reserve(layers);
    const RealMatrix* cur = &x;
    for (std::size_t k = 0; k < layers; ++k) {
        cache.z.push_back(matmul(model.weights[k], *cur));
        if (k + 1 < layers) {
            cache.a.push_back(relu(cache.z.back()));
        } else {
            cache.a.push_back(softmax(cache.z.back()));
        }
        cur = &cache.a.back();
    }
    return cache;
}

RvnnGradients r_backward(const RvnnModel& model, const RvnnForwardCache& cache,
                         const RealMatrix& x, const RealMatrix& y) {
    const std::size_t layers = model.weights.size();
    if (layers == 0) {
        throw shape_error("r_backward: model has no weights");
    }
    if (cache.z.size() != layers || cache.a.size() != layers) {
        throw shape_error("r_backward: cache does not match model depth");
    }
    const RealMatrix& probs = cache.a.back();
    if (!probs.same_shape(y)) {
        throw shape_error("r_backward: label shape does not match output");
    }

    const double m = static_cast<double>(y.cols);
    RvnnGradients grads;
    grads.weights.resize(layers);

    RealMatrix delta(probs.rows, probs.cols);
    for (std::size_t i = 0; i < delta.v.size(); ++i) {
        delta.v[i] = (probs.v[i] - y.v[i]) / m;
    }

    for (std::size_t k = layers; k-- > 0;) {
        const RealMatrix& input = (k == 0) ? x : cache.a[k - 1];
        grads.weights[k] = matmul(delta, transpose(input));
        if (k == 0) break;

        RealMatrix da = matmul(transpose(model.weights[k]), delta);
        const RealMatrix& z_prev = cache.z[k - 1];
        for (std::size_t i = 0; i < da.v.size(); ++i) {
            da.v[i] *= relu_gate(z_prev.v[i]);
        }
        delta = std::move(da);
    }
    return grads;
}

void r_sgd_step(RvnnModel& model, const RvnnGradients& grads, double lr) {
    if (grads.weights.size() != model.weights.size()) {
        throw shape_error("r_sgd_step: gradient count does not match model");
    }
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        RealMatrix& w = model.weights[k];
        const RealMatrix& g = grads.weights[k];
        if (!w.same_shape(g)) {
            throw shape_error("r_sgd_step: gradient shape does not match weight");
        }
        for (std::size_t i = 0; i < w.v.size(); ++i) {
            w.v[i] -= lr * g.v[i];
        }
    }
}

RvnnModel r_init_model(const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
    if (layer_dims.size() < 2) {
        throw shape_error("r_init_model: need at least input and output dims");
    }
    for (std::size_t d : layer_dims) {
        if (d == 0) throw shape_error("r_init_model: layer dim must be positive");
    }
    RvnnModel model;
    model.layer_dims = layer_dims;
    Rng rng(seed);
    for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
        const double fan = static_cast<double>(layer_dims[k] + layer_dims[k + 1]);
        const double a = std::sqrt(6.0 / fan);
        RealMatrix w(layer_dims[k + 1], layer_dims[k]);
        for (double& v : w.v) v = rng.uniform(-a, a);
        model.weights.push_back(std::move(w));
    }
    return model;
}

} // namespace phasenet
