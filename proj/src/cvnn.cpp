#include "phasenet/cvnn.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "phasenet/errors.hpp"
#include "phasenet/rng.hpp"

namespace phasenet {

namespace {

// Subgradient of ReLU; 1/2 at exactly zero so the two one-sided limits
// average out.
double relu_gate(double v) {
    if (v > 0.0) return 1.0;
    if (v < 0.0) return 0.0;
    return 0.5;
}

} // namespace

ComplexMatrix c_relu(const ComplexMatrix& z) {
    ComplexMatrix out(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.re.v.size(); ++i) {
        const double r = z.re.v[i];
        const double m = z.im.v[i];
        out.re.v[i] = r > 0.0 ? r : 0.0;
        out.im.v[i] = m > 0.0 ? m : 0.0;
    }
    return out;
}

RealMatrix mod_softmax(const ComplexMatrix& z) {
    if (z.rows() == 0 || z.cols() == 0) {
        throw shape_error("mod_softmax: empty input");
    }
    const std::size_t rows = z.rows();
    const std::size_t cols = z.cols();
    RealMatrix out(rows, cols);
    for (std::size_t i = 0; i < out.v.size(); ++i) {
        out.v[i] = z.re.v[i] * z.re.v[i] + z.im.v[i] * z.im.v[i];
    }
    std::vector<double> col_max(cols, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < rows; ++i) {
        const double* r = out.row(i);
        for (std::size_t j = 0; j < cols; ++j) {
            if (r[j] > col_max[j]) col_max[j] = r[j];
        }
    }
    std::vector<double> col_sum(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double* r = out.row(i);
        for (std::size_t j = 0; j < cols; ++j) {
            r[j] = std::exp(r[j] - col_max[j]);
            col_sum[j] += r[j];
        }
    }
    for (std::size_t i = 0; i < rows; ++i) {
        double* r = out.row(i);
        for (std::size_t j = 0; j < cols; ++j) {
            r[j] /= col_sum[j];
        }
    }
    return out;
}

ForwardCache forward(const CvnnModel& model, const ComplexMatrix& x) {
    if (model.weights.empty()) {
        throw shape_error("forward: model has no weights");
    }
    if (x.rows() != model.layer_dims.front()) {
        throw shape_error("forward: input rows do not match model input dim");
    }
    const std::size_t layers = model.weights.size();
    ForwardCache cache;
    cache.z.reserve(layers);
    cache.a.reserve(layers);
    const ComplexMatrix* cur = &x;
    for (std::size_t k = 0; k < layers; ++k) {
        cache.z.push_back(cmul(model.weights[k], *cur));
        if (k + 1 < layers) {
            cache.a.push_back(c_relu(cache.z.back()));
        } else {
            const std::size_t r = cache.z.back().rows();
            const std::size_t c = cache.z.back().cols();
            cache.a.emplace_back(mod_softmax(cache.z.back()), RealMatrix(r, c));
        }
        cur = &cache.a.back();
    }
    return cache;
}

CvnnGradients backward(const CvnnModel& model, const ForwardCache& cache,
                       const ComplexMatrix& x, const RealMatrix& y) {
    const std::size_t layers = model.weights.size();
    if (layers == 0) {
        throw shape_error("backward: model has no weights");
    }
    if (cache.z.size() != layers || cache.a.size() != layers) {
        throw shape_error("backward: cache does not match model depth");
    }
    const RealMatrix& probs = cache.a.back().re;
    if (!probs.same_shape(y)) {
        throw shape_error("backward: label shape does not match output");
    }

    const double m = static_cast<double>(y.cols);
    CvnnGradients grads;
    grads.weights.resize(layers);

    // dL/dZ at the output: the softmax/cross-entropy pair collapses to
    // (probs - y)/m per squared modulus, and the modulus contributes 2*Z
    // per plane.
    const ComplexMatrix& z_out = cache.z.back();
    ComplexMatrix delta(z_out.rows(), z_out.cols());
    for (std::size_t i = 0; i < delta.re.v.size(); ++i) {
        const double g = (probs.v[i] - y.v[i]) / m;
        delta.re.v[i] = g * (2.0 * z_out.re.v[i]);
        delta.im.v[i] = g * (2.0 * z_out.im.v[i]);
    }

    for (std::size_t k = layers; k-- > 0;) {
        const ComplexMatrix& input = (k == 0) ? x : cache.a[k - 1];
        const RealMatrix in_re_t = transpose(input.re);
        const RealMatrix in_im_t = transpose(input.im);
        grads.weights[k] = ComplexMatrix(
            add(matmul(delta.re, in_re_t), matmul(delta.im, in_im_t)),
            sub(matmul(delta.im, in_re_t), matmul(delta.re, in_im_t)));
        if (k == 0) break;

        const RealMatrix w_re_t = transpose(model.weights[k].re);
        const RealMatrix w_im_t = transpose(model.weights[k].im);
        const RealMatrix da_re =
            add(matmul(w_re_t, delta.re), matmul(w_im_t, delta.im));
        const RealMatrix da_im =
            sub(matmul(w_re_t, delta.im), matmul(w_im_t, delta.re));

        const ComplexMatrix& z_prev = cache.z[k - 1];
        ComplexMatrix next(da_re.rows, da_re.cols);
        for (std::size_t i = 0; i < next.re.v.size(); ++i) {
            next.re.v[i] = da_re.v[i] * relu_gate(z_prev.re.v[i]);
            next.im.v[i] = da_im.v[i] * relu_gate(z_prev.im.v[i]);
        }
        delta = std::move(next);
    }
    return grads;
}

void sgd_step(CvnnModel& model, const CvnnGradients& grads, double lr) {
    if (grads.weights.size() != model.weights.size()) {
        throw shape_error("sgd_step: gradient count does not match model");
    }
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        ComplexMatrix& w = model.weights[k];
        const ComplexMatrix& g = grads.weights[k];
        if (!w.re.same_shape(g.re)) {
            throw shape_error("sgd_step: gradient shape does not match weight");
        }
        for (std::size_t i = 0; i < w.re.v.size(); ++i) {
            w.re.v[i] -= lr * g.re.v[i];
            w.im.v[i] -= lr * g.im.v[i];
        }
    }
}

CvnnModel init_model(const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
    if (layer_dims.size() < 2) {
        throw shape_error("init_model: need at least input and output dims");
    }
    for (std::size_t d : layer_dims) {
        if (d == 0) throw shape_error("init_model: layer dim must be positive");
    }
    CvnnModel model;
    model.layer_dims = layer_dims;
    Rng rng(seed);
    for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
        const double fan = static_cast<double>(layer_dims[k] + layer_dims[k + 1]);
        const double a = std::sqrt(6.0 / fan) / std::sqrt(2.0);
        ComplexMatrix w(layer_dims[k + 1], layer_dims[k]);
        for (double& v : w.re.v) v = rng.uniform(-a, a);
        for (double& v : w.im.v) v = rng.uniform(-a, a);
        model.weights.push_back(std::move(w));
    }
    return model;
}

} // namespace phasenet
