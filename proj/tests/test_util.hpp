#pragma once

// Shared test helpers: seeded random matrices and datasets, IDX byte
// builders with optional gzip, finite-difference gradient checks, and a
// self-cleaning temp directory.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <zlib.h>

#include "phasenet/cvnn.hpp"
#include "phasenet/errors.hpp"
#include "phasenet/loss.hpp"
#include "phasenet/matrix.hpp"
#include "phasenet/mnist.hpp"
#include "phasenet/rng.hpp"
#include "phasenet/rvnn.hpp"

namespace testutil {

using namespace phasenet;

inline RealMatrix random_real(std::size_t rows, std::size_t cols,
                              std::uint64_t seed, double lo = -1.0,
                              double hi = 1.0) {
    RealMatrix m(rows, cols);
    Rng rng(seed);
    for (double& x : m.v) x = rng.uniform(lo, hi);
    return m;
}

inline ComplexMatrix random_complex(std::size_t rows, std::size_t cols,
                                    std::uint64_t seed, double lo = -1.0,
                                    double hi = 1.0) {
    ComplexMatrix m(rows, cols);
    Rng rng(seed);
    for (double& x : m.re.v) x = rng.uniform(lo, hi);
    for (double& x : m.im.v) x = rng.uniform(lo, hi);
    return m;
}

inline RealMatrix one_hot(const std::vector<std::size_t>& labels,
                          std::size_t classes) {
    RealMatrix y(classes, labels.size());
    for (std::size_t j = 0; j < labels.size(); ++j) y(labels[j], j) = 1.0;
    return y;
}

inline RealMatrix random_labels(std::size_t classes, std::size_t cols,
                                std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> labels(cols);
    for (auto& l : labels) l = rng.below(classes);
    return one_hot(labels, classes);
}

// -- losses as plain functions of the weights, for finite differences -------

inline double cvnn_loss(const CvnnModel& model, const ComplexMatrix& x,
                        const RealMatrix& y) {
    return cross_entropy(forward(model, x).a.back().re, y);
}

inline double rvnn_loss(const RvnnModel& model, const RealMatrix& x,
                        const RealMatrix& y) {
    return cross_entropy(r_forward(model, x).a.back(), y);
}

// Smallest |entry| over all cached pre-activations; a value comfortably
// above the finite-difference step means no ReLU gate can flip during the
// central difference, so the loss is smooth where we probe it.
inline double min_preactivation_cvnn(const CvnnModel& model,
                                     const ComplexMatrix& x) {
    const ForwardCache cache = forward(model, x);
    double best = 1e300;
    for (std::size_t k = 0; k + 1 < cache.z.size(); ++k) {
        for (double v : cache.z[k].re.v) best = std::min(best, std::abs(v));
        for (double v : cache.z[k].im.v) best = std::min(best, std::abs(v));
    }
    return best;
}

inline double min_preactivation_rvnn(const RvnnModel& model,
                                     const RealMatrix& x) {
    const RvnnForwardCache cache = r_forward(model, x);
    double best = 1e300;
    for (std::size_t k = 0; k + 1 < cache.z.size(); ++k) {
        for (double v : cache.z[k].v) best = std::min(best, std::abs(v));
    }
    return best;
}

// |analytic - numeric| scaled by max(1, |analytic|, |numeric|), maximized
// over every weight entry. Central differences with the given step.
inline double max_grad_error_cvnn(const CvnnModel& model0,
                                  const ComplexMatrix& x, const RealMatrix& y,
                                  double h) {
    CvnnModel model = model0;
    const CvnnGradients grads = backward(model, forward(model, x), x, y);
    double worst = 0.0;
    const auto probe = [&](double& slot, double analytic) {
        const double saved = slot;
        slot = saved + h;
        const double up = cvnn_loss(model, x, y);
        slot = saved - h;
        const double down = cvnn_loss(model, x, y);
        slot = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double scale =
            std::max({1.0, std::abs(analytic), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
    };
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        for (std::size_t i = 0; i < model.weights[k].re.v.size(); ++i) {
            probe(model.weights[k].re.v[i], grads.weights[k].re.v[i]);
            probe(model.weights[k].im.v[i], grads.weights[k].im.v[i]);
        }
    }
    return worst;
}

inline double max_grad_error_rvnn(const RvnnModel& model0, const RealMatrix& x,
                                  const RealMatrix& y, double h) {
    RvnnModel model = model0;
    const RvnnGradients grads = r_backward(model, r_forward(model, x), x, y);
    double worst = 0.0;
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        for (std::size_t i = 0; i < model.weights[k].v.size(); ++i) {
            double& slot = model.weights[k].v[i];
            const double saved = slot;
            slot = saved + h;
            const double up = rvnn_loss(model, x, y);
            slot = saved - h;
            const double down = rvnn_loss(model, x, y);
            slot = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = grads.weights[k].v[i];
            const double scale =
                std::max({1.0, std::abs(analytic), std::abs(numeric)});
            worst = std::max(worst, std::abs(analytic - numeric) / scale);
        }
    }
    return worst;
}

// -- stacked real decomposition of a complex net -----------------------------

// [re; im] stacked vertically: 2r x c.
inline RealMatrix stack_planes(const ComplexMatrix& m) {
    RealMatrix out(2 * m.rows(), m.cols());
    std::copy(m.re.v.begin(), m.re.v.end(), out.v.begin());
    std::copy(m.im.v.begin(), m.im.v.end(),
              out.v.begin() + static_cast<std::ptrdiff_t>(m.re.v.size()));
    return out;
}

// Real network acting on stacked planes: every complex weight W becomes the
// block matrix [[W^R, -W^I], [W^I, W^R]], so W * (x^R + i x^I) corresponds
// to the block product on [x^R; x^I] and ReLU acts per plane.
inline RvnnModel stacked_real_model(const CvnnModel& model) {
    RvnnModel out;
    for (std::size_t d : model.layer_dims) out.layer_dims.push_back(2 * d);
    for (const ComplexMatrix& w : model.weights) {
        const std::size_t r = w.rows();
        const std::size_t c = w.cols();
        RealMatrix big(2 * r, 2 * c);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                big(i, j) = w.re(i, j);
                big(i, j + c) = -w.im(i, j);
                big(i + r, j) = w.im(i, j);
                big(i + r, j + c) = w.re(i, j);
            }
        }
        out.weights.push_back(std::move(big));
    }
    return out;
}

// -- IDX byte builders -------------------------------------------------------

inline void push_u32_be(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

inline std::vector<unsigned char> idx_images(
    std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
    const std::vector<unsigned char>& pixels) {
    std::vector<unsigned char> out;
    push_u32_be(out, 0x00000803u);
    push_u32_be(out, count);
    push_u32_be(out, rows);
    push_u32_be(out, cols);
    out.insert(out.end(), pixels.begin(), pixels.end());
    return out;
}

inline std::vector<unsigned char> idx_labels(
    const std::vector<unsigned char>& labels) {
    std::vector<unsigned char> out;
    push_u32_be(out, 0x00000801u);
    push_u32_be(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

inline std::vector<unsigned char> gzip_bytes(
    const std::vector<unsigned char>& raw) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK) {
        throw std::runtime_error("deflateInit2 failed");
    }
    std::vector<unsigned char> out(deflateBound(&zs, raw.size()));
    zs.next_in = const_cast<unsigned char*>(raw.data());
    zs.avail_in = static_cast<uInt>(raw.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    if (deflate(&zs, Z_FINISH) != Z_STREAM_END) {
        deflateEnd(&zs);
        throw std::runtime_error("deflate failed");
    }
    out.resize(zs.total_out);
    deflateEnd(&zs);
    return out;
}

inline void write_bytes(const std::filesystem::path& path,
                        const std::vector<unsigned char>& bytes) {
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("cannot write " + path.string());
}

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::uint64_t counter = 0;
        Rng rng(mix_seed(0x7e57d19u, counter++));
        path = std::filesystem::temp_directory_path() /
               ("phasenet_test_" + std::to_string(rng.below(1u << 30)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path.string(); }
};

// -- synthetic datasets ------------------------------------------------------

inline RealMatrix append_bias_row(const RealMatrix& x) {
    RealMatrix out(x.rows + 1, x.cols);
    std::copy(x.v.begin(), x.v.end(), out.v.begin());
    for (std::size_t j = 0; j < x.cols; ++j) out(x.rows, j) = 1.0;
    return out;
}

inline ComplexMatrix append_bias_row(const ComplexMatrix& x) {
    ComplexMatrix out(x.rows() + 1, x.cols());
    std::copy(x.re.v.begin(), x.re.v.end(), out.re.v.begin());
    std::copy(x.im.v.begin(), x.im.v.end(), out.im.v.begin());
    for (std::size_t j = 0; j < x.cols(); ++j) out.re(x.rows(), j) = 1.0;
    return out;
}

// Pixels in [0,1] drawn near one fixed random prototype per class, labels
// cycling through the classes; separable enough that a small net learns it
// in a few hundred steps. noise = 0 gives identical columns per class.
inline std::pair<RealMatrix, RealMatrix> synthetic_raw(
    std::size_t pixels, std::size_t classes, std::size_t count,
    std::uint64_t seed, double noise = 0.05) {
    std::vector<std::vector<double>> proto(classes, std::vector<double>(pixels));
    for (std::size_t c = 0; c < classes; ++c) {
        Rng rng(mix_seed(0xba5e, c));
        for (double& p : proto[c]) p = rng.uniform(0.05, 0.95);
    }
    Rng rng(seed);
    RealMatrix x(pixels, count);
    std::vector<std::size_t> labels(count);
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t c = j % classes;
        labels[j] = c;
        for (std::size_t i = 0; i < pixels; ++i) {
            x(i, j) = std::clamp(proto[c][i] + rng.uniform(-noise, noise), 0.0, 1.0);
        }
    }
    return {std::move(x), one_hot(labels, classes)};
}

inline Dataset synthetic_dataset(Encode enc, Split split, std::size_t pixels,
                                 std::size_t classes, std::size_t count,
                                 std::uint64_t seed, double noise = 0.05) {
    auto [raw, y] = synthetic_raw(pixels, classes, count, seed, noise);
    Dataset d;
    d.split = split;
    d.y = std::move(y);
    if (enc == Encode::Complex) {
        d.x = append_bias_row(phase_encode(raw));
    } else {
        d.x = append_bias_row(raw);
    }
    return d;
}

// Writes a full synthetic MNIST-style directory (both splits, standard
// file names, optionally gzipped) whose pixel bytes follow the same
// per-class prototypes. Returns nothing; read it back with load_mnist.
inline void write_mnist_dir(const std::filesystem::path& dir,
                            std::uint32_t train_n, std::uint32_t test_n,
                            std::uint32_t rows, std::uint32_t cols,
                            std::uint64_t seed, bool gzip = false) {
    const auto emit = [&](const std::string& name, std::uint32_t n,
                          std::uint64_t s) {
        const std::size_t pixels = std::size_t{rows} * cols;
        auto [raw, y] = synthetic_raw(pixels, 10, n, s);
        (void)y;
        std::vector<unsigned char> img_bytes(pixels * n);
        std::vector<unsigned char> lab_bytes(n);
        for (std::uint32_t j = 0; j < n; ++j) {
            lab_bytes[j] = static_cast<unsigned char>(j % 10);
            for (std::size_t i = 0; i < pixels; ++i) {
                img_bytes[std::size_t{j} * pixels + i] =
                    static_cast<unsigned char>(raw(i, j) * 255.0);
            }
        }
        const auto images = idx_images(n, rows, cols, img_bytes);
        const auto labels = idx_labels(lab_bytes);
        const std::string prefix = name == "train" ? "train" : "t10k";
        if (gzip) {
            write_bytes(dir / (prefix + "-images-idx3-ubyte.gz"), gzip_bytes(images));
            write_bytes(dir / (prefix + "-labels-idx1-ubyte.gz"), gzip_bytes(labels));
        } else {
            write_bytes(dir / (prefix + "-images-idx3-ubyte"), images);
            write_bytes(dir / (prefix + "-labels-idx1-ubyte"), labels);
        }
    };
    emit("train", train_n, mix_seed(seed, 1));
    emit("test", test_n, mix_seed(seed, 2));
}

} // namespace testutil
