#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "phasenet/matrix.hpp"

namespace phasenet {

enum class Split { Train, Test };
enum class Encode { Real, Complex };

/// Decoded IDX container: dimension sizes plus the raw unsigned-byte payload.
struct IdxData {
    std::vector<std::uint32_t> dims;
    std::vector<unsigned char> payload;
};

/// Parses an IDX blob. Accepts exactly the two MNIST magics: 0x00000803
/// (image files, 3 dims) and 0x00000801 (label files, 1 dim); header and
/// dims are big-endian 32-bit. Throws data_error with a distinct message
/// for bad magic, truncated input, dimension overflow, and trailing bytes.
IdxData parse_idx(std::span<const unsigned char> bytes);

/// Reads a file, transparently inflating it when it starts with the gzip
/// magic bytes 1f 8b.
std::vector<unsigned char> read_maybe_gzip(const std::string& path);

/// x -> x * e^{i*pi*x} elementwise: re = x*cos(pi*x), im = x*sin(pi*x).
/// The modulus of every encoded value equals the input value, so the
/// encoding adds phase without adding magnitude information.
/// Inputs outside [0,1] are rejected.
ComplexMatrix phase_encode(const RealMatrix& pixels);

/// One split of MNIST ready for training: x is (n+1) x m with a constant
/// row of ones appended after encoding (1+0i in the complex case), y is
/// 10 x m one-hot.
struct Dataset {
    std::variant<RealMatrix, ComplexMatrix> x;
    RealMatrix y;
    Split split = Split::Train;

    const RealMatrix& real_x() const;
    const ComplexMatrix& complex_x() const;
    std::size_t samples() const { return y.cols; }
};

/// Loads one MNIST split from dir. Expects the standard file names
/// (train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-...), each
/// optionally with a .gz suffix. Pixels are scaled by 1/255 and
/// phase-encoded iff encode == Complex.
Dataset load_mnist(const std::string& dir, Split split, Encode encode);

} // namespace phasenet
