#include "phasenet/mnist.hpp"

#include <cmath>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <utility>

#include <zlib.h>

#include "phasenet/errors.hpp"

namespace phasenet {

namespace {

std::uint32_t read_u32_be(const unsigned char* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) |
           (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) |
           static_cast<std::uint32_t>(p[3]);
}

std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    in.seekg(0, std::ios::end);
    const std::streamoff sz = in.tellg();
    if (sz < 0) throw data_error("cannot read " + path);
    std::vector<unsigned char> buf(static_cast<std::size_t>(sz));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(buf.data()), sz);
    if (!in) throw data_error("failed reading " + path);
    return buf;
}

std::vector<unsigned char> gunzip(const std::vector<unsigned char>& in,
                                  const std::string& name) {
    z_stream strm{};
    // 15 window bits, +32 enables automatic gzip/zlib header detection.
    if (inflateInit2(&strm, 15 + 32) != Z_OK) {
        throw data_error("zlib init failed for " + name);
    }
    std::vector<unsigned char> out;
    out.resize(in.size() * 4 + (1u << 20));
    strm.next_in = const_cast<unsigned char*>(in.data());
    strm.avail_in = static_cast<uInt>(in.size());
    std::size_t written = 0;
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        if (written == out.size()) out.resize(out.size() * 2);
        strm.next_out = out.data() + written;
        strm.avail_out = static_cast<uInt>(out.size() - written);
        rc = inflate(&strm, Z_NO_FLUSH);
        written = out.size() - strm.avail_out;
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            throw data_error("corrupt gzip stream in " + name);
        }
    }
    const bool leftover = strm.avail_in != 0;
    inflateEnd(&strm);
    if (leftover) throw data_error("trailing bytes after gzip stream in " + name);
    out.resize(written);
    return out;
}

bool file_exists(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return static_cast<bool>(in);
}

IdxData load_idx_file(const std::string& dir, const std::string& name) {
    const std::string plain = dir + "/" + name;
    std::string path = plain;
    if (!file_exists(path)) path = plain + ".gz";
    if (!file_exists(path)) {
        throw data_error("missing file: " + plain + " (or .gz)");
    }
    const std::vector<unsigned char> bytes = read_maybe_gzip(path);
    try {
        return parse_idx(bytes);
    } catch (const data_error& e) {
        throw data_error(path + ": " + e.what());
    }
}

// Shared by phase_encode and the bulk loader so both use the exact same
// floating-point expressions.
std::pair<double, double> phase_point(double x) {
    const double angle = std::numbers::pi * x;
    return {x * std::cos(angle), x * std::sin(angle)};
}

RealMatrix one_hot_labels(const IdxData& labels, const std::string& what) {
    const std::size_t m = labels.payload.size();
    RealMatrix y(10, m);
    for (std::size_t j = 0; j < m; ++j) {
        const unsigned char v = labels.payload[j];
        if (v > 9) {
            throw data_error(what + ": label value " + std::to_string(int(v)) +
                             " out of range 0..9");
        }
        y(v, j) = 1.0;
    }
    return y;
}

} // namespace

std::vector<unsigned char> read_maybe_gzip(const std::string& path) {
    std::vector<unsigned char> bytes = read_file_bytes(path);
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) {
        return gunzip(bytes, path);
    }
    return bytes;
}

IdxData parse_idx(std::span<const unsigned char> bytes) {
    if (bytes.size() < 4) {
        throw data_error("truncated IDX header: no room for magic");
    }
    const std::uint32_t magic = read_u32_be(bytes.data());
    std::size_t ndim = 0;
    if (magic == 0x00000803u) {
        ndim = 3;
    } else if (magic == 0x00000801u) {
        ndim = 1;
    } else {
        throw data_error("bad IDX magic");
    }
    const std::size_t header = 4 + 4 * ndim;
    if (bytes.size() < header) {
        throw data_error("truncated IDX header: missing dimension sizes");
    }
    IdxData out;
    out.dims.resize(ndim);
    std::uint64_t product = 1;
    for (std::size_t d = 0; d < ndim; ++d) {
        out.dims[d] = read_u32_be(bytes.data() + 4 + 4 * d);
        if (out.dims[d] != 0 && product > (1ull << 40) / out.dims[d]) {
            throw data_error("IDX dimension overflow");
        }
        product *= out.dims[d];
    }
    const std::size_t payload = bytes.size() - header;
    if (payload < product) {
        throw data_error("truncated IDX payload: have " +
                         std::to_string(payload) + " bytes, need " +
                         std::to_string(product));
    }
    if (payload > product) {
        throw data_error("trailing bytes after IDX payload");
    }
    out.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header),
                       bytes.end());
    return out;
}

ComplexMatrix phase_encode(const RealMatrix& pixels) {
    ComplexMatrix out(pixels.rows, pixels.cols);
    for (std::size_t i = 0; i < pixels.v.size(); ++i) {
        const double x = pixels.v[i];
        if (!(x >= 0.0 && x <= 1.0)) {
            throw data_error("phase_encode: pixel value outside [0,1]");
        }
        const auto [re, im] = phase_point(x);
        out.re.v[i] = re;
        out.im.v[i] = im;
    }
    return out;
}

const RealMatrix& Dataset::real_x() const {
    if (!std::holds_alternative<RealMatrix>(x)) {
        throw shape_error("dataset holds complex inputs, real requested");
    }
    return std::get<RealMatrix>(x);
}

const ComplexMatrix& Dataset::complex_x() const {
    if (!std::holds_alternative<ComplexMatrix>(x)) {
        throw shape_error("dataset holds real inputs, complex requested");
    }
    return std::get<ComplexMatrix>(x);
}

Dataset load_mnist(const std::string& dir, Split split, Encode encode) {
    const bool train = split == Split::Train;
    const IdxData images =
        load_idx_file(dir, train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte");
    const IdxData labels =
        load_idx_file(dir, train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte");

    const std::size_t m = images.dims[0];
    const std::size_t n =
        static_cast<std::size_t>(images.dims[1]) * images.dims[2];
    if (m == 0 || n == 0) throw data_error("empty image file");
    if (labels.dims[0] != m) {
        throw data_error("image/label count mismatch: " + std::to_string(m) +
                         " images vs " + std::to_string(labels.dims[0]) +
                         " labels");
    }

    Dataset out;
    out.split = split;
    out.y = one_hot_labels(labels, train ? "train labels" : "test labels");

    if (encode == Encode::Real) {
        RealMatrix x(n + 1, m);
        for (std::size_t j = 0; j < m; ++j) {
            const unsigned char* img = images.payload.data() + j * n;
            for (std::size_t r = 0; r < n; ++r) {
                x(r, j) = static_cast<double>(img[r]) / 255.0;
            }
            x(n, j) = 1.0;
        }
        out.x = std::move(x);
    } else {
        ComplexMatrix x(n + 1, m);
        for (std::size_t j = 0; j < m; ++j) {
            const unsigned char* img = images.payload.data() + j * n;
            for (std::size_t r = 0; r < n; ++r) {
                const double p = static_cast<double>(img[r]) / 255.0;
                const auto [re, im] = phase_point(p);
                x.re(r, j) = re;
                x.im(r, j) = im;
            }
            x.re(n, j) = 1.0;
            x.im(n, j) = 0.0;
        }
        out.x = std::move(x);
    }
    return out;
}

} // namespace phasenet
