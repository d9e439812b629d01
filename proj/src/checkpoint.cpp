#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "phasenet/cvnn.hpp"
#include "phasenet/errors.hpp"
#include "phasenet/rvnn.hpp"

namespace phasenet {

namespace {

void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void append_f64_le(std::string& out, double d) {
    append_u64_le(out, std::bit_cast<std::uint64_t>(d));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    in.seekg(0, std::ios::end);
    const std::streamoff sz = in.tellg();
    if (sz < 0) throw data_error("cannot read " + path);
    std::string buf(static_cast<std::size_t>(sz), '\0');
    in.seekg(0);
    in.read(buf.data(), sz);
    if (!in) throw data_error("failed reading " + path);
    return buf;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot open " + path + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw data_error("failed writing " + path);
}

struct Cursor {
    const std::string& buf;
    const std::string& path;
    std::size_t off = 0;

    void need(std::size_t k, const char* what) {
        if (buf.size() - off < k) {
            throw data_error(path + ": truncated checkpoint (" + what + ")");
        }
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(
                     static_cast<unsigned char>(buf[off + i]))
                 << (8 * i);
        }
        off += 8;
        return v;
    }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
    void finish() {
        if (off != buf.size()) {
            throw data_error(path + ": trailing bytes after checkpoint payload");
        }
    }
};

// Dim caps keep rows*cols*8 far from size_t overflow and reject corrupt
// headers before any allocation happens.
std::vector<std::size_t> read_header(Cursor& cur, const char* magic) {
    cur.need(5, "magic");
    if (std::memcmp(cur.buf.data(), magic, 5) != 0) {
        throw data_error(cur.path + ": not a " + magic + " checkpoint");
    }
    cur.off = 5;
    const std::uint64_t layers = cur.u64("layer count");
    if (layers == 0) throw data_error(cur.path + ": checkpoint has no layers");
    if (layers > (1u << 20)) {
        throw data_error(cur.path + ": implausible layer count");
    }
    std::vector<std::size_t> dims(static_cast<std::size_t>(layers) + 1);
    for (std::size_t& d : dims) {
        const std::uint64_t v = cur.u64("layer dim");
        if (v == 0) throw data_error(cur.path + ": zero layer dim");
        if (v > (1u << 30)) throw data_error(cur.path + ": implausible layer dim");
        d = static_cast<std::size_t>(v);
    }
    return dims;
}

RealMatrix read_grid(Cursor& cur, std::size_t rows, std::size_t cols) {
    cur.need(rows * cols * 8, "weight grid");
    RealMatrix m(rows, cols);
    for (double& v : m.v) v = cur.f64("weight");
    return m;
}

void check_shapes(bool ok, const char* fn) {
    if (!ok) throw shape_error(std::string(fn) + ": model dims and weights disagree");
}

} // namespace

void save_cvnn(const CvnnModel& model, const std::string& path) {
    check_shapes(!model.weights.empty() &&
                     model.layer_dims.size() == model.weights.size() + 1,
                 "save_cvnn");
    std::string out("CVNN1");
    append_u64_le(out, model.weights.size());
    for (std::size_t d : model.layer_dims) append_u64_le(out, d);
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        const ComplexMatrix& w = model.weights[k];
        check_shapes(w.rows() == model.layer_dims[k + 1] &&
                         w.cols() == model.layer_dims[k],
                     "save_cvnn");
        for (double v : w.re.v) append_f64_le(out, v);
        for (double v : w.im.v) append_f64_le(out, v);
    }
    write_file(path, out);
}

CvnnModel load_cvnn(const std::string& path) {
    const std::string buf = read_file(path);
    Cursor cur{buf, path};
    CvnnModel model;
    model.layer_dims = read_header(cur, "CVNN1");
    for (std::size_t k = 0; k + 1 < model.layer_dims.size(); ++k) {
        const std::size_t rows = model.layer_dims[k + 1];
        const std::size_t cols = model.layer_dims[k];
        RealMatrix re = read_grid(cur, rows, cols);
        RealMatrix im = read_grid(cur, rows, cols);
        model.weights.emplace_back(std::move(re), std::move(im));
    }
    cur.finish();
    return model;
}

void save_rvnn(const RvnnModel& model, const std::string& path) {
    check_shapes(!model.weights.empty() &&
                     model.layer_dims.size() == model.weights.size() + 1,
                 "save_rvnn");
    std::string out("RVNN1");
    append_u64_le(out, model.weights.size());
    for (std::size_t d : model.layer_dims) append_u64_le(out, d);
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        const RealMatrix& w = model.weights[k];
        check_shapes(w.rows == model.layer_dims[k + 1] &&
                         w.cols == model.layer_dims[k],
                     "save_rvnn");
        for (double v : w.v) append_f64_le(out, v);
    }
    write_file(path, out);
}

RvnnModel load_rvnn(const std::string& path) {
    const std::string buf = read_file(path);
    Cursor cur{buf, path};
    RvnnModel model;
    model.layer_dims = read_header(cur, "RVNN1");
    for (std::size_t k = 0; k + 1 < model.layer_dims.size(); ++k) {
        model.weights.push_back(
            read_grid(cur, model.layer_dims[k + 1], model.layer_dims[k]));
    }
    cur.finish();
    return model;
}

} // namespace phasenet
