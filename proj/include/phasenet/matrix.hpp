#pragma once

#include <cstddef>
#include <vector>

namespace phasenet {

/// Dense real matrix, row-major.
struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), v(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return v[i * cols + j]; }

    double* row(std::size_t i) { return v.data() + i * cols; }
    const double* row(std::size_t i) const { return v.data() + i * cols; }

    bool same_shape(const RealMatrix& o) const { return rows == o.rows && cols == o.cols; }
    friend bool operator==(const RealMatrix& a, const RealMatrix& b) {
        return a.rows == b.rows && a.cols == b.cols && a.v == b.v;
    }
};

/// Dense complex matrix stored as two real planes. All complex arithmetic in
/// this library goes through the planes; no complex scalar type is involved.
struct ComplexMatrix {
    RealMatrix re;
    RealMatrix im;

    ComplexMatrix() = default;
    ComplexMatrix(std::size_t r, std::size_t c) : re(r, c), im(r, c) {}
    ComplexMatrix(RealMatrix real_part, RealMatrix imag_part);

    std::size_t rows() const { return re.rows; }
    std::size_t cols() const { return re.cols; }

    friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) {
        return a.re == b.re && a.im == b.im;
    }
};

// -- real kernels -----------------------------------------------------------

/// Blocked matrix product, OpenMP-parallel over output tiles. For each output
/// element the k-reduction runs in ascending order as a chain of fused
/// multiply-adds, so the result is bit-identical for any thread count and
/// matches matmul_reference exactly.
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);

/// Plain triple-loop product, serial. Kept as the reference the parallel
/// kernel is tested and benchmarked against.
RealMatrix matmul_reference(const RealMatrix& a, const RealMatrix& b);

RealMatrix transpose(const RealMatrix& m);
RealMatrix add(const RealMatrix& a, const RealMatrix& b);
RealMatrix sub(const RealMatrix& a, const RealMatrix& b);
RealMatrix scale(const RealMatrix& m, double s);
RealMatrix hadamard(const RealMatrix& a, const RealMatrix& b);

// -- complex ops ------------------------------------------------------------

/// Complex matrix product via four real products:
/// (A^R B^R - A^I B^I) + i (A^R B^I + A^I B^R).
ComplexMatrix cmul(const ComplexMatrix& a, const ComplexMatrix& b);

/// Element-wise complex product.
ComplexMatrix hadamard(const ComplexMatrix& a, const ComplexMatrix& b);

/// sqrt(re^2 + im^2) element-wise.
RealMatrix amplitude(const ComplexMatrix& m);

/// atan2(im, re) element-wise, in (-pi, pi]; the phase of a zero element is
/// defined as 0 (atan2(0, -0) would give pi, so zeros are special-cased).
RealMatrix phase(const ComplexMatrix& m);

ComplexMatrix transpose(const ComplexMatrix& m);
ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix scale(const ComplexMatrix& m, double s);

/// re = amp*cos(ph), im = amp*sin(ph). Inverse of (amplitude, phase) on
/// matrices with no zero element.
ComplexMatrix from_polar(const RealMatrix& amp, const RealMatrix& ph);

} // namespace phasenet
