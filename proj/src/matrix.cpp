#include "phasenet/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

#include "phasenet/errors.hpp"

namespace phasenet {
namespace {

std::string shape_str(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

[[noreturn]] void throw_shape(const char* op, const RealMatrix& a, const RealMatrix& b) {
    throw shape_error(std::string(op) + ": shape mismatch " +
                      shape_str(a.rows, a.cols) + " vs " + shape_str(b.rows, b.cols));
}

void require_same_shape(const char* op, const RealMatrix& a, const RealMatrix& b) {
    if (!a.same_shape(b)) throw_shape(op, a, b);
}

// The blocked kernel works on 16-column strips of C. Inside a strip, a
// register-resident block of accumulator rows runs one fused-multiply-add
// chain per output element, in ascending k starting from zero, exactly like
// matmul_reference; tiling and vectorization only change which independent
// chains advance together, never the rounding of any single chain, so the
// kernel is bit-identical to the reference.
constexpr std::size_t kColStrip = 16;

#if defined(__AVX512F__)

// Rows x 16 tile held in zmm registers across the whole k range. The two
// lane masks cover columns [0,8) and [8,16) of the strip so partial strips
// never touch memory past the row end; masked-off lanes are never stored.
template <int Rows>
void matmul_tile(const RealMatrix& a, const RealMatrix& b, RealMatrix& c,
                 std::size_t i0, std::size_t j0, __mmask8 lo, __mmask8 hi) {
    __m512d acc0[Rows], acc1[Rows];
    for (int ii = 0; ii < Rows; ++ii) {
        acc0[ii] = _mm512_setzero_pd();
        acc1[ii] = _mm512_setzero_pd();
    }
    for (std::size_t k = 0; k < a.cols; ++k) {
        const double* brow = b.row(k) + j0;
        const __m512d b0 = _mm512_maskz_loadu_pd(lo, brow);
        const __m512d b1 = _mm512_maskz_loadu_pd(hi, brow + 8);
        for (int ii = 0; ii < Rows; ++ii) {
            const __m512d aik = _mm512_set1_pd(a(i0 + ii, k));
            acc0[ii] = _mm512_fmadd_pd(aik, b0, acc0[ii]);
            acc1[ii] = _mm512_fmadd_pd(aik, b1, acc1[ii]);
        }
    }
    for (int ii = 0; ii < Rows; ++ii) {
        double* crow = c.row(i0 + ii) + j0;
        _mm512_mask_storeu_pd(crow, lo, acc0[ii]);
        _mm512_mask_storeu_pd(crow + 8, hi, acc1[ii]);
    }
}

void matmul_strip(const RealMatrix& a, const RealMatrix& b, RealMatrix& c,
                  std::size_t j0, std::size_t rj) {
    const __mmask8 lo =
        rj >= 8 ? __mmask8{0xff} : static_cast<__mmask8>((1u << rj) - 1);
    const __mmask8 hi = rj <= 8 ? __mmask8{0}
                                : static_cast<__mmask8>((1u << (rj - 8)) - 1);
    std::size_t i0 = 0;
    for (; i0 + 8 <= a.rows; i0 += 8) matmul_tile<8>(a, b, c, i0, j0, lo, hi);
    switch (a.rows - i0) {
        case 7: matmul_tile<7>(a, b, c, i0, j0, lo, hi); break;
        case 6: matmul_tile<6>(a, b, c, i0, j0, lo, hi); break;
        case 5: matmul_tile<5>(a, b, c, i0, j0, lo, hi); break;
        case 4: matmul_tile<4>(a, b, c, i0, j0, lo, hi); break;
        case 3: matmul_tile<3>(a, b, c, i0, j0, lo, hi); break;
        case 2: matmul_tile<2>(a, b, c, i0, j0, lo, hi); break;
        case 1: matmul_tile<1>(a, b, c, i0, j0, lo, hi); break;
        default: break;
    }
}

#else

// Portable strip kernel: 4 x 16 accumulator tiles with scalar fma chains.
constexpr std::size_t kRowStrip = 4;

void matmul_tile(const RealMatrix& a, const RealMatrix& b, RealMatrix& c,
                 std::size_t i0, std::size_t ri, std::size_t j0,
                 std::size_t rj) {
    double acc[kRowStrip][kColStrip] = {};
    for (std::size_t k = 0; k < a.cols; ++k) {
        const double* brow = b.row(k) + j0;
        for (std::size_t ii = 0; ii < ri; ++ii) {
            const double aik = a(i0 + ii, k);
            for (std::size_t jj = 0; jj < rj; ++jj) {
                acc[ii][jj] = std::fma(aik, brow[jj], acc[ii][jj]);
            }
        }
    }
    for (std::size_t ii = 0; ii < ri; ++ii) {
        double* crow = c.row(i0 + ii) + j0;
        for (std::size_t jj = 0; jj < rj; ++jj) crow[jj] = acc[ii][jj];
    }
}

void matmul_strip(const RealMatrix& a, const RealMatrix& b, RealMatrix& c,
                  std::size_t j0, std::size_t rj) {
    for (std::size_t i0 = 0; i0 < a.rows; i0 += kRowStrip) {
        const std::size_t ri = std::min(kRowStrip, a.rows - i0);
        matmul_tile(a, b, c, i0, ri, j0, rj);
    }
}

#endif

} // namespace

ComplexMatrix::ComplexMatrix(RealMatrix real_part, RealMatrix imag_part)
    : re(std::move(real_part)), im(std::move(imag_part)) {
    if (!re.same_shape(im)) throw_shape("ComplexMatrix", re, im);
}

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
    if (a.cols != b.rows) throw_shape("matmul", a, b);
    const std::size_t m = a.rows, n = b.cols;
    RealMatrix c(m, n);

    // Column strips are the outer/parallel dimension: each strip of B is
    // streamed once and reused by every row block while A (typically the
    // smaller operand) stays cache-resident. Strips write disjoint parts of
    // C, so the schedule cannot affect the result.
    const std::size_t col_strips = (n + kColStrip - 1) / kColStrip;

#pragma omp parallel for schedule(static)
    for (std::size_t cs = 0; cs < col_strips; ++cs) {
        const std::size_t j0 = cs * kColStrip;
        matmul_strip(a, b, c, j0, std::min(kColStrip, n - j0));
    }
    return c;
}

RealMatrix matmul_reference(const RealMatrix& a, const RealMatrix& b) {
    if (a.cols != b.rows) throw_shape("matmul", a, b);
    RealMatrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k)
                acc = std::fma(a(i, k), b(k, j), acc);
            c(i, j) = acc;
        }
    }
    return c;
}

RealMatrix transpose(const RealMatrix& m) {
    RealMatrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            t(j, i) = m(i, j);
    return t;
}

RealMatrix add(const RealMatrix& a, const RealMatrix& b) {
    require_same_shape("add", a, b);
    RealMatrix c(a.rows, a.cols);
    for (std::size_t i = 0; i < a.v.size(); ++i) c.v[i] = a.v[i] + b.v[i];
    return c;
}

RealMatrix sub(const RealMatrix& a, const RealMatrix& b) {
    require_same_shape("sub", a, b);
    RealMatrix c(a.rows, a.cols);
    for (std::size_t i = 0; i < a.v.size(); ++i) c.v[i] = a.v[i] - b.v[i];
    return c;
}

RealMatrix scale(const RealMatrix& m, double s) {
    RealMatrix c(m.rows, m.cols);
    for (std::size_t i = 0; i < m.v.size(); ++i) c.v[i] = s * m.v[i];
    return c;
}

RealMatrix hadamard(const RealMatrix& a, const RealMatrix& b) {
    require_same_shape("hadamard", a, b);
    RealMatrix c(a.rows, a.cols);
    for (std::size_t i = 0; i < a.v.size(); ++i) c.v[i] = a.v[i] * b.v[i];
    return c;
}

ComplexMatrix cmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw_shape("cmul", a.re, b.re);
    return {sub(matmul(a.re, b.re), matmul(a.im, b.im)),
            add(matmul(a.re, b.im), matmul(a.im, b.re))};
}

ComplexMatrix hadamard(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape("hadamard", a.re, b.re);
    ComplexMatrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.re.v.size(); ++i) {
        c.re.v[i] = a.re.v[i] * b.re.v[i] - a.im.v[i] * b.im.v[i];
        c.im.v[i] = a.re.v[i] * b.im.v[i] + a.im.v[i] * b.re.v[i];
    }
    return c;
}

RealMatrix amplitude(const ComplexMatrix& m) {
    RealMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < r.v.size(); ++i)
        r.v[i] = std::sqrt(m.re.v[i] * m.re.v[i] + m.im.v[i] * m.im.v[i]);
    return r;
}

RealMatrix phase(const ComplexMatrix& m) {
    RealMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < r.v.size(); ++i) {
        const double re = m.re.v[i], im = m.im.v[i];
        r.v[i] = (re == 0.0 && im == 0.0) ? 0.0 : std::atan2(im, re);
    }
    return r;
}

ComplexMatrix transpose(const ComplexMatrix& m) {
    return {transpose(m.re), transpose(m.im)};
}

ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b) {
    return {add(a.re, b.re), add(a.im, b.im)};
}

ComplexMatrix scale(const ComplexMatrix& m, double s) {
    return {scale(m.re, s), scale(m.im, s)};
}

ComplexMatrix from_polar(const RealMatrix& amp, const RealMatrix& ph) {
    require_same_shape("from_polar", amp, ph);
    ComplexMatrix c(amp.rows, amp.cols);
    for (std::size_t i = 0; i < amp.v.size(); ++i) {
        c.re.v[i] = amp.v[i] * std::cos(ph.v[i]);
        c.im.v[i] = amp.v[i] * std::sin(ph.v[i]);
    }
    return c;
}

} // namespace phasenet
