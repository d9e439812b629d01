// Times the parallel matmul kernel against the serial reference on the
// shapes the training loop actually produces, checks that both give bit
// identical results, and reports GFLOP/s. Build and run:
//
//   cmake --build build --target bench_matmul
//   ./build/bench/bench_matmul [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "phasenet/matrix.hpp"
#include "phasenet/rng.hpp"

namespace {

using namespace phasenet;
using Clock = std::chrono::steady_clock;

RealMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    RealMatrix m(rows, cols);
    Rng rng(seed);
    for (double& x : m.v) x = rng.uniform(-1.0, 1.0);
    return m;
}

template <class F>
double best_seconds(F&& f, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = Clock::now();
        f();
        const std::chrono::duration<double> dt = Clock::now() - t0;
        if (dt.count() < best) best = dt.count();
    }
    return best;
}

void bench_shape(std::size_t n, std::size_t k, std::size_t m, int repeats) {
    const RealMatrix a = random_matrix(n, k, 11);
    const RealMatrix b = random_matrix(k, m, 13);

    const RealMatrix serial = matmul_reference(a, b);
    const RealMatrix parallel = matmul(a, b);
    const bool equal = serial == parallel;

    const double flop = 2.0 * static_cast<double>(n) *
                        static_cast<double>(k) * static_cast<double>(m);
    RealMatrix sink;
    const double ts = best_seconds([&] { sink = matmul_reference(a, b); }, repeats);
    const double tp = best_seconds([&] { sink = matmul(a, b); }, repeats);

    std::printf("%5zu x %5zu x %5zu  serial %8.2f GF/s  parallel %8.2f GF/s  "
                "speedup %5.2fx  bit-equal %s\n",
                n, k, m, flop / ts * 1e-9, flop / tp * 1e-9, ts / tp,
                equal ? "yes" : "NO");
    if (!equal) std::exit(1);
}

} // namespace

int main(int argc, char** argv) {
    int repeats = 5;
    if (argc > 1) {
        char* end = nullptr;
        const long v = std::strtol(argv[1], &end, 10);
        if (end == argv[1] || *end != '\0' || v < 1) {
            std::fprintf(stderr, "usage: %s [repeats >= 1]\n", argv[0]);
            return 1;
        }
        repeats = static_cast<int>(v);
    }
    std::printf("matmul kernels, best of %d runs\n", repeats);
    // Forward and backward products of a 785-100-10 and a 785-512-100 net
    // at batch 100, plus one larger square case.
    bench_shape(100, 785, 100, repeats);
    bench_shape(512, 785, 100, repeats);
    bench_shape(785, 100, 100, repeats);
    bench_shape(10, 513, 100, repeats);
    bench_shape(512, 512, 512, repeats);
    bench_shape(1024, 1024, 1024, repeats);
    return 0;
}
