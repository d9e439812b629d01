#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "phasenet/errors.hpp"
#include "phasenet/mnist.hpp"
#include "phasenet/rng.hpp"

#include "test_util.hpp"

using namespace phasenet;
using namespace testutil;

TEST_CASE("parse_idx reads an image file") {
    const std::vector<unsigned char> pixels = {0, 64, 128, 255,
                                               10, 20, 30, 40};
    const auto bytes = idx_images(2, 2, 2, pixels);
    const IdxData idx = parse_idx(std::span(bytes));
    REQUIRE(idx.dims == std::vector<std::uint32_t>{2, 2, 2});
    CHECK(idx.payload == pixels);
}

TEST_CASE("parse_idx reads a label file") {
    const std::vector<unsigned char> labels = {0, 9, 3};
    const auto bytes = idx_labels(labels);
    const IdxData idx = parse_idx(std::span(bytes));
    REQUIRE(idx.dims == std::vector<std::uint32_t>{3});
    CHECK(idx.payload == labels);
}

TEST_CASE("parse_idx failure modes are distinct") {
    const auto good = idx_images(1, 2, 2, {1, 2, 3, 4});

    SUBCASE("bad magic") {
        auto bad = good;
        bad[2] = 0x99;
        CHECK_THROWS_WITH_AS(parse_idx(std::span(bad)),
                             doctest::Contains("bad IDX magic"), data_error);
    }
    SUBCASE("empty input") {
        const std::vector<unsigned char> none;
        CHECK_THROWS_WITH_AS(parse_idx(std::span(none)),
                             doctest::Contains("truncated IDX header"),
                             data_error);
    }
    SUBCASE("header cut inside the dimension sizes") {
        std::vector<unsigned char> cut(good.begin(), good.begin() + 10);
        CHECK_THROWS_WITH_AS(parse_idx(std::span(cut)),
                             doctest::Contains("truncated IDX header"),
                             data_error);
    }
    SUBCASE("payload too short") {
        std::vector<unsigned char> cut(good.begin(), good.end() - 1);
        CHECK_THROWS_WITH_AS(parse_idx(std::span(cut)),
                             doctest::Contains("truncated IDX payload"),
                             data_error);
    }
    SUBCASE("payload too long") {
        auto extra = good;
        extra.push_back(0);
        CHECK_THROWS_WITH_AS(parse_idx(std::span(extra)),
                             doctest::Contains("trailing bytes"), data_error);
    }
    SUBCASE("dimension product overflows") {
        std::vector<unsigned char> huge;
        push_u32_be(huge, 0x00000803u);
        push_u32_be(huge, 0xFFFFFFFFu);
        push_u32_be(huge, 0xFFFFFFFFu);
        push_u32_be(huge, 0xFFFFFFFFu);
        CHECK_THROWS_WITH_AS(parse_idx(std::span(huge)),
                             doctest::Contains("overflow"), data_error);
    }
}

TEST_CASE("parse_idx never crashes on fuzzed input") {
    Rng rng(2024);
    int accepted = 0;
    for (int round = 0; round < 3000; ++round) {
        std::vector<unsigned char> bytes(rng.below(64));
        for (auto& b : bytes) b = static_cast<unsigned char>(rng.below(256));
        // Bias some rounds toward valid-looking headers so deeper branches
        // get exercised too.
        if (round % 3 == 0 && bytes.size() >= 4) {
            bytes[0] = 0;
            bytes[1] = 0;
            bytes[2] = 0x08;
            bytes[3] = round % 6 == 0 ? 0x03 : 0x01;
        }
        try {
            (void)parse_idx(std::span(bytes));
            ++accepted;
        } catch (const data_error&) {
        }
    }
    // Reaching here without a crash is the point; nearly every random blob
    // must have been rejected (a stray valid tiny file is acceptable).
    CHECK(accepted < 300);
}

TEST_CASE("every truncation of a valid file is rejected cleanly") {
    const auto good = idx_images(2, 3, 3, std::vector<unsigned char>(18, 7));
    for (std::size_t len = 0; len < good.size(); ++len) {
        std::vector<unsigned char> cut(good.begin(),
                                       good.begin() + static_cast<long>(len));
        CHECK_THROWS_AS(parse_idx(std::span(cut)), data_error);
    }
}

TEST_CASE("read_maybe_gzip inflates transparently and validates") {
    const TempDir tmp;
    const std::vector<unsigned char> raw = {1, 2, 3, 4, 5, 200, 201, 202};

    write_bytes(tmp.path / "plain.bin", raw);
    CHECK(read_maybe_gzip((tmp.path / "plain.bin").string()) == raw);

    write_bytes(tmp.path / "packed.bin", gzip_bytes(raw));
    CHECK(read_maybe_gzip((tmp.path / "packed.bin").string()) == raw);

    auto corrupt = gzip_bytes(raw);
    corrupt[corrupt.size() / 2] ^= 0xFF;
    write_bytes(tmp.path / "corrupt.bin", corrupt);
    CHECK_THROWS_AS(read_maybe_gzip((tmp.path / "corrupt.bin").string()),
                    data_error);

    auto padded = gzip_bytes(raw);
    padded.push_back(0x55);
    write_bytes(tmp.path / "padded.bin", padded);
    CHECK_THROWS_WITH_AS(read_maybe_gzip((tmp.path / "padded.bin").string()),
                         doctest::Contains("trailing"), data_error);

    CHECK_THROWS_AS(read_maybe_gzip((tmp.path / "absent.bin").string()),
                    data_error);
}

TEST_CASE("phase_encode maps x to x*exp(i*pi*x)") {
    RealMatrix px(1, 4);
    px.v = {0.0, 0.5, 1.0, 0.25};
    const ComplexMatrix z = phase_encode(px);

    CHECK(z.re(0, 0) == 0.0);
    CHECK(z.im(0, 0) == 0.0);

    CHECK(std::abs(z.re(0, 1)) < 1e-12);
    CHECK(z.im(0, 1) == doctest::Approx(0.5).epsilon(1e-12));

    CHECK(z.re(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(z.im(0, 2)) < 1e-12);

    const double quarter = 0.25 * 3.14159265358979323846;
    CHECK(z.re(0, 3) == doctest::Approx(0.25 * std::cos(quarter)).epsilon(1e-12));
    CHECK(z.im(0, 3) == doctest::Approx(0.25 * std::sin(quarter)).epsilon(1e-12));
}

TEST_CASE("phase_encode preserves magnitude and scales the phase") {
    const RealMatrix px = random_real(7, 9, 55, 0.0, 1.0);
    const ComplexMatrix z = phase_encode(px);
    const RealMatrix amp = amplitude(z);
    const RealMatrix ph = phase(z);
    for (std::size_t i = 0; i < px.v.size(); ++i) {
        CHECK(std::abs(amp.v[i] - px.v[i]) <= 1e-12);
        CHECK(std::abs(ph.v[i] - 3.14159265358979323846 * px.v[i]) <= 1e-9);
    }
}

TEST_CASE("phase_encode rejects values outside [0,1]") {
    RealMatrix bad(1, 1);
    bad.v = {1.0000001};
    CHECK_THROWS_AS(phase_encode(bad), data_error);
    bad.v = {-0.0000001};
    CHECK_THROWS_AS(phase_encode(bad), data_error);
    bad.v = {std::nan("")};
    CHECK_THROWS_AS(phase_encode(bad), data_error);
}

TEST_CASE("load_mnist builds matrices with a bias row") {
    const TempDir tmp;
    write_mnist_dir(tmp.path, 30, 20, 3, 4, 42);

    const Dataset real = load_mnist(tmp.str(), Split::Train, Encode::Real);
    const RealMatrix& rx = real.real_x();
    CHECK(rx.rows == 13); // 12 pixels + bias
    CHECK(rx.cols == 30);
    CHECK(real.y.rows == 10);
    CHECK(real.y.cols == 30);
    CHECK(real.samples() == 30);
    for (std::size_t j = 0; j < rx.cols; ++j) {
        CHECK(rx(12, j) == 1.0);
        for (std::size_t i = 0; i < 12; ++i) {
            CHECK(rx(i, j) >= 0.0);
            CHECK(rx(i, j) <= 1.0);
        }
    }
    // Labels cycle 0..9 by construction.
    for (std::size_t j = 0; j < 30; ++j) {
        CHECK(real.y(j % 10, j) == 1.0);
    }
    CHECK_THROWS_AS(real.complex_x(), shape_error);

    const Dataset cplx = load_mnist(tmp.str(), Split::Test, Encode::Complex);
    const ComplexMatrix& cx = cplx.complex_x();
    CHECK(cx.rows() == 13);
    CHECK(cx.cols() == 20);
    for (std::size_t j = 0; j < cx.cols(); ++j) {
        CHECK(cx.re(12, j) == 1.0);
        CHECK(cx.im(12, j) == 0.0);
    }
    CHECK_THROWS_AS(cplx.real_x(), shape_error);

    // The complex pixels are the phase-encoded real pixels.
    const Dataset rtest = load_mnist(tmp.str(), Split::Test, Encode::Real);
    const RealMatrix& rt = rtest.real_x();
    for (std::size_t j = 0; j < 5; ++j) {
        for (std::size_t i = 0; i < 12; ++i) {
            const double x = rt(i, j);
            CHECK(cx.re(i, j) ==
                  doctest::Approx(x * std::cos(3.14159265358979323846 * x))
                      .epsilon(1e-12));
            CHECK(cx.im(i, j) ==
                  doctest::Approx(x * std::sin(3.14159265358979323846 * x))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("load_mnist accepts gzipped files") {
    const TempDir plain_dir;
    const TempDir gz_dir;
    write_mnist_dir(plain_dir.path, 12, 8, 2, 2, 7, false);
    write_mnist_dir(gz_dir.path, 12, 8, 2, 2, 7, true);
    const Dataset a = load_mnist(plain_dir.str(), Split::Train, Encode::Real);
    const Dataset b = load_mnist(gz_dir.str(), Split::Train, Encode::Real);
    CHECK(a.real_x() == b.real_x());
    CHECK(a.y == b.y);
}

TEST_CASE("load_mnist failure modes") {
    const TempDir tmp;
    CHECK_THROWS_WITH_AS(load_mnist(tmp.str(), Split::Train, Encode::Real),
                         doctest::Contains("missing file"), data_error);

    // Count mismatch between images and labels.
    write_bytes(tmp.path / "train-images-idx3-ubyte",
                idx_images(3, 2, 2, std::vector<unsigned char>(12, 1)));
    write_bytes(tmp.path / "train-labels-idx1-ubyte", idx_labels({1, 2}));
    CHECK_THROWS_WITH_AS(load_mnist(tmp.str(), Split::Train, Encode::Real),
                         doctest::Contains("mismatch"), data_error);

    // Label out of range.
    write_bytes(tmp.path / "train-labels-idx1-ubyte", idx_labels({1, 2, 10}));
    CHECK_THROWS_WITH_AS(load_mnist(tmp.str(), Split::Train, Encode::Real),
                         doctest::Contains("label"), data_error);

    // Corrupt image file names the offending path.
    auto bad = idx_images(3, 2, 2, std::vector<unsigned char>(12, 1));
    bad[2] = 0x77;
    write_bytes(tmp.path / "train-images-idx3-ubyte", bad);
    CHECK_THROWS_WITH_AS(load_mnist(tmp.str(), Split::Train, Encode::Real),
                         doctest::Contains("train-images-idx3-ubyte"),
                         data_error);
}
