#include <cmath>
#include <vector>

#include "doctest.h"
#include "mslesion/dwt.hpp"
#include "mslesion/image.hpp"
#include "mslesion/rng.hpp"
#include "oracles.hpp"

using namespace msl;

namespace {

double band_energy(const GrayImage& b) {
    double e = 0;
    for (double v : b.data) e += v * v;
    return e;
}

double image_energy(const GrayImage& img) { return band_energy(img); }

double subband_energy_level2(const SubbandSet& s) {
    // at two levels the A1 band is replaced by its four children
    double e = band_energy(s.band[0].H) + band_energy(s.band[0].V) + band_energy(s.band[0].D);
    e += band_energy(s.band[1].A) + band_energy(s.band[1].H) + band_energy(s.band[1].V) +
         band_energy(s.band[1].D);
    return e;
}

GrayImage random_image(DetRng& rng, int w, int h, int levels = 256) {
    GrayImage img(w, h);
    for (auto& p : img.data) p = static_cast<double>(rng.uniform_int(levels));
    return img;
}

double max_abs_diff(const GrayImage& a, const GrayImage& b) {
    REQUIRE(a.width == b.width);
    REQUIRE(a.height == b.height);
    double m = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace

TEST_CASE("wavelet filters are orthonormal qmf pairs") {
    for (const char* name : {"haar", "db2"}) {
        const WaveletSpec spec = make_wavelet(name);
        double h2 = 0, g2 = 0, cross = 0;
        for (std::size_t i = 0; i < spec.h0.size(); ++i) {
            h2 += spec.h0[i] * spec.h0[i];
            g2 += spec.g0[i] * spec.g0[i];
            const double sign = (i % 2 == 0) ? 1.0 : -1.0;
            cross += std::abs(spec.g0[i] - sign * spec.h0[spec.h0.size() - 1 - i]);
        }
        CHECK(h2 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g2 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cross == 0.0);
    }
    CHECK(make_wavelet("haar").h0.size() == 2);
    CHECK(make_wavelet("db2").h0.size() == 4);
    CHECK_THROWS_AS(make_wavelet("sym4"), std::invalid_argument);
}

TEST_CASE("analyze_1d constant signal") {
    const WaveletSpec haar = make_wavelet("haar");
    const std::vector<double> x(8, 3.0);
    const auto [approx, detail] = analyze_1d(x, haar);
    REQUIRE(approx.size() == 4);
    REQUIRE(detail.size() == 4);
    for (double a : approx) CHECK(a == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-12));
    for (double d : detail) CHECK(d == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("analyze_1d two-sample haar") {
    const WaveletSpec haar = make_wavelet("haar");
    const double a = 7.0, b = 3.0;
    const auto [approx, detail] = analyze_1d({a, b}, haar);
    REQUIRE(approx.size() == 1);
    REQUIRE(detail.size() == 1);
    CHECK(approx[0] == doctest::Approx((a + b) / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(detail[0] == doctest::Approx((a - b) / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("analyze_1d annihilates the alternating signal") {
    const auto [approx, detail] = analyze_1d({1, -1, 1, -1}, make_wavelet("haar"));
    for (double a : approx) CHECK(a == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("analyze_1d rejects signals shorter than the filter") {
    CHECK_THROWS_AS(analyze_1d({1.0}, make_wavelet("haar")), std::invalid_argument);
    CHECK_THROWS_AS(analyze_1d({1.0, 2.0, 3.0}, make_wavelet("db2")), std::invalid_argument);
}

TEST_CASE("synth_1d inverts analyze_1d") {
    DetRng rng(5);
    for (const char* name : {"haar", "db2"}) {
        const WaveletSpec spec = make_wavelet(name);
        for (int n : {4, 6, 8, 16, 32}) {
            std::vector<double> x(static_cast<std::size_t>(n));
            for (auto& v : x) v = rng.uniform(-100.0, 100.0);
            const auto [approx, detail] = analyze_1d(x, spec);
            const auto back = synth_1d(approx, detail, spec);
            REQUIRE(back.size() == x.size());
            for (std::size_t i = 0; i < x.size(); ++i)
                CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("dwt2 2x2 haar matches the closed form") {
    // Mirrors the implementation's operation order so equality is exact:
    // rows first with h0=[s,s], then columns, s = sqrt(0.5).
    const double a = 13, b = 5, c = 2, d = 11;
    GrayImage img(2, 2);
    img.at(0, 0) = a;
    img.at(1, 0) = b;
    img.at(0, 1) = c;
    img.at(1, 1) = d;
    const WaveletSpec haar = make_wavelet("haar");
    const double s = haar.h0[0];
    const SubbandSet out = dwt2(img, haar, 1);
    REQUIRE(out.levels == 1);
    REQUIRE(out.band[0].A.width == 1);
    REQUIRE(out.band[0].A.height == 1);
    const double row_top_lo = s * a + s * b, row_top_hi = s * a - s * b;
    const double row_bot_lo = s * c + s * d, row_bot_hi = s * c - s * d;
    CHECK(out.band[0].A.at(0, 0) == s * row_top_lo + s * row_bot_lo);
    CHECK(out.band[0].H.at(0, 0) == s * row_top_lo - s * row_bot_lo);
    CHECK(out.band[0].V.at(0, 0) == s * row_top_hi + s * row_bot_hi);
    CHECK(out.band[0].D.at(0, 0) == s * row_top_hi - s * row_bot_hi);
    // and the closed form within tolerance
    CHECK(out.band[0].A.at(0, 0) == doctest::Approx((a + b + c + d) / 2).epsilon(1e-12));
    CHECK(out.band[0].H.at(0, 0) == doctest::Approx(((a + b) - (c + d)) / 2).epsilon(1e-12));
    CHECK(out.band[0].V.at(0, 0) == doctest::Approx(((a - b) + (c - d)) / 2).epsilon(1e-12));
    CHECK(out.band[0].D.at(0, 0) == doctest::Approx(((a - b) - (c - d)) / 2).epsilon(1e-12));
}

TEST_CASE("dwt2 constant image") {
    const double c = 9.0;
    const GrayImage img(8, 6, c);
    for (const char* name : {"haar", "db2"}) {
        const SubbandSet out = dwt2(img, make_wavelet(name), 1);
        for (double v : out.band[0].A.data) CHECK(v == doctest::Approx(2 * c).epsilon(1e-12));
        for (const GrayImage* b : {&out.band[0].H, &out.band[0].V, &out.band[0].D})
            for (double v : b->data) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("level-2 A equals analyze applied twice and the dense oracle") {
    DetRng rng(77);
    const GrayImage img = random_image(rng, 4, 4, 11);
    const WaveletSpec haar = make_wavelet("haar");
    const SubbandSet two = dwt2(img, haar, 2);
    REQUIRE(two.levels == 2);
    // recursion contract: level 2 of img == level 1 of A1
    const SubbandSet one = dwt2(img, haar, 1);
    const SubbandSet of_a1 = dwt2(one.band[0].A, haar, 1);
    CHECK(max_abs_diff(two.band[1].A, of_a1.band[0].A) == 0.0);
    CHECK(max_abs_diff(two.band[1].H, of_a1.band[0].H) == 0.0);

    // dense matrix oracle on level 1
    std::vector<std::vector<double>> X(4, std::vector<double>(4));
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) X[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = img.at(x, y);
    const auto dense = oracle::dwt2_dense(X, haar.h0, haar.g0);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            CHECK(one.band[0].A.at(x, y) == doctest::Approx(dense.A[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)]).epsilon(1e-10));
            CHECK(one.band[0].H.at(x, y) == doctest::Approx(dense.H[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)]).epsilon(1e-10));
            CHECK(one.band[0].V.at(x, y) == doctest::Approx(dense.V[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)]).epsilon(1e-10));
            CHECK(one.band[0].D.at(x, y) == doctest::Approx(dense.D[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)]).epsilon(1e-10));
        }
}

TEST_CASE("dwt2 equals the dense oracle on all small even rasters") {
    DetRng rng(909);
    for (const char* name : {"haar", "db2"}) {
        const WaveletSpec spec = make_wavelet(name);
        const int lo = spec.h0.size() == 2 ? 2 : 4;  // signal >= filter
        for (int h = lo; h <= 8; h += 2) {
            for (int w = lo; w <= 8; w += 2) {
                std::vector<std::vector<double>> X(static_cast<std::size_t>(h),
                                                   std::vector<double>(static_cast<std::size_t>(w)));
                GrayImage img(w, h);
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) {
                        const double v = static_cast<double>(rng.uniform_int(3));
                        X[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = v;
                        img.at(x, y) = v;
                    }
                const auto dense = oracle::dwt2_dense(X, spec.h0, spec.g0);
                const SubbandSet out = dwt2(img, spec, 1);
                for (int y = 0; y < h / 2; ++y)
                    for (int x = 0; x < w / 2; ++x) {
                        const auto yy = static_cast<std::size_t>(y);
                        const auto xx = static_cast<std::size_t>(x);
                        CHECK(std::abs(out.band[0].A.at(x, y) - dense.A[yy][xx]) <= 1e-10);
                        CHECK(std::abs(out.band[0].H.at(x, y) - dense.H[yy][xx]) <= 1e-10);
                        CHECK(std::abs(out.band[0].V.at(x, y) - dense.V[yy][xx]) <= 1e-10);
                        CHECK(std::abs(out.band[0].D.at(x, y) - dense.D[yy][xx]) <= 1e-10);
                    }
            }
        }
    }
}

TEST_CASE("perfect reconstruction and energy conservation") {
    DetRng rng(404);
    for (const char* name : {"haar", "db2"}) {
        const WaveletSpec spec = make_wavelet(name);
        for (int trial = 0; trial < 10; ++trial) {
            const int w = 4 * (2 + rng.uniform_int(7));  // multiples of 4 in [8, 32]
            const int h = 4 * (2 + rng.uniform_int(7));
            const GrayImage img = random_image(rng, w, h);
            for (int levels : {1, 2}) {
                const SubbandSet bands = dwt2(img, spec, levels);
                const GrayImage back = idwt2(bands, spec);
                CHECK(max_abs_diff(back, img) <= 1e-9);
                const double ein = image_energy(img);
                double eout;
                if (levels == 1) {
                    eout = band_energy(bands.band[0].A) + band_energy(bands.band[0].H) +
                           band_energy(bands.band[0].V) + band_energy(bands.band[0].D);
                } else {
                    eout = subband_energy_level2(bands);
                }
                CHECK(std::abs(eout - ein) <= 1e-9 * std::max(1.0, ein));
            }
        }
    }
}

TEST_CASE("subband dimensions follow ceil halving") {
    const GrayImage img(10, 6, 1.0);
    const SubbandSet s = dwt2(img, make_wavelet("haar"), 2);
    CHECK(s.band[0].A.width == 5);
    CHECK(s.band[0].A.height == 3);
    CHECK(s.band[0].src_width == 10);
    CHECK(s.band[0].src_height == 6);
    // level-1 A is 5x3 (odd), padded to 6x4 before level 2
    CHECK(s.band[1].A.width == 3);
    CHECK(s.band[1].A.height == 2);
    CHECK(s.band[1].src_width == 5);
    CHECK(s.band[1].src_height == 3);
}

TEST_CASE("odd dimensions reconstruct after edge padding") {
    DetRng rng(11);
    for (int w : {5, 7, 9}) {
        for (int h : {3, 5, 11}) {
            const GrayImage img = random_image(rng, w, h);
            const SubbandSet bands = dwt2(img, make_wavelet("haar"), 1);
            const GrayImage back = idwt2(bands, make_wavelet("haar"));
            CHECK(max_abs_diff(back, img) <= 1e-9);
        }
    }
}

TEST_CASE("idwt2 zero bands give a zero raster") {
    SubbandSet s = dwt2(GrayImage(6, 4, 5.0), make_wavelet("haar"), 1);
    for (GrayImage* b : {&s.band[0].A, &s.band[0].H, &s.band[0].V, &s.band[0].D})
        std::fill(b->data.begin(), b->data.end(), 0.0);
    const GrayImage out = idwt2(s, make_wavelet("haar"));
    for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("single A coefficient spreads into a half-value block") {
    SubbandSet s = dwt2(GrayImage(4, 4, 0.0), make_wavelet("haar"), 1);
    for (GrayImage* b : {&s.band[0].A, &s.band[0].H, &s.band[0].V, &s.band[0].D})
        std::fill(b->data.begin(), b->data.end(), 0.0);
    const double amp = 8.0;
    s.band[0].A.at(1, 1) = amp;
    const GrayImage out = idwt2(s, make_wavelet("haar"));
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            const double want = (x >= 2 && y >= 2) ? amp / 2.0 : 0.0;
            CHECK(out.at(x, y) == doctest::Approx(want).epsilon(1e-12));
        }
}

TEST_CASE("dwt2 is linear") {
    DetRng rng(88);
    const GrayImage x = random_image(rng, 8, 8);
    const GrayImage y = random_image(rng, 8, 8);
    const double alpha = 1.75, beta = -0.5;
    GrayImage mix(8, 8);
    for (std::size_t i = 0; i < mix.data.size(); ++i)
        mix.data[i] = alpha * x.data[i] + beta * y.data[i];
    for (const char* name : {"haar", "db2"}) {
        const WaveletSpec spec = make_wavelet(name);
        const SubbandSet sx = dwt2(x, spec, 1);
        const SubbandSet sy = dwt2(y, spec, 1);
        const SubbandSet sm = dwt2(mix, spec, 1);
        auto check_band = [&](const GrayImage& bm, const GrayImage& bx, const GrayImage& by) {
            for (std::size_t i = 0; i < bm.data.size(); ++i)
                CHECK(std::abs(bm.data[i] - (alpha * bx.data[i] + beta * by.data[i])) <= 1e-10);
        };
        check_band(sm.band[0].A, sx.band[0].A, sy.band[0].A);
        check_band(sm.band[0].H, sx.band[0].H, sy.band[0].H);
        check_band(sm.band[0].V, sx.band[0].V, sy.band[0].V);
        check_band(sm.band[0].D, sx.band[0].D, sy.band[0].D);
    }
}

TEST_CASE("dwt2 rejects images too small for the level count") {
    CHECK_THROWS_AS(dwt2(GrayImage(2, 2, 0.0), make_wavelet("haar"), 2), std::invalid_argument);
    CHECK_THROWS_AS(dwt2(GrayImage(3, 8, 0.0), make_wavelet("haar"), 2), std::invalid_argument);
    CHECK_THROWS_AS(dwt2(GrayImage(8, 8, 0.0), make_wavelet("haar"), 3), std::invalid_argument);
    CHECK_NOTHROW(dwt2(GrayImage(4, 4, 0.0), make_wavelet("haar"), 2));
}
