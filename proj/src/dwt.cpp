#include "mslesion/dwt.hpp"

#include <cmath>
#include <stdexcept>

namespace msl {

WaveletSpec make_wavelet(const std::string& name) {
    WaveletSpec spec;
    spec.name = name;
    if (name == "haar") {
        const double s = 1.0 / std::sqrt(2.0);
        spec.h0 = {s, s};
    } else if (name == "db2") {
        const double r3 = std::sqrt(3.0);
        const double den = 4.0 * std::sqrt(2.0);
        spec.h0 = {(1.0 + r3) / den, (3.0 + r3) / den, (3.0 - r3) / den, (1.0 - r3) / den};
    } else {
        throw std::invalid_argument("unknown wavelet: " + name);
    }
    const std::size_t L = spec.h0.size();
    spec.g0.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        const double v = spec.h0[L - 1 - i];
        spec.g0[i] = (i % 2 == 0) ? v : -v;
    }
    return spec;
}

std::pair<std::vector<double>, std::vector<double>> analyze_1d(const std::vector<double>& x,
                                                               const WaveletSpec& spec) {
    const std::size_t n = x.size();
    const std::size_t L = spec.h0.size();
    if (n < L) throw std::invalid_argument("signal shorter than filter");
    const std::size_t out_n = (n + 1) / 2;
    std::vector<double> approx(out_n, 0.0), detail(out_n, 0.0);
    for (std::size_t i = 0; i < out_n; ++i) {
        double a = 0.0, d = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
            const double v = x[(2 * i + k) % n];
            a += spec.h0[k] * v;
            d += spec.g0[k] * v;
        }
        approx[i] = a;
        detail[i] = d;
    }
    return {std::move(approx), std::move(detail)};
}

std::vector<double> synth_1d(const std::vector<double>& approx, const std::vector<double>& detail,
                             const WaveletSpec& spec) {
    if (approx.size() != detail.size()) throw std::invalid_argument("inconsistent dimensions");
    const std::size_t m = approx.size();
    const std::size_t n = 2 * m;
    const std::size_t L = spec.h0.size();
    if (n < L) throw std::invalid_argument("signal shorter than filter");
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < L; ++k) {
            x[(2 * i + k) % n] += approx[i] * spec.h0[k] + detail[i] * spec.g0[k];
        }
    }
    return x;
}

namespace {

GrayImage pad_even(const GrayImage& in) {
    const int w = in.width + (in.width % 2);
    const int h = in.height + (in.height % 2);
    if (w == in.width && h == in.height) return in;
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const int sy = std::min(y, in.height - 1);
        for (int x = 0; x < w; ++x) {
            out.at(x, y) = in.at(std::min(x, in.width - 1), sy);
        }
    }
    return out;
}

GrayImage make_raster(int w, int h) { return GrayImage(w, h); }

// One separable analysis level on an even-dimension raster.
LevelBands analyze_level(const GrayImage& src, const WaveletSpec& spec) {
    const GrayImage img = pad_even(src);
    const std::size_t L = spec.h0.size();
    if (static_cast<std::size_t>(img.width) < L || static_cast<std::size_t>(img.height) < L)
        throw std::invalid_argument("image too small for requested levels");

    const int hw = img.width / 2, hh = img.height / 2;

    // row pass
    GrayImage low = make_raster(hw, img.height);
    GrayImage high = make_raster(hw, img.height);
    std::vector<double> row(img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) row[x] = img.at(x, y);
        auto [a, d] = analyze_1d(row, spec);
        for (int x = 0; x < hw; ++x) {
            low.at(x, y) = a[x];
            high.at(x, y) = d[x];
        }
    }

    // column pass
    LevelBands out;
    out.A = make_raster(hw, hh);
    out.H = make_raster(hw, hh);
    out.V = make_raster(hw, hh);
    out.D = make_raster(hw, hh);
    out.src_width = src.width;
    out.src_height = src.height;
    std::vector<double> col(img.height);
    for (int x = 0; x < hw; ++x) {
        for (int y = 0; y < img.height; ++y) col[y] = low.at(x, y);
        auto [la, ld] = analyze_1d(col, spec);
        for (int y = 0; y < hh; ++y) {
            out.A.at(x, y) = la[y];
            out.H.at(x, y) = ld[y];
        }
        for (int y = 0; y < img.height; ++y) col[y] = high.at(x, y);
        auto [ha, hd] = analyze_1d(col, spec);
        for (int y = 0; y < hh; ++y) {
            out.V.at(x, y) = ha[y];
            out.D.at(x, y) = hd[y];
        }
    }
    return out;
}

GrayImage synth_level(const LevelBands& bands, const WaveletSpec& spec) {
    const int hw = bands.A.width, hh = bands.A.height;
    if (bands.H.width != hw || bands.H.height != hh || bands.V.width != hw ||
        bands.V.height != hh || bands.D.width != hw || bands.D.height != hh)
        throw std::invalid_argument("inconsistent dimensions");
    const int w = 2 * hw, h = 2 * hh;
    if (bands.src_width > w || bands.src_height > h || bands.src_width < w - 1 ||
        bands.src_height < h - 1)
        throw std::invalid_argument("inconsistent dimensions");

    // invert column pass
    GrayImage low = make_raster(hw, h);
    GrayImage high = make_raster(hw, h);
    std::vector<double> a(hh), d(hh);
    for (int x = 0; x < hw; ++x) {
        for (int y = 0; y < hh; ++y) {
            a[y] = bands.A.at(x, y);
            d[y] = bands.H.at(x, y);
        }
        auto lc = synth_1d(a, d, spec);
        for (int y = 0; y < h; ++y) low.at(x, y) = lc[y];
        for (int y = 0; y < hh; ++y) {
            a[y] = bands.V.at(x, y);
            d[y] = bands.D.at(x, y);
        }
        auto hc = synth_1d(a, d, spec);
        for (int y = 0; y < h; ++y) high.at(x, y) = hc[y];
    }

    // invert row pass, then crop any edge padding
    GrayImage padded = make_raster(w, h);
    std::vector<double> ra(hw), rd(hw);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < hw; ++x) {
            ra[x] = low.at(x, y);
            rd[x] = high.at(x, y);
        }
        auto r = synth_1d(ra, rd, spec);
        for (int x = 0; x < w; ++x) padded.at(x, y) = r[x];
    }
    if (bands.src_width == w && bands.src_height == h) return padded;
    GrayImage out = make_raster(bands.src_width, bands.src_height);
    for (int y = 0; y < bands.src_height; ++y)
        for (int x = 0; x < bands.src_width; ++x) out.at(x, y) = padded.at(x, y);
    return out;
}

}  // namespace

SubbandSet dwt2(const GrayImage& img, const WaveletSpec& spec, int levels) {
    if (levels < 1 || levels > 2) throw std::invalid_argument("levels must be 1 or 2");
    const int min_dim = 1 << levels;
    if (img.width < min_dim || img.height < min_dim)
        throw std::invalid_argument("image too small for requested levels");

    SubbandSet set;
    set.levels = levels;
    set.band.push_back(analyze_level(img, spec));
    if (levels == 2) set.band.push_back(analyze_level(set.band[0].A, spec));
    return set;
}

GrayImage idwt2(const SubbandSet& bands, const WaveletSpec& spec) {
    if (bands.levels < 1 || bands.levels > 2 ||
        bands.band.size() != static_cast<std::size_t>(bands.levels))
        throw std::invalid_argument("inconsistent dimensions");
    if (bands.levels == 1) return synth_level(bands.band[0], spec);
    GrayImage a1 = synth_level(bands.band[1], spec);
    LevelBands first = bands.band[0];
    if (a1.width != first.A.width || a1.height != first.A.height)
        throw std::invalid_argument("inconsistent dimensions");
    first.A = std::move(a1);
    return synth_level(first, spec);
}

}  // namespace msl
