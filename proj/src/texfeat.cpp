#include "mslesion/texfeat.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace msl {

std::vector<double> histogram_pdf(const std::vector<double>& values, int levels) {
    if (values.empty()) throw std::invalid_argument("empty region");
    if (levels < 2) throw std::invalid_argument("levels must be >= 2");
    std::vector<double> p(levels, 0.0);
    const double width = 256.0 / levels;
    for (double v : values) {
        int k = static_cast<int>(std::floor(v / width));
        k = std::clamp(k, 0, levels - 1);
        p[k] += 1.0;
    }
    const double n = static_cast<double>(values.size());
    for (double& x : p) x /= n;
    return p;
}

RegionStats region_moments(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("empty region");
    const double n = static_cast<double>(values.size());
    double mean = 0;
    for (double v : values) mean += v;
    mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : values) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    RegionStats s;
    s.mean = mean;
    s.variance = m2;
    if (m2 > 0) {
        const double sigma = std::sqrt(m2);
        s.skewness = m3 / (sigma * sigma * sigma);
        s.kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return s;
}

std::vector<SourceRef> default_sources() {
    return {{1, Band::A}, {1, Band::H}, {1, Band::V}, {1, Band::D}};
}

std::string source_name(const SourceRef& s) {
    const char* b = s.band == Band::A   ? "A"
                    : s.band == Band::H ? "H"
                    : s.band == Band::V ? "V"
                                        : "D";
    return std::string(b) + std::to_string(s.level);
}

std::vector<SourceRef> parse_sources(const std::string& text) {
    std::vector<SourceRef> out;
    std::string token;
    auto flush = [&]() {
        if (token.empty()) return;
        if (token.size() != 2) throw std::invalid_argument("bad subband source: " + token);
        SourceRef ref;
        switch (token[0]) {
            case 'A': ref.band = Band::A; break;
            case 'H': ref.band = Band::H; break;
            case 'V': ref.band = Band::V; break;
            case 'D': ref.band = Band::D; break;
            default: throw std::invalid_argument("bad subband source: " + token);
        }
        if (token[1] != '1' && token[1] != '2')
            throw std::invalid_argument("bad subband source: " + token);
        ref.level = token[1] - '0';
        out.push_back(ref);
        token.clear();
    };
    for (char c : text) {
        if (c == ',' || c == ' ') {
            flush();
        } else {
            token.push_back(c);
        }
    }
    flush();
    if (out.empty()) throw std::invalid_argument("no subband sources");
    return out;
}

namespace {

const GrayImage& pick_band(const SubbandSet& bands, const SourceRef& ref) {
    if (ref.level < 1 || ref.level > bands.levels)
        throw std::invalid_argument("source level exceeds decomposition depth");
    const LevelBands& lb = bands.band[ref.level - 1];
    switch (ref.band) {
        case Band::A: return lb.A;
        case Band::H: return lb.H;
        case Band::V: return lb.V;
        default: return lb.D;
    }
}

// Subband pixels owned by the superpixel: majority of the pixel's source
// block carries the label; ties count as belonging. Blocks are clipped to the
// image, so edge blocks vote over fewer source pixels.
std::vector<double> region_values(const LabelMap& lm, std::uint32_t label,
                                  const GrayImage& sub, int level) {
    const int scale = 1 << level;
    std::vector<double> vals;
    for (int sy = 0; sy < sub.height; ++sy) {
        for (int sx = 0; sx < sub.width; ++sx) {
            const int x0 = sx * scale, y0 = sy * scale;
            int inside = 0, total = 0;
            for (int y = y0; y < y0 + scale && y < lm.height; ++y) {
                for (int x = x0; x < x0 + scale && x < lm.width; ++x) {
                    ++total;
                    if (lm.label_at(x, y) == label) ++inside;
                }
            }
            if (total > 0 && 2 * inside >= total) vals.push_back(sub.at(sx, sy));
        }
    }
    return vals;
}

}  // namespace

FeatureMatrix superpixel_features(const LabelMap& lm, const std::vector<std::uint32_t>& kept,
                                  const SubbandSet& bands,
                                  const std::vector<SourceRef>& sources) {
    if (kept.empty()) throw std::invalid_argument("no superpixels to featurize");
    if (sources.empty()) throw std::invalid_argument("no subband sources");

    std::vector<std::uint32_t> order = kept;
    std::sort(order.begin(), order.end());

    FeatureMatrix fm;
    fm.dims = sources.size() * 4;
    for (std::uint32_t label : order) {
        std::vector<double> row;
        row.reserve(fm.dims);
        bool empty_mask = false;
        for (const SourceRef& src : sources) {
            const GrayImage& sub = pick_band(bands, src);
            auto vals = region_values(lm, label, sub, src.level);
            if (vals.empty()) {
                empty_mask = true;
                break;
            }
            const RegionStats st = region_moments(vals);
            row.push_back(st.mean);
            row.push_back(st.variance);
            row.push_back(st.skewness);
            row.push_back(st.kurtosis);
        }
        if (empty_mask) {
            std::cerr << "superpixel " << label << ": empty downsampled mask, row dropped\n";
            continue;
        }
        fm.rows.push_back(std::move(row));
        fm.provenance.push_back({0, label});
    }
    return fm;
}

std::vector<int> label_superpixels(const LabelMap& lm, const std::vector<std::uint32_t>& kept,
                                   const BinaryMask& truth, double overlap) {
    if (truth.width != lm.width || truth.height != lm.height)
        throw std::invalid_argument("dimension mismatch");

    const std::size_t n_labels = lm.n_labels();
    std::vector<std::size_t> total(n_labels, 0), fg(n_labels, 0);
    for (int y = 0; y < lm.height; ++y) {
        for (int x = 0; x < lm.width; ++x) {
            const std::uint32_t l = lm.label_at(x, y);
            if (l == kBackgroundLabel) continue;
            ++total[l];
            if (truth.at(x, y)) ++fg[l];
        }
    }
    std::vector<int> out;
    out.reserve(kept.size());
    for (std::uint32_t l : kept) {
        const double frac =
            total[l] ? static_cast<double>(fg[l]) / static_cast<double>(total[l]) : 0.0;
        out.push_back(frac >= overlap ? 1 : 0);
    }
    return out;
}

}  // namespace msl
