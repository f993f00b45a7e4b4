#include "mslesion/brain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace msl {

namespace {

std::array<std::int64_t, 256> intensity_histogram(const GrayImage& img) {
    std::array<std::int64_t, 256> hist{};
    for (double v : img.data) {
        const long bin = std::clamp(std::lround(v), 0l, 255l);
        ++hist[static_cast<std::size_t>(bin)];
    }
    return hist;
}

std::vector<std::pair<int, int>> element_offsets(int radius, ElementShape shape) {
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (shape == ElementShape::Disc && dx * dx + dy * dy > radius * radius) continue;
            offsets.emplace_back(dx, dy);
        }
    }
    return offsets;
}

}  // namespace

int estimate_threshold(const GrayImage& img) {
    const auto hist = intensity_histogram(img);
    const double total = static_cast<double>(img.size());
    if (std::count_if(hist.begin(), hist.end(), [](std::int64_t c) { return c > 0; }) < 2)
        throw std::runtime_error("degenerate histogram");

    double sum_all = 0;
    for (int i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * static_cast<double>(hist[i]);

    int best_t = 0;
    double best_var = -1.0;
    double w0 = 0, sum0 = 0;
    for (int t = 0; t < 256; ++t) {
        w0 += static_cast<double>(hist[t]);
        sum0 += static_cast<double>(t) * static_cast<double>(hist[t]);
        const double w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double var = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

BinaryMask binarize(const GrayImage& img, double th) {
    BinaryMask mask(img.width, img.height);
    for (std::size_t i = 0; i < img.size(); ++i) mask.bits[i] = img.data[i] > th ? 1 : 0;
    return mask;
}

BinaryMask largest_component(const BinaryMask& mask) {
    if (mask.none()) throw std::runtime_error("empty mask");
    const int w = mask.width, h = mask.height;
    std::vector<std::int32_t> comp(mask.bits.size(), -1);
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> starts;  // minimal row-major index per component
    std::vector<std::size_t> stack;

    for (std::size_t i = 0; i < mask.bits.size(); ++i) {
        if (!mask.bits[i] || comp[i] >= 0) continue;
        const std::int32_t id = static_cast<std::int32_t>(sizes.size());
        sizes.push_back(0);
        starts.push_back(i);
        stack.push_back(i);
        comp[i] = id;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++sizes[id];
            const int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
            const std::array<std::pair<int, int>, 4> nbrs{{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
            for (auto [nx, ny] : nbrs) {
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
                if (mask.bits[q] && comp[q] < 0) {
                    comp[q] = id;
                    stack.push_back(q);
                }
            }
        }
    }

    std::int32_t best = 0;
    for (std::int32_t id = 1; id < static_cast<std::int32_t>(sizes.size()); ++id) {
        if (sizes[id] > sizes[best] || (sizes[id] == sizes[best] && starts[id] < starts[best]))
            best = id;
    }
    BinaryMask out(w, h);
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = comp[i] == best ? 1 : 0;
    return out;
}

BinaryMask erode(const BinaryMask& mask, int radius, ElementShape shape) {
    const auto offsets = element_offsets(radius, shape);
    BinaryMask out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            bool all = true;
            for (auto [dx, dy] : offsets) {
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || nx >= mask.width || ny < 0 || ny >= mask.height || !mask.at(nx, ny)) {
                    all = false;
                    break;
                }
            }
            out.set(x, y, all);
        }
    }
    return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius, ElementShape shape) {
    const auto offsets = element_offsets(radius, shape);
    BinaryMask out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            bool any = false;
            for (auto [dx, dy] : offsets) {
                const int nx = x + dx, ny = y + dy;
                if (nx >= 0 && nx < mask.width && ny >= 0 && ny < mask.height && mask.at(nx, ny)) {
                    any = true;
                    break;
                }
            }
            out.set(x, y, any);
        }
    }
    return out;
}

BrainMask refine_mask(const BinaryMask& mask, int radius, ElementShape shape, double threshold) {
    if (mask.none()) throw std::runtime_error("empty mask");
    BinaryMask opened = dilate(erode(mask, radius, shape), radius, shape);
    if (opened.none()) throw std::runtime_error("mask eliminated by morphology");
    BinaryMask closed = erode(dilate(opened, radius, shape), radius, shape);
    if (closed.none()) throw std::runtime_error("mask eliminated by morphology");

    BrainMask out;
    out.mask = largest_component(closed);
    out.threshold = threshold;
    double sx = 0, sy = 0, n = 0;
    for (int y = 0; y < out.mask.height; ++y)
        for (int x = 0; x < out.mask.width; ++x)
            if (out.mask.at(x, y)) {
                sx += x;
                sy += y;
                n += 1;
            }
    out.centroid_x = sx / n;
    out.centroid_y = sy / n;
    return out;
}

BrainMask extract_brain(const GrayImage& img, const ExtractOptions& opts) {
    validate_image(img);
    const double th = opts.threshold_override >= 0 ? opts.threshold_override
                                                   : static_cast<double>(estimate_threshold(img));
    BinaryMask bin = binarize(img, th);
    if (bin.none()) throw std::runtime_error("empty mask");
    return refine_mask(largest_component(bin), opts.radius, opts.element, th);
}

}  // namespace msl
