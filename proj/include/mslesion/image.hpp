#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace msl {

// Row-major real-valued raster. Images and DWT subbands share this type:
// loaded pixel data stays within [0,255], subband coefficients are unbounded.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    std::size_t size() const { return data.size(); }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }

    std::size_t count() const;
    bool none() const { return count() == 0; }
    bool same_shape(const GrayImage& img) const { return width == img.width && height == img.height; }
};

struct LabPixel {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// Achromatic CIELAB locus for grayscale input: l = 100*g/255, a = b = 0.
LabPixel gray_to_lab(double g);
std::vector<LabPixel> to_lab(const GrayImage& img);

// Throws std::invalid_argument when img violates the image contract
// (width/height >= 2, every value finite and in [0,255]).
void validate_image(const GrayImage& img);

}  // namespace msl
