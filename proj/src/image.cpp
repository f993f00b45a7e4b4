#include "mslesion/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msl {

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(),
                                                  [](std::uint8_t b) { return b != 0; }));
}

LabPixel gray_to_lab(double g) {
    return LabPixel{100.0 * g / 255.0, 0.0, 0.0};
}

std::vector<LabPixel> to_lab(const GrayImage& img) {
    std::vector<LabPixel> out(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) out[i] = gray_to_lab(img.data[i]);
    return out;
}

void validate_image(const GrayImage& img) {
    if (img.width < 2 || img.height < 2)
        throw std::invalid_argument("image dimensions must be at least 2x2");
    if (img.data.size() != static_cast<std::size_t>(img.width) * img.height)
        throw std::invalid_argument("image data length does not match dimensions");
    for (double v : img.data) {
        if (!std::isfinite(v) || v < 0.0 || v > 255.0)
            throw std::invalid_argument("image intensity outside [0,255]");
    }
}

}  // namespace msl
