#pragma once

#include "mslesion/image.hpp"

namespace msl {

// Skull-stripping analog for 2D slices: histogram threshold, binarization,
// largest-component selection and morphological refinement.

struct BrainMask {
    BinaryMask mask;      // exactly one 4-connected foreground component
    double threshold = 0;
    double centroid_x = 0;
    double centroid_y = 0;
};

enum class ElementShape { Disc, Square };

struct ExtractOptions {
    int radius = 2;
    ElementShape element = ElementShape::Disc;
    int threshold_override = -1;  // <0 means use Otsu
};

// Otsu: the t in [0,255] maximizing between-class variance of [0..t] vs
// [t+1..255]; smallest maximizer on ties. Intensities are binned to the
// nearest integer. Throws "degenerate histogram" when all mass falls in one bin.
int estimate_threshold(const GrayImage& img);

// bit(x,y) = 1 iff f(x,y) > th (strict).
BinaryMask binarize(const GrayImage& img, double th);

// Keeps the largest 4-connected component; ties go to the component with the
// smallest row-major start index. Throws on an empty mask.
BinaryMask largest_component(const BinaryMask& mask);

BinaryMask erode(const BinaryMask& mask, int radius, ElementShape shape = ElementShape::Disc);
BinaryMask dilate(const BinaryMask& mask, int radius, ElementShape shape = ElementShape::Disc);

// Morphological opening then closing, then largest component + centroid.
// Throws "mask eliminated by morphology" when opening leaves nothing.
BrainMask refine_mask(const BinaryMask& mask, int radius,
                      ElementShape shape = ElementShape::Disc, double threshold = 0.0);

// Full chain: threshold -> binarize -> largest component -> refine.
BrainMask extract_brain(const GrayImage& img, const ExtractOptions& opts = {});

}  // namespace msl
