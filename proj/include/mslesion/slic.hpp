#pragma once

#include <cstdint>
#include <vector>

#include "mslesion/image.hpp"

namespace msl {

// Label given to pixels outside the region of interest.
inline constexpr std::uint32_t kBackgroundLabel = 0xFFFFFFFFu;

struct SlicParams {
    int k = 500;          // desired superpixel count
    double m = 5.0;       // compactness weight, [1,20]
    int max_iters = 10;
    double tol = 0.5;     // total L2 center movement below which iteration stops
    bool squared_distance = false;  // sqrt(d_lab^2 + (m*d_xy/S)^2) variant
};

struct ClusterCenter {
    double l = 0, a = 0, b = 0;
    double x = 0, y = 0;
};

struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> labels;   // row-major; kBackgroundLabel outside roi
    std::vector<ClusterCenter> centers;  // one per surviving label, id = index
    double interval = 0;                 // S = sqrt(N/k)

    std::uint32_t label_at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
    std::size_t n_labels() const { return centers.size(); }
};

// Per-iteration objective values; used to check monotone descent of the
// assignment step. Entry i holds the total Ds before and after assign i+1
// (both evaluated with that iteration's updated centers).
struct SegmentTrace {
    std::vector<double> objective_before_assign;
    std::vector<double> objective_after_assign;
    int iterations = 0;
    double final_center_movement = 0;
};

// Grid seeds at interval S, each perturbed to the lowest-gradient position in
// its 3x3 neighborhood. Ties keep the grid position, then the smallest
// row-major index. With a roi, only grid positions inside it produce seeds.
std::vector<ClusterCenter> seed_centers(const GrayImage& img, const SlicParams& params,
                                        const BinaryMask* roi = nullptr);

// Ds = d_lab + (m/S)*d_xy.
double slic_distance(const LabPixel& p, double px, double py, const ClusterCenter& c,
                     double m, double S);

LabelMap segment(const GrayImage& img, const SlicParams& params, const BinaryMask* roi = nullptr,
                 SegmentTrace* trace = nullptr);

// Drops superpixels touching the raster border (or the roi boundary), then
// superpixels brighter than the bright_quantile of all superpixel means that
// are 4-adjacent to an already dropped one. Returns the sorted surviving ids.
std::vector<std::uint32_t> prune_superpixels(const LabelMap& lm, const GrayImage& img,
                                             double bright_quantile = 0.9);

}  // namespace msl
