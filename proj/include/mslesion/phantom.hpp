#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mslesion/image.hpp"

namespace msl {

struct PhantomSpec {
    std::uint64_t seed = 1;
    int size = 128;  // pixels per side
    int n_lesion = 35;
    int n_healthy = 35;
    int lesion_count_min = 1;
    int lesion_count_max = 4;
    int lesion_radius_min = 3;  // pixels
    int lesion_radius_max = 9;
    double bg_mean = 10.0;
    double skull_mean = 220.0;
    double wm_mean = 110.0;
    double gm_mean = 140.0;
    double lesion_mean = 200.0;
    double noise_sigma = 8.0;
};

struct PhantomCase {
    int id = 0;
    GrayImage image;
    BinaryMask truth;  // all-zero for healthy cases
    bool lesion = false;
    int lesion_count = 0;
};

// Synthetic slice: brain ellipse over dark background, skull ring, smooth
// white/gray-matter field, bright lesion discs, additive Gaussian noise.
// Deterministic per (seed, case id); intensities are integers in [0,255] so
// in-memory pixels equal the exported PGM bytes.
std::vector<PhantomCase> generate_phantom(const PhantomSpec& spec);

// Writes case_<id>.pgm, truth_<id>.pgm and manifest.csv (id,label,lesions).
void export_phantom(const std::vector<PhantomCase>& cases, const std::string& dir);

}  // namespace msl
