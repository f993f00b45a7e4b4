#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mslesion/image.hpp"

namespace msl {

// Orthonormal analysis filter pair. g0 is the quadrature mirror of h0:
// g0[i] = (-1)^i * h0[L-1-i].
struct WaveletSpec {
    std::string name;
    std::vector<double> h0;
    std::vector<double> g0;
};

// name is "haar" or "db2"
WaveletSpec make_wavelet(const std::string& name);

// Periodic (circular) convolution with h0/g0, downsampled by 2.
// Output lengths are ceil(n/2). Throws if the signal is shorter than the filter.
std::pair<std::vector<double>, std::vector<double>> analyze_1d(const std::vector<double>& x,
                                                               const WaveletSpec& spec);

// Inverse of analyze_1d for even-length signals: adjoint of the circular
// analysis operator. approx and detail must have equal length m; returns 2m samples.
std::vector<double> synth_1d(const std::vector<double>& approx, const std::vector<double>& detail,
                             const WaveletSpec& spec);

// One decomposition level. src_width/src_height are the dimensions of the
// raster this level analyzed, before any odd-dimension edge padding; synthesis
// crops back to them.
struct LevelBands {
    GrayImage A, H, V, D;
    int src_width = 0;
    int src_height = 0;
};

struct SubbandSet {
    int levels = 0;
    std::vector<LevelBands> band;  // band[j] holds level j+1
};

// Rows filtered then columns; LL->A, LH->H, HL->V, HH->D; level 2 recurses on
// the level-1 approximation. Odd dimensions are padded by edge replication
// before analysis.
SubbandSet dwt2(const GrayImage& img, const WaveletSpec& spec, int levels);

// Synthesis filter bank; exact inverse of dwt2 up to rounding.
GrayImage idwt2(const SubbandSet& bands, const WaveletSpec& spec);

}  // namespace msl
