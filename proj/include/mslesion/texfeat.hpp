#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mslesion/dwt.hpp"
#include "mslesion/image.hpp"
#include "mslesion/slic.hpp"

namespace msl {

// mean, variance, skewness, kurtosis (excess). Constant regions use the
// sigma=0 convention: skewness and kurtosis are 0, never NaN.
struct RegionStats {
    double mean = 0;
    double variance = 0;
    double skewness = 0;
    double kurtosis = 0;
};

// Binned probability estimate; bin k covers [k*256/L, (k+1)*256/L).
std::vector<double> histogram_pdf(const std::vector<double>& values, int levels);

RegionStats region_moments(const std::vector<double>& values);

enum class Band { A, H, V, D };

struct SourceRef {
    int level = 1;
    Band band = Band::A;
};

// default feature sources: level-1 A, H, V, D
std::vector<SourceRef> default_sources();
std::vector<SourceRef> parse_sources(const std::string& text);  // "A1,H1,V1,D1"
std::string source_name(const SourceRef& s);

struct FeatureMatrix {
    std::size_t dims = 0;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;  // per-row class, 0 normal / 1 lesion; empty if unlabeled
    struct Provenance {
        int image = 0;
        std::uint32_t superpixel = 0;
    };
    std::vector<Provenance> provenance;
};

// Per kept superpixel, per source subband: the four moments over the subband
// pixels whose downsampled mask belongs to the superpixel. Rows whose
// downsampled mask is empty are dropped (and logged to stderr).
FeatureMatrix superpixel_features(const LabelMap& lm, const std::vector<std::uint32_t>& kept,
                                  const SubbandSet& bands,
                                  const std::vector<SourceRef>& sources);

// lesion (1) iff at least `overlap` fraction of the superpixel's pixels are
// truth-foreground; aligned with kept order.
std::vector<int> label_superpixels(const LabelMap& lm, const std::vector<std::uint32_t>& kept,
                                   const BinaryMask& truth, double overlap = 0.5);

}  // namespace msl
