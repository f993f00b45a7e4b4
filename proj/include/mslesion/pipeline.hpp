#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mslesion/brain.hpp"
#include "mslesion/evalx.hpp"
#include "mslesion/texfeat.hpp"

namespace msl {

struct PipelineConfig {
    std::uint64_t seed = 1;
    // brain extraction
    int radius = 2;
    std::string element = "disc";
    double threshold_override = -1.0;
    // superpixels
    int k = 500;
    double m = 5.0;
    int slic_max_iters = 10;
    double slic_tol = 0.5;
    bool slic_squared = false;
    double bright_quantile = 0.9;
    // transform + features
    std::string wavelet = "haar";
    int levels = 2;
    std::string sources = "A1,H1,V1,D1";
    double overlap = 0.5;
    // reduction + classifier
    std::size_t pca_r = 10;
    std::string kernel = "polynomial";
    double gamma = -1.0;  // <= 0: 1/n_features
    double coef = 1.0;
    int degree = 3;
    double C = 1.0;
    double svm_tol = 1e-3;
    // evaluation
    std::string cv = "kfold:10";
    int min_lesion_count = 1;
};

// key = value lines, '#' comments, unknown keys rejected
PipelineConfig load_config(const std::string& path);
void set_config_key(PipelineConfig& cfg, const std::string& key, const std::string& value);
std::string render_config(const PipelineConfig& cfg);
void validate_config(const PipelineConfig& cfg);

struct ManifestNotFound : std::runtime_error {
    ManifestNotFound() : std::runtime_error("manifest.csv not found") {}
};

struct DatasetCase {
    int id = 0;
    std::string image_path;
    std::string truth_path;  // empty if absent
    int label = 0;           // 1 lesion, 0 healthy
};

// Reads <dir>/manifest.csv (id,label,...) and resolves case_<id> image files.
std::vector<DatasetCase> load_manifest(const std::string& dir);

void save_features_csv(const FeatureMatrix& fm, const std::string& path);
FeatureMatrix load_features_csv(const std::string& path);

// extract -> segment -> prune -> dwt -> features for one image.
// truth may be null (labels default to 0). Stage artifacts land under
// out_dir/<stage>/ when out_dir is non-empty.
FeatureMatrix featurize_case(const GrayImage& img, const BinaryMask* truth, int case_id,
                             const PipelineConfig& cfg, const std::string& out_dir = "");

// Whole-dataset featurization, parallel per case, rows ordered by
// (image id, superpixel id).
FeatureMatrix featurize_dataset(const std::vector<DatasetCase>& cases,
                                const PipelineConfig& cfg, const std::string& out_dir = "");

struct PipelineResult {
    MetricsReport metrics;
    std::vector<KernelTableRow> table;
};

// Full run: featurize, write stage artifacts, evaluate the configured
// kernel/cv pair, emit the six-row kernel table.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& data_dir,
                            const std::string& out_dir);

// lossless text raster, used for resumable subband artifacts
void save_raster_txt(const GrayImage& img, const std::string& path);
GrayImage load_raster_txt(const std::string& path);

}  // namespace msl
