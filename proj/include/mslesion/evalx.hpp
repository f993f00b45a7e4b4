#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mslesion/pca.hpp"
#include "mslesion/svm.hpp"
#include "mslesion/texfeat.hpp"

namespace msl {

enum class SplitMethod { KFold, Holdout };

struct SplitSpec {
    SplitMethod method = SplitMethod::KFold;
    int k = 10;                  // kfold
    double test_fraction = 0.3;  // holdout
    std::uint64_t seed = 1;
};

SplitSpec parse_split(const std::string& text);  // "kfold:10" or "holdout:0.3"
std::string split_name(const SplitSpec& spec);

// fold id per group, aligned with the input group order. For holdout,
// fold 1 is the test set (ceil(f*n) groups) and fold 0 the training set.
struct SplitPlan {
    SplitSpec spec;
    std::vector<int> assignments;
    int rounds = 0;  // evaluation rounds: k for kfold, 1 for holdout
    int test_fold(int round) const { return spec.method == SplitMethod::KFold ? round : 1; }
};

SplitPlan make_splits(const std::vector<int>& groups, const SplitSpec& spec);

struct Confusion {
    long tp = 0, fp = 0, fn = 0, tn = 0;
    long total() const { return tp + fp + fn + tn; }
    double accuracy() const { return total() ? static_cast<double>(tp + tn) / total() : 0.0; }
    double sensitivity() const { return tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0; }
    double specificity() const { return tn + fp ? static_cast<double>(tn) / (tn + fp) : 0.0; }
};

struct FoldDiag {
    int fold = 0;
    std::vector<double> pca_mean;  // training-only PCA mean, for leakage checks
    KktAudit kkt;
    Confusion superpixel;
    Confusion image;
};

struct MetricsReport {
    Confusion superpixel;
    Confusion image;
    std::vector<FoldDiag> folds;
};

struct EvalOptions {
    std::size_t pca_r = 10;
    double svm_tol = 1e-3;
    int min_lesion_count = 1;  // superpixels flagged lesion for an abnormal image
    // image id -> true class (1 lesion, 0 healthy); derived from superpixel
    // labels when empty
    std::map<int, int> image_labels;
};

// Per round: fit PCA and SVM on training images only, predict the held-out
// superpixels, aggregate to image level. Throws "degenerate fold" when a
// training fold carries a single class.
MetricsReport evaluate(const FeatureMatrix& dataset, const SplitPlan& plan,
                       const KernelSpec& kspec, double C, const EvalOptions& opts = {});

struct KernelTableRow {
    std::string kernel;
    std::string method;
    double accuracy = 0.0;  // image level
    double superpixel_accuracy = 0.0;
};

// {rbf, polynomial d=3, quadratic} x {10-fold, holdout 0.3}: six rows.
std::vector<KernelTableRow> kernel_table(const FeatureMatrix& dataset, std::uint64_t seed,
                                         double C, const EvalOptions& opts = {});

}  // namespace msl
