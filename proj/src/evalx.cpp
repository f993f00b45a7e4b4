#include "mslesion/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mslesion/parallel.hpp"
#include "mslesion/rng.hpp"

namespace msl {

SplitSpec parse_split(const std::string& text) {
    SplitSpec spec;
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (head == "kfold") {
        spec.method = SplitMethod::KFold;
        spec.k = arg.empty() ? 10 : std::stoi(arg);
        if (spec.k < 2) throw std::invalid_argument("kfold needs k >= 2");
    } else if (head == "holdout") {
        spec.method = SplitMethod::Holdout;
        spec.test_fraction = arg.empty() ? 0.3 : std::stod(arg);
        if (spec.test_fraction <= 0.0 || spec.test_fraction >= 1.0)
            throw std::invalid_argument("holdout fraction must be in (0,1)");
    } else {
        throw std::invalid_argument("unknown cv method: " + text);
    }
    return spec;
}

std::string split_name(const SplitSpec& spec) {
    if (spec.method == SplitMethod::KFold) return std::to_string(spec.k) + "-fold";
    char buf[32];
    std::snprintf(buf, sizeof buf, "holdout(%g)", spec.test_fraction);
    return buf;
}

SplitPlan make_splits(const std::vector<int>& groups, const SplitSpec& spec) {
    const std::size_t n = groups.size();
    SplitPlan plan;
    plan.spec = spec;
    plan.assignments.assign(n, 0);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    DetRng rng(spec.seed);
    rng.shuffle(order);

    if (spec.method == SplitMethod::KFold) {
        if (n < static_cast<std::size_t>(spec.k)) throw std::invalid_argument("too few groups");
        for (std::size_t pos = 0; pos < n; ++pos)
            plan.assignments[order[pos]] = static_cast<int>(pos % spec.k);
        plan.rounds = spec.k;
    } else {
        if (n < 2) throw std::invalid_argument("too few groups");
        const std::size_t n_test =
            static_cast<std::size_t>(std::ceil(spec.test_fraction * static_cast<double>(n)));
        if (n_test == 0 || n_test >= n) throw std::invalid_argument("too few groups");
        for (std::size_t pos = 0; pos < n; ++pos)
            plan.assignments[order[pos]] = pos < n_test ? 1 : 0;
        plan.rounds = 1;
    }
    return plan;
}

namespace {

std::vector<int> image_ids_of(const FeatureMatrix& dataset) {
    std::set<int> ids;
    for (const auto& p : dataset.provenance) ids.insert(p.image);
    return {ids.begin(), ids.end()};
}

}  // namespace

MetricsReport evaluate(const FeatureMatrix& dataset, const SplitPlan& plan,
                       const KernelSpec& kspec, double C, const EvalOptions& opts) {
    if (dataset.rows.empty()) throw std::invalid_argument("empty dataset");
    if (dataset.labels.size() != dataset.rows.size() ||
        dataset.provenance.size() != dataset.rows.size())
        throw std::invalid_argument("dataset rows must carry labels and provenance");

    const std::vector<int> images = image_ids_of(dataset);
    if (plan.assignments.size() != images.size())
        throw std::invalid_argument("split plan does not match the dataset's images");
    std::map<int, int> fold_of;
    for (std::size_t i = 0; i < images.size(); ++i) fold_of[images[i]] = plan.assignments[i];

    std::map<int, int> truth = opts.image_labels;
    if (truth.empty()) {
        for (int id : images) truth[id] = 0;
        for (std::size_t i = 0; i < dataset.rows.size(); ++i)
            if (dataset.labels[i] == 1) truth[dataset.provenance[i].image] = 1;
    }

    MetricsReport report;
    report.folds.resize(plan.rounds);

    parallel_for(static_cast<std::size_t>(plan.rounds), [&](std::size_t round) {
        const int test_fold = plan.test_fold(static_cast<int>(round));
        std::vector<std::vector<double>> train_rows;
        std::vector<int> train_labels;
        std::vector<std::size_t> test_idx;
        for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
            if (fold_of.at(dataset.provenance[i].image) == test_fold) {
                test_idx.push_back(i);
            } else {
                train_rows.push_back(dataset.rows[i]);
                train_labels.push_back(dataset.labels[i] == 1 ? 1 : -1);
            }
        }
        const bool has_pos = std::count(train_labels.begin(), train_labels.end(), 1) > 0;
        const bool has_neg = std::count(train_labels.begin(), train_labels.end(), -1) > 0;
        if (train_rows.empty() || test_idx.empty() || !has_pos || !has_neg)
            throw std::runtime_error("degenerate fold");

        const std::size_t r = std::min(opts.pca_r, train_rows[0].size());
        const PcaModel pca = pca_fit(train_rows, r);
        std::vector<std::vector<double>> train_red(train_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i)
            train_red[i] = pca_transform(pca, train_rows[i], r);

        SvmTrainInfo tinfo;
        const SvmModel model = svm_train(train_red, train_labels, kspec, C, opts.svm_tol, &tinfo);

        FoldDiag& diag = report.folds[round];
        diag.fold = static_cast<int>(round);
        diag.pca_mean = pca.mean;
        diag.kkt = kkt_audit(model, train_red, train_labels, tinfo.alphas, opts.svm_tol);

        std::map<int, long> lesion_hits;
        std::set<int> test_images;
        for (std::size_t i : test_idx) {
            const int img = dataset.provenance[i].image;
            test_images.insert(img);
            const auto reduced = pca_transform(pca, dataset.rows[i], r);
            const int pred = svm_predict(model, reduced);
            const int want = dataset.labels[i] == 1 ? 1 : -1;
            if (want == 1 && pred == 1) ++diag.superpixel.tp;
            if (want == -1 && pred == 1) ++diag.superpixel.fp;
            if (want == 1 && pred == -1) ++diag.superpixel.fn;
            if (want == -1 && pred == -1) ++diag.superpixel.tn;
            if (pred == 1) ++lesion_hits[img];
        }
        for (int img : test_images) {
            const bool pred_abnormal = lesion_hits[img] >= opts.min_lesion_count;
            const bool is_abnormal = truth.at(img) == 1;
            if (is_abnormal && pred_abnormal) ++diag.image.tp;
            if (!is_abnormal && pred_abnormal) ++diag.image.fp;
            if (is_abnormal && !pred_abnormal) ++diag.image.fn;
            if (!is_abnormal && !pred_abnormal) ++diag.image.tn;
        }
    });

    for (const FoldDiag& diag : report.folds) {
        report.superpixel.tp += diag.superpixel.tp;
        report.superpixel.fp += diag.superpixel.fp;
        report.superpixel.fn += diag.superpixel.fn;
        report.superpixel.tn += diag.superpixel.tn;
        report.image.tp += diag.image.tp;
        report.image.fp += diag.image.fp;
        report.image.fn += diag.image.fn;
        report.image.tn += diag.image.tn;
    }
    return report;
}

std::vector<KernelTableRow> kernel_table(const FeatureMatrix& dataset, std::uint64_t seed,
                                         double C, const EvalOptions& opts) {
    const std::vector<int> images = image_ids_of(dataset);

    std::vector<KernelSpec> kernels(3);
    kernels[0].kind = KernelKind::Rbf;
    kernels[1].kind = KernelKind::Polynomial;
    kernels[1].degree = 3;
    kernels[2].kind = KernelKind::Polynomial;
    kernels[2].degree = 2;
    const char* kernel_labels[3] = {"rbf", "polynomial", "quadratic"};

    std::vector<SplitSpec> methods(2);
    methods[0].method = SplitMethod::KFold;
    methods[0].k = 10;
    methods[0].seed = seed;
    methods[1].method = SplitMethod::Holdout;
    methods[1].test_fraction = 0.3;
    methods[1].seed = seed;

    std::vector<KernelTableRow> table;
    for (int ki = 0; ki < 3; ++ki) {
        for (const SplitSpec& ms : methods) {
            const SplitPlan plan = make_splits(images, ms);
            const MetricsReport rep = evaluate(dataset, plan, kernels[ki], C, opts);
            KernelTableRow row;
            row.kernel = kernel_labels[ki];
            row.method = split_name(ms);
            row.accuracy = rep.image.accuracy();
            row.superpixel_accuracy = rep.superpixel.accuracy();
            table.push_back(row);
        }
    }
    return table;
}

}  // namespace msl
