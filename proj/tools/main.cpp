#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mslesion/brain.hpp"
#include "mslesion/dwt.hpp"
#include "mslesion/evalx.hpp"
#include "mslesion/image_io.hpp"
#include "mslesion/pca.hpp"
#include "mslesion/phantom.hpp"
#include "mslesion/pipeline.hpp"
#include "mslesion/slic.hpp"
#include "mslesion/svm.hpp"
#include "mslesion/texfeat.hpp"

namespace fs = std::filesystem;
using namespace msl;

namespace {

GrayImage normalize_band(const GrayImage& band) {
    double lo = band.data[0], hi = band.data[0];
    for (double v : band.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    GrayImage out(band.width, band.height);
    const double span = hi - lo;
    if (span > 0)
        for (std::size_t i = 0; i < band.data.size(); ++i)
            out.data[i] = 255.0 * (band.data[i] - lo) / span;
    return out;
}

BinaryMask mask_from_image(const GrayImage& img) {
    BinaryMask m(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) m.set(x, y, img.at(x, y) > 127.0);
    return m;
}

void print_confusion(const char* scope, const Confusion& c) {
    std::printf("%-10s tp=%ld fp=%ld fn=%ld tn=%ld accuracy=%.4f sensitivity=%.4f specificity=%.4f\n",
                scope, c.tp, c.fp, c.fn, c.tn, c.accuracy(), c.sensitivity(), c.specificity());
}

void print_table(const std::vector<KernelTableRow>& table) {
    std::printf("%-12s %-14s %s\n", "kernel", "method", "accuracy");
    for (const KernelTableRow& row : table)
        std::printf("%-12s %-14s %.4f\n", row.kernel.c_str(), row.method.c_str(), row.accuracy);
}

KernelSpec kernel_from_flags(const std::string& name, double gamma, double coef, int degree) {
    KernelSpec spec = parse_kernel(name);
    if (name != "quadratic") spec.degree = degree;
    spec.gamma = gamma;
    spec.coef = coef;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MS lesion detection pipeline over superpixel wavelet features"};
    app.require_subcommand(1);

    // --- phantom ---
    auto* cmd_phantom = app.add_subcommand("phantom", "generate the synthetic dataset");
    PhantomSpec pspec;
    std::string phantom_out;
    cmd_phantom->add_option("--seed", pspec.seed);
    cmd_phantom->add_option("--size", pspec.size);
    cmd_phantom->add_option("--n-lesion", pspec.n_lesion);
    cmd_phantom->add_option("--n-healthy", pspec.n_healthy);
    cmd_phantom->add_option("--noise-sigma", pspec.noise_sigma);
    cmd_phantom->add_option("--out", phantom_out)->required();
    cmd_phantom->callback([&]() {
        export_phantom(generate_phantom(pspec), phantom_out);
        std::printf("wrote %d cases to %s\n", pspec.n_lesion + pspec.n_healthy,
                    phantom_out.c_str());
    });

    // --- extract ---
    auto* cmd_extract = app.add_subcommand("extract", "brain mask extraction");
    std::string ex_in, ex_out, ex_overlay, ex_element = "disc";
    int ex_radius = 2, ex_threshold = -1;
    cmd_extract->add_option("--in", ex_in)->required();
    cmd_extract->add_option("--out", ex_out);
    cmd_extract->add_option("--overlay", ex_overlay);
    cmd_extract->add_option("--radius", ex_radius);
    cmd_extract->add_option("--element", ex_element);
    cmd_extract->add_option("--threshold", ex_threshold);
    cmd_extract->callback([&]() {
        const GrayImage img = load_image(ex_in);
        ExtractOptions opts;
        opts.radius = ex_radius;
        opts.element = ex_element == "square" ? ElementShape::Square : ElementShape::Disc;
        opts.threshold_override = ex_threshold;
        const BrainMask brain = extract_brain(img, opts);
        std::printf("threshold=%g centroid=(%.2f, %.2f) pixels=%zu\n", brain.threshold,
                    brain.centroid_x, brain.centroid_y, brain.mask.count());
        if (!ex_out.empty()) {
            GrayImage m(img.width, img.height);
            for (std::size_t i = 0; i < m.data.size(); ++i)
                m.data[i] = brain.mask.bits[i] ? 255 : 0;
            save_pgm(m, ex_out);
        }
        if (!ex_overlay.empty()) save_overlay(img, brain.mask, ex_overlay);
    });

    // --- segment ---
    auto* cmd_segment = app.add_subcommand("segment", "superpixel segmentation and pruning");
    std::string sg_in, sg_mask, sg_labels, sg_overlay, sg_kept;
    SlicParams sg_params;
    double sg_quantile = 0.9;
    cmd_segment->add_option("--in", sg_in)->required();
    cmd_segment->add_option("--mask", sg_mask);
    cmd_segment->add_option("--k", sg_params.k);
    cmd_segment->add_option("--m", sg_params.m);
    cmd_segment->add_option("--max-iters", sg_params.max_iters);
    cmd_segment->add_option("--tol", sg_params.tol);
    cmd_segment->add_flag("--squared", sg_params.squared_distance);
    cmd_segment->add_option("--bright-quantile", sg_quantile);
    cmd_segment->add_option("--out-labels", sg_labels);
    cmd_segment->add_option("--overlay", sg_overlay);
    cmd_segment->add_option("--out-kept", sg_kept);
    cmd_segment->callback([&]() {
        const GrayImage img = load_image(sg_in);
        BinaryMask roi;
        const bool has_roi = !sg_mask.empty();
        if (has_roi) roi = mask_from_image(load_image(sg_mask));
        const LabelMap lm = segment(img, sg_params, has_roi ? &roi : nullptr);
        const auto kept = prune_superpixels(lm, img, sg_quantile);
        std::printf("superpixels=%zu kept=%zu\n", lm.n_labels(), kept.size());
        if (!sg_labels.empty()) save_pgm16(lm.labels, lm.width, lm.height, sg_labels);
        if (!sg_overlay.empty()) save_overlay(img, lm.labels, sg_overlay);
        if (!sg_kept.empty()) {
            std::ofstream out(sg_kept);
            for (auto l : kept) out << l << "\n";
        }
    });

    // --- dwt ---
    auto* cmd_dwt = app.add_subcommand("dwt", "wavelet decomposition");
    std::string dw_in, dw_dir = ".", dw_wavelet = "haar";
    int dw_levels = 2;
    cmd_dwt->add_option("--in", dw_in)->required();
    cmd_dwt->add_option("--wavelet", dw_wavelet);
    cmd_dwt->add_option("--levels", dw_levels);
    cmd_dwt->add_option("--out-dir", dw_dir);
    cmd_dwt->callback([&]() {
        const GrayImage img = load_image(dw_in);
        const SubbandSet bands = dwt2(img, make_wavelet(dw_wavelet), dw_levels);
        fs::create_directories(dw_dir);
        const std::string stem = fs::path(dw_in).stem().string();
        for (int lvl = 1; lvl <= bands.levels; ++lvl) {
            const LevelBands& lb = bands.band[lvl - 1];
            const std::pair<const char*, const GrayImage*> named[4] = {
                {"A", &lb.A}, {"H", &lb.H}, {"V", &lb.V}, {"D", &lb.D}};
            for (const auto& [tag, band] : named) {
                const std::string base =
                    stem + "_" + tag + std::to_string(lvl);
                save_pgm(normalize_band(*band), fs::path(dw_dir) / (base + ".pgm"));
                save_raster_txt(*band, (fs::path(dw_dir) / (base + ".txt")).string());
            }
        }
        std::printf("wrote %d subbands to %s\n", 4 * bands.levels, dw_dir.c_str());
    });

    // --- features ---
    auto* cmd_features = app.add_subcommand("features", "per-superpixel wavelet moments");
    std::string ft_in, ft_truth, ft_out;
    int ft_id = 0;
    PipelineConfig ft_cfg;
    cmd_features->add_option("--in", ft_in)->required();
    cmd_features->add_option("--truth", ft_truth);
    cmd_features->add_option("--id", ft_id);
    cmd_features->add_option("--out", ft_out)->required();
    cmd_features->add_option("--k", ft_cfg.k);
    cmd_features->add_option("--m", ft_cfg.m);
    cmd_features->add_option("--wavelet", ft_cfg.wavelet);
    cmd_features->add_option("--levels", ft_cfg.levels);
    cmd_features->add_option("--sources", ft_cfg.sources);
    cmd_features->add_option("--overlap", ft_cfg.overlap);
    cmd_features->add_option("--bright-quantile", ft_cfg.bright_quantile);
    cmd_features->add_option("--radius", ft_cfg.radius);
    cmd_features->callback([&]() {
        validate_config(ft_cfg);
        const GrayImage img = load_image(ft_in);
        BinaryMask truth;
        const bool has_truth = !ft_truth.empty();
        if (has_truth) truth = mask_from_image(load_image(ft_truth));
        const FeatureMatrix fm =
            featurize_case(img, has_truth ? &truth : nullptr, ft_id, ft_cfg);
        save_features_csv(fm, ft_out);
        std::printf("wrote %zu rows x %zu features to %s\n", fm.rows.size(), fm.dims,
                    ft_out.c_str());
    });

    // --- train ---
    auto* cmd_train = app.add_subcommand("train", "fit PCA + SVM on a feature csv");
    std::string tr_features, tr_dir = ".", tr_kernel = "polynomial";
    double tr_C = 1.0, tr_gamma = -1.0, tr_coef = 1.0, tr_tol = 1e-3;
    int tr_degree = 3;
    std::size_t tr_r = 10;
    cmd_train->add_option("--features", tr_features)->required();
    cmd_train->add_option("--out-dir", tr_dir);
    cmd_train->add_option("--kernel", tr_kernel);
    cmd_train->add_option("--C", tr_C);
    cmd_train->add_option("--gamma", tr_gamma);
    cmd_train->add_option("--coef", tr_coef);
    cmd_train->add_option("--degree", tr_degree);
    cmd_train->add_option("--pca-r", tr_r);
    cmd_train->add_option("--svm-tol", tr_tol);
    cmd_train->callback([&]() {
        const FeatureMatrix fm = load_features_csv(tr_features);
        const std::size_t r = std::min(tr_r, fm.dims);
        const PcaModel pca = pca_fit(fm, r);
        std::vector<std::vector<double>> red(fm.rows.size());
        std::vector<int> y(fm.rows.size());
        for (std::size_t i = 0; i < fm.rows.size(); ++i) {
            red[i] = pca_transform(pca, fm.rows[i], r);
            y[i] = fm.labels[i] == 1 ? 1 : -1;
        }
        SvmTrainInfo info;
        const KernelSpec spec = kernel_from_flags(tr_kernel, tr_gamma, tr_coef, tr_degree);
        const SvmModel model = svm_train(red, y, spec, tr_C, tr_tol, &info);
        fs::create_directories(tr_dir);
        save_pca(pca, (fs::path(tr_dir) / "pca_model.txt").string());
        save_svm(model, (fs::path(tr_dir) / "svm_model.txt").string());
        const KktAudit audit = kkt_audit(model, red, y, info.alphas, tr_tol);
        std::printf("rows=%zu support_vectors=%zu iterations=%d kkt=%s (worst %.3g)\n",
                    fm.rows.size(), model.support_vectors.size(), info.iterations,
                    audit.pass ? "pass" : "FAIL", audit.worst_violation);
    });

    // --- evaluate ---
    auto* cmd_eval = app.add_subcommand("evaluate", "cross-validated metrics");
    std::string ev_features, ev_cv = "kfold:10", ev_kernel = "polynomial", ev_out;
    double ev_C = 1.0, ev_gamma = -1.0, ev_coef = 1.0;
    int ev_degree = 3, ev_min_count = 1;
    std::size_t ev_r = 10;
    std::uint64_t ev_seed = 1;
    bool ev_table = false;
    cmd_eval->add_option("--features", ev_features)->required();
    cmd_eval->add_option("--cv", ev_cv);
    cmd_eval->add_option("--kernel", ev_kernel);
    cmd_eval->add_option("--seed", ev_seed);
    cmd_eval->add_option("--C", ev_C);
    cmd_eval->add_option("--gamma", ev_gamma);
    cmd_eval->add_option("--coef", ev_coef);
    cmd_eval->add_option("--degree", ev_degree);
    cmd_eval->add_option("--pca-r", ev_r);
    cmd_eval->add_option("--min-lesion-count", ev_min_count);
    cmd_eval->add_option("--out", ev_out);
    cmd_eval->add_flag("--kernel-table", ev_table);
    cmd_eval->callback([&]() {
        const FeatureMatrix fm = load_features_csv(ev_features);
        EvalOptions opts;
        opts.pca_r = std::min(ev_r, fm.dims);
        opts.min_lesion_count = ev_min_count;
        if (ev_table) {
            const auto table = kernel_table(fm, ev_seed, ev_C, opts);
            print_table(table);
            if (!ev_out.empty()) {
                std::ofstream out(ev_out, std::ios::binary);
                out << "kernel,method,accuracy\n";
                for (const auto& row : table) {
                    char buf[128];
                    std::snprintf(buf, sizeof buf, "%s,%s,%.6f\n", row.kernel.c_str(),
                                  row.method.c_str(), row.accuracy);
                    out << buf;
                }
            }
            return;
        }
        std::set<int> ids;
        for (const auto& p : fm.provenance) ids.insert(p.image);
        SplitSpec split = parse_split(ev_cv);
        split.seed = ev_seed;
        const SplitPlan plan = make_splits(std::vector<int>(ids.begin(), ids.end()), split);
        const KernelSpec spec = kernel_from_flags(ev_kernel, ev_gamma, ev_coef, ev_degree);
        const MetricsReport rep = evaluate(fm, plan, spec, ev_C, opts);
        print_confusion("superpixel", rep.superpixel);
        print_confusion("image", rep.image);
        if (!ev_out.empty()) {
            std::ofstream out(ev_out, std::ios::binary);
            out << "scope,fold,tp,fp,fn,tn,accuracy,sensitivity,specificity\n";
            auto line = [&](const char* scope, const std::string& fold, const Confusion& c) {
                char buf[192];
                std::snprintf(buf, sizeof buf, "%s,%s,%ld,%ld,%ld,%ld,%.6f,%.6f,%.6f\n", scope,
                              fold.c_str(), c.tp, c.fp, c.fn, c.tn, c.accuracy(),
                              c.sensitivity(), c.specificity());
                out << buf;
            };
            for (const FoldDiag& d : rep.folds) {
                line("superpixel", std::to_string(d.fold), d.superpixel);
                line("image", std::to_string(d.fold), d.image);
            }
            line("superpixel", "all", rep.superpixel);
            line("image", "all", rep.image);
        }
    });

    // --- pipeline ---
    auto* cmd_pipe = app.add_subcommand("pipeline", "full run driven by a config file");
    std::string pl_data, pl_out = "out", pl_config;
    std::vector<std::string> pl_sets;
    bool pl_dry = false, pl_print = false;
    cmd_pipe->add_option("--data", pl_data)->required();
    cmd_pipe->add_option("--out", pl_out);
    cmd_pipe->add_option("--config", pl_config);
    cmd_pipe->add_option("--set", pl_sets, "override config keys, key=value");
    cmd_pipe->add_flag("--dry-run", pl_dry);
    cmd_pipe->add_flag("--print-config", pl_print);
    cmd_pipe->callback([&]() {
        PipelineConfig cfg;
        if (!pl_config.empty()) cfg = load_config(pl_config);
        for (const std::string& kv : pl_sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("--set expects key=value, got " + kv);
            set_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        validate_config(cfg);
        if (pl_print || pl_dry) std::fputs(render_config(cfg).c_str(), stdout);
        if (pl_dry) return;
        const PipelineResult result = run_pipeline(cfg, pl_data, pl_out);
        print_confusion("superpixel", result.metrics.superpixel);
        print_confusion("image", result.metrics.image);
        print_table(result.table);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ManifestNotFound& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
