// Acceptance harness. Runs the full-scale phantom pipeline once, then walks
// the release gates in order, printing one PASS/FAIL line per criterion.
// Exits nonzero if any gate fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "mslesion/brain.hpp"
#include "mslesion/dwt.hpp"
#include "mslesion/evalx.hpp"
#include "mslesion/pca.hpp"
#include "mslesion/phantom.hpp"
#include "mslesion/pipeline.hpp"
#include "mslesion/rng.hpp"
#include "mslesion/slic.hpp"
#include "mslesion/svm.hpp"
#include "mslesion/texfeat.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace msl;

namespace {

int failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %d. %s: %s\n", ok ? "PASS" : "FAIL", idx, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string num(double v, int prec = 4) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << v;
    return ss.str();
}

double band_energy(const GrayImage& b) {
    double e = 0;
    for (double v : b.data) e += v * v;
    return e;
}

bool bytes_differ(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() != b.size() ||
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0;
}

}  // namespace

int main() {
    const fs::path data_dir = fs::temp_directory_path() / "msl_acceptance_data";
    const fs::path out_dir = fs::temp_directory_path() / "msl_acceptance_out";
    fs::remove_all(data_dir);
    fs::remove_all(out_dir);

    // ---- full-scale run shared by criteria 1, 2, 7 and 9 ----
    PipelineResult result;
    bool ran = false;
    std::string run_error;
    double run_seconds = 0;
    try {
        const auto t0 = std::chrono::steady_clock::now();
        export_phantom(generate_phantom(PhantomSpec{}), data_dir.string());
        result = run_pipeline(PipelineConfig{}, data_dir.string(), out_dir.string());
        run_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ran = true;
    } catch (const std::exception& e) {
        run_error = std::string("pipeline failed: ") + e.what();
    }

    // 1. end-to-end phantom run: default 70 cases, default config
    if (ran) {
        const double acc = result.metrics.image.accuracy();
        report(1, "end-to-end phantom run", acc >= 0.95 && run_seconds <= 120.0,
               "image accuracy " + num(acc) + " (need >= 0.95), " + num(run_seconds, 3) +
                   " s (need <= 120)");
    } else {
        report(1, "end-to-end phantom run", false, run_error);
    }

    // 2. kernel table: six rows, every image-level accuracy >= 0.90
    if (ran) {
        bool ok = result.table.size() == 6;
        double min_acc = 1.0;
        for (const KernelTableRow& row : result.table) {
            min_acc = std::min(min_acc, row.accuracy);
            if (row.accuracy < 0.90) ok = false;
        }
        report(2, "kernel table shape", ok,
               num(static_cast<double>(result.table.size()), 1) + " rows, min accuracy " +
                   num(min_acc) + " (need >= 0.90)");
        std::printf("[INFO]    kernel table min accuracy %s vs the stricter 0.95 bar: %s\n",
                    num(min_acc).c_str(), min_acc >= 0.95 ? "meets it" : "below it");
    } else {
        report(2, "kernel table shape", false, run_error);
    }

    // 3. DWT: reconstruction and energy on 100 random even images; 2x2 haar exact
    {
        DetRng rng(101);
        double worst_pr = 0, worst_en = 0;
        const WaveletSpec wavelets[2] = {make_wavelet("haar"), make_wavelet("db2")};
        for (int trial = 0; trial < 100; ++trial) {
            const int w = 4 * (2 + rng.uniform_int(15));
            const int h = 4 * (2 + rng.uniform_int(15));
            GrayImage img(w, h);
            for (double& v : img.data) v = rng.uniform(0.0, 255.0);
            const double ein = band_energy(img);
            for (const WaveletSpec& wv : wavelets)
                for (int levels = 1; levels <= 2; ++levels) {
                    const SubbandSet bands = dwt2(img, wv, levels);
                    const GrayImage back = idwt2(bands, wv);
                    for (std::size_t i = 0; i < img.data.size(); ++i)
                        worst_pr = std::max(worst_pr, std::abs(back.data[i] - img.data[i]));
                    double eout = band_energy(bands.band[0].H) + band_energy(bands.band[0].V) +
                                  band_energy(bands.band[0].D);
                    if (levels == 1) {
                        eout += band_energy(bands.band[0].A);
                    } else {
                        eout += band_energy(bands.band[1].A) + band_energy(bands.band[1].H) +
                                band_energy(bands.band[1].V) + band_energy(bands.band[1].D);
                    }
                    worst_en = std::max(worst_en, std::abs(eout - ein) / std::max(1.0, ein));
                }
        }

        const WaveletSpec& haar = wavelets[0];
        const double s = haar.h0[0], g0 = haar.g0[0], g1 = haar.g0[1];
        GrayImage two(2, 2);
        two.at(0, 0) = 1.0;
        two.at(1, 0) = 2.0;
        two.at(0, 1) = 3.0;
        two.at(1, 1) = 4.0;
        const double lo_top = s * 1.0 + s * 2.0;
        const double hi_top = g0 * 1.0 + g1 * 2.0;
        const double lo_bot = s * 3.0 + s * 4.0;
        const double hi_bot = g0 * 3.0 + g1 * 4.0;
        const SubbandSet tb = dwt2(two, haar, 1);
        const bool exact = tb.band[0].A.at(0, 0) == s * lo_top + s * lo_bot &&
                           tb.band[0].H.at(0, 0) == g0 * lo_top + g1 * lo_bot &&
                           tb.band[0].V.at(0, 0) == s * hi_top + s * hi_bot &&
                           tb.band[0].D.at(0, 0) == g0 * hi_top + g1 * hi_bot;

        report(3, "DWT reconstruction and energy",
               worst_pr <= 1e-9 && worst_en <= 1e-9 && exact,
               "max abs error " + num(worst_pr, 3) + ", max energy rel error " +
                   num(worst_en, 3) + ", 2x2 haar exact: " + (exact ? "yes" : "no"));
    }

    // 4. moments vs the direct-summation oracle on 1000 multisets
    {
        DetRng rng(202);
        double worst = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const int n = 1 + rng.uniform_int(400);
            std::vector<double> v(n);
            for (double& x : v) x = rng.uniform(-50.0, 50.0);
            if (trial % 3 == 0)
                for (double& x : v) x = std::floor(x);
            const RegionStats got = region_moments(v);
            const oracle::Moments want = oracle::moments_direct(v);
            const double diffs[4] = {
                std::abs(got.mean - want.mean) / std::max(1.0, std::abs(want.mean)),
                std::abs(got.variance - want.variance) / std::max(1.0, std::abs(want.variance)),
                std::abs(got.skewness - want.skewness) / std::max(1.0, std::abs(want.skewness)),
                std::abs(got.kurtosis - want.kurtosis) / std::max(1.0, std::abs(want.kurtosis))};
            for (double d : diffs) worst = std::max(worst, d);
        }
        const bool flat_exact = region_moments({0.0, 2.0}).kurtosis == -2.0;
        report(4, "moments vs oracle", worst <= 1e-12 && flat_exact,
               "worst scaled deviation " + num(worst, 3) + ", {0,2} kurtosis exact: " +
                   (flat_exact ? "yes" : "no"));
    }

    // 5. PCA: diagonal transformed covariance, trace match, round trip, line case
    {
        DetRng rng(303);
        double worst_offdiag = 0, worst_trace = 0, worst_rt = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 40, d = 6;
            std::vector<std::vector<double>> rows(n, std::vector<double>(d));
            for (auto& r : rows)
                for (std::size_t j = 0; j < d; ++j)
                    r[j] = rng.uniform(-3.0, 3.0) * static_cast<double>(j + 1);

            std::vector<double> mean(d, 0.0);
            for (const auto& r : rows)
                for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / static_cast<double>(n);
            double trace = 0;
            for (std::size_t j = 0; j < d; ++j) {
                double s = 0;
                for (const auto& r : rows) s += (r[j] - mean[j]) * (r[j] - mean[j]);
                trace += s / static_cast<double>(n);
            }

            const PcaModel model = pca_fit(rows, d);
            double eig_sum = 0;
            for (double l : model.eigenvalues) eig_sum += l;
            worst_trace = std::max(worst_trace,
                                   std::abs(eig_sum - trace) / std::max(1.0, std::abs(trace)));

            std::vector<std::vector<double>> t(n);
            for (std::size_t i = 0; i < n; ++i) t[i] = pca_transform(model, rows[i], d);
            std::vector<double> tmean(d, 0.0);
            for (const auto& r : t)
                for (std::size_t j = 0; j < d; ++j) tmean[j] += r[j] / static_cast<double>(n);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = a + 1; b < d; ++b) {
                    double c = 0;
                    for (const auto& r : t) c += (r[a] - tmean[a]) * (r[b] - tmean[b]);
                    worst_offdiag = std::max(worst_offdiag,
                                             std::abs(c / static_cast<double>(n)));
                }

            for (std::size_t i = 0; i < n; ++i) {
                const auto back = pca_inverse(model, t[i]);
                for (std::size_t j = 0; j < d; ++j)
                    worst_rt = std::max(worst_rt, std::abs(back[j] - rows[i][j]));
            }
        }

        const std::vector<std::vector<double>> line = {{1, 2},   {2, 4},   {3, 6},
                                                       {-1, -2}, {-2, -4}, {-3, -6}};
        const PcaModel lm = pca_fit(line, 2);
        const double inv_r5 = 1.0 / std::sqrt(5.0);
        const double line_err = std::max(std::abs(lm.components[0][0] - inv_r5),
                                         std::abs(lm.components[0][1] - 2.0 * inv_r5));

        report(5, "PCA decomposition quality",
               worst_offdiag <= 1e-8 && worst_trace <= 1e-9 && worst_rt <= 1e-9 &&
                   line_err <= 1e-8,
               "off-diag " + num(worst_offdiag, 3) + ", trace rel " + num(worst_trace, 3) +
                   ", round trip " + num(worst_rt, 3) + ", line axis err " + num(line_err, 3));
    }

    // 6. SLIC: coverage, quadrant recall, monotone objective on 20 phantoms,
    //    determinism
    {
        GrayImage quad(20, 20);
        std::vector<std::uint32_t> quad_truth(400);
        const double vals[4] = {40, 90, 160, 220};
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 20; ++x) {
                const int q = (x >= 10 ? 1 : 0) + (y >= 10 ? 2 : 0);
                quad.at(x, y) = vals[q];
                quad_truth[static_cast<std::size_t>(y) * 20 + x] = static_cast<std::uint32_t>(q);
            }
        SlicParams qp;
        qp.k = 4;
        qp.m = 5.0;
        const LabelMap qlm = segment(quad, qp);
        const double recall = oracle::boundary_recall(qlm.labels, quad_truth, 20, 20);

        PhantomSpec pspec;
        pspec.seed = 77;
        pspec.n_lesion = 10;
        pspec.n_healthy = 10;
        const auto cases = generate_phantom(pspec);
        bool covered = true, monotone = true, deterministic = true;
        for (std::size_t ci = 0; ci < cases.size(); ++ci) {
            const GrayImage& img = cases[ci].image;
            const BrainMask brain = extract_brain(img);
            SlicParams params;
            params.k = 150;
            SegmentTrace trace;
            const LabelMap lm = segment(img, params, &brain.mask, &trace);
            for (int y = 0; y < lm.height && covered; ++y)
                for (int x = 0; x < lm.width; ++x) {
                    const bool in = brain.mask.at(x, y);
                    const std::uint32_t l = lm.label_at(x, y);
                    if (in ? l >= lm.n_labels() : l != kBackgroundLabel) {
                        covered = false;
                        break;
                    }
                }
            for (int i = 0; i < trace.iterations; ++i)
                if (trace.objective_after_assign[i] >
                    trace.objective_before_assign[i] + 1e-9)
                    monotone = false;
            if (ci < 3) {
                const LabelMap again = segment(img, params, &brain.mask);
                if (again.labels != lm.labels) deterministic = false;
            }
        }
        report(6, "SLIC segmentation properties",
               recall == 1.0 && covered && monotone && deterministic,
               "quadrant recall " + num(recall) + ", coverage " + (covered ? "ok" : "BROKEN") +
                   ", monotone " + (monotone ? "ok" : "BROKEN") + ", deterministic " +
                   (deterministic ? "ok" : "BROKEN"));
    }

    // 7. SVM: analytic case, fold KKT audits, grid oracle, XOR
    {
        KernelSpec linear;
        linear.kind = KernelKind::Linear;
        SvmTrainInfo info;
        const SvmModel two = svm_train({{-1.0}, {1.0}}, {-1, 1}, linear, 10.0, 1e-6, &info);
        const bool analytic = std::abs(info.alphas[0] - 0.5) <= 1e-6 &&
                              std::abs(info.alphas[1] - 0.5) <= 1e-6 &&
                              std::abs(two.bias) <= 1e-6;

        bool folds_pass = ran;
        if (ran)
            for (const FoldDiag& d : result.metrics.folds)
                if (!d.kkt.pass) folds_pass = false;

        DetRng rng(404);
        double worst_gap = 0;
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t n = 2 + trial % 3;
            std::vector<std::vector<double>> X(n, std::vector<double>(2));
            std::vector<int> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                X[i][0] = rng.uniform(-2.0, 2.0);
                X[i][1] = rng.uniform(-2.0, 2.0);
                y[i] = i % 2 == 0 ? 1 : -1;
            }
            const double C = trial % 3 == 0 ? 0.5 : (trial % 3 == 1 ? 1.0 : 10.0);
            KernelSpec spec;
            if (trial % 2 == 0) {
                spec.kind = KernelKind::Rbf;
                spec.gamma = 1.0;
            } else {
                spec.kind = KernelKind::Polynomial;
                spec.gamma = 1.0;
                spec.degree = 2;
            }
            SvmTrainInfo tinfo;
            const SvmModel model = svm_train(X, y, spec, C, 1e-4, &tinfo);
            std::vector<std::vector<double>> xs(n);
            for (std::size_t i = 0; i < n; ++i) xs[i] = apply_scaler(model.scaler, X[i]);
            std::vector<std::vector<double>> K(n, std::vector<double>(n));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    K[i][j] = kernel_eval(model.kernel, xs[i], xs[j]);
            const double grid = oracle::svm_dual_grid(K, y, C);
            worst_gap = std::max(worst_gap, std::abs(tinfo.dual_objective - grid));
        }

        const std::vector<std::vector<double>> xor_x = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
        const std::vector<int> xor_y = {1, 1, -1, -1};
        KernelSpec rbf;
        rbf.kind = KernelKind::Rbf;
        rbf.gamma = 1.0;
        const SvmModel xm = svm_train(xor_x, xor_y, rbf, 10.0);
        bool xor_ok = true;
        for (std::size_t i = 0; i < xor_x.size(); ++i)
            if (svm_predict(xm, xor_x[i]) != xor_y[i]) xor_ok = false;

        report(7, "SVM solver gates",
               analytic && folds_pass && worst_gap <= 1e-3 && xor_ok,
               std::string("analytic ") + (analytic ? "ok" : "BROKEN") + ", fold KKT " +
                   (folds_pass ? "all pass" : (ran ? "FAILED" : run_error.c_str())) +
                   ", worst dual gap " + num(worst_gap, 3) + ", XOR " +
                   (xor_ok ? "100%" : "BROKEN"));
    }

    // 8. Otsu equals the exhaustive oracle on 100 random histograms
    {
        DetRng rng(505);
        int mismatches = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const int w = 8 + rng.uniform_int(33), h = 8 + rng.uniform_int(33);
            GrayImage img(w, h);
            if (trial % 4 == 0) {
                const int levels = 2 + rng.uniform_int(5);
                for (double& v : img.data)
                    v = static_cast<double>(30 + 40 * rng.uniform_int(levels));
            } else {
                for (double& v : img.data) v = static_cast<double>(rng.uniform_int(256));
            }
            img.at(0, 0) = 10.0;  // keep the histogram non-degenerate
            img.at(1, 0) = 240.0;
            if (estimate_threshold(img) != oracle::otsu_exhaustive(img)) ++mismatches;
        }
        report(8, "Otsu vs exhaustive oracle", mismatches == 0,
               num(static_cast<double>(mismatches), 1) + " mismatches in 100 trials");
    }

    // 9. leakage guard: per-fold PCA means differ from the full-data mean
    if (ran) {
        const PcaModel full = load_pca((out_dir / "pca" / "model.txt").string());
        bool ok = !result.metrics.folds.empty();
        for (const FoldDiag& d : result.metrics.folds)
            if (!bytes_differ(d.pca_mean, full.mean)) ok = false;
        report(9, "fold-local PCA means", ok,
               ok ? "all " + num(static_cast<double>(result.metrics.folds.size()), 2) +
                        " fold means differ from the full-data mean"
                  : "a fold mean matches the full-data mean byte for byte");
    } else {
        report(9, "fold-local PCA means", false, run_error);
    }

    fs::remove_all(data_dir);
    fs::remove_all(out_dir);

    std::printf("acceptance: %d/9 criteria passed\n", 9 - failures);
    return failures == 0 ? 0 : 1;
}
