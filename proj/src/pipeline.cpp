#include "mslesion/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mslesion/dwt.hpp"
#include "mslesion/image_io.hpp"
#include "mslesion/parallel.hpp"
#include "mslesion/slic.hpp"

namespace fs = std::filesystem;

namespace msl {

void set_config_key(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "seed")
            cfg.seed = std::stoull(value);
        else if (key == "radius")
            cfg.radius = std::stoi(value);
        else if (key == "element")
            cfg.element = value;
        else if (key == "threshold")
            cfg.threshold_override = std::stoi(value);
        else if (key == "k")
            cfg.k = std::stoi(value);
        else if (key == "m")
            cfg.m = std::stod(value);
        else if (key == "slic_max_iters")
            cfg.slic_max_iters = std::stoi(value);
        else if (key == "slic_tol")
            cfg.slic_tol = std::stod(value);
        else if (key == "slic_squared")
            cfg.slic_squared = value == "1" || value == "true";
        else if (key == "bright_quantile")
            cfg.bright_quantile = std::stod(value);
        else if (key == "wavelet")
            cfg.wavelet = value;
        else if (key == "levels")
            cfg.levels = std::stoi(value);
        else if (key == "sources")
            cfg.sources = value;
        else if (key == "overlap")
            cfg.overlap = std::stod(value);
        else if (key == "pca_r")
            cfg.pca_r = static_cast<std::size_t>(std::stoul(value));
        else if (key == "kernel")
            cfg.kernel = value;
        else if (key == "gamma")
            cfg.gamma = std::stod(value);
        else if (key == "coef")
            cfg.coef = std::stod(value);
        else if (key == "degree")
            cfg.degree = std::stoi(value);
        else if (key == "C")
            cfg.C = std::stod(value);
        else if (key == "svm_tol")
            cfg.svm_tol = std::stod(value);
        else if (key == "cv")
            cfg.cv = value;
        else if (key == "min_lesion_count")
            cfg.min_lesion_count = std::stoi(value);
        else
            throw std::invalid_argument("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value for config key " + key + ": " + value);
    }
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    PipelineConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        std::string key = line.substr(0, eq == std::string::npos ? line.size() : eq);
        auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        trim(key);
        if (key.empty()) continue;
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string value = line.substr(eq + 1);
        trim(value);
        set_config_key(cfg, key, value);
    }
    validate_config(cfg);
    return cfg;
}

std::string render_config(const PipelineConfig& cfg) {
    std::ostringstream out;
    out << "seed = " << cfg.seed << "\n";
    out << "radius = " << cfg.radius << "\n";
    out << "element = " << cfg.element << "\n";
    out << "threshold = " << cfg.threshold_override << "\n";
    out << "k = " << cfg.k << "\n";
    out << "m = " << cfg.m << "\n";
    out << "slic_max_iters = " << cfg.slic_max_iters << "\n";
    out << "slic_tol = " << cfg.slic_tol << "\n";
    out << "slic_squared = " << (cfg.slic_squared ? 1 : 0) << "\n";
    out << "bright_quantile = " << cfg.bright_quantile << "\n";
    out << "wavelet = " << cfg.wavelet << "\n";
    out << "levels = " << cfg.levels << "\n";
    out << "sources = " << cfg.sources << "\n";
    out << "overlap = " << cfg.overlap << "\n";
    out << "pca_r = " << cfg.pca_r << "\n";
    out << "kernel = " << cfg.kernel << "\n";
    out << "gamma = " << cfg.gamma << "\n";
    out << "coef = " << cfg.coef << "\n";
    out << "degree = " << cfg.degree << "\n";
    out << "C = " << cfg.C << "\n";
    out << "svm_tol = " << cfg.svm_tol << "\n";
    out << "cv = " << cfg.cv << "\n";
    out << "min_lesion_count = " << cfg.min_lesion_count << "\n";
    return out.str();
}

void validate_config(const PipelineConfig& cfg) {
    if (cfg.radius < 0) throw std::invalid_argument("radius must be >= 0");
    if (cfg.element != "disc" && cfg.element != "square")
        throw std::invalid_argument("element must be disc or square");
    if (cfg.k < 4) throw std::invalid_argument("k must be >= 4");
    if (cfg.m < 1.0 || cfg.m > 20.0) throw std::invalid_argument("m must be in [1, 20]");
    if (cfg.slic_max_iters < 0) throw std::invalid_argument("slic_max_iters must be >= 0");
    if (cfg.bright_quantile < 0.0 || cfg.bright_quantile > 1.0)
        throw std::invalid_argument("bright_quantile must be in [0,1]");
    make_wavelet(cfg.wavelet);
    if (cfg.levels < 1 || cfg.levels > 2) throw std::invalid_argument("levels must be 1 or 2");
    for (const SourceRef& s : parse_sources(cfg.sources))
        if (s.level > cfg.levels)
            throw std::invalid_argument("source " + source_name(s) + " exceeds levels");
    if (cfg.overlap < 0.0 || cfg.overlap > 1.0)
        throw std::invalid_argument("overlap must be in [0,1]");
    if (cfg.pca_r < 1) throw std::invalid_argument("pca_r must be >= 1");
    parse_kernel(cfg.kernel);
    if (cfg.degree < 1) throw std::invalid_argument("degree must be >= 1");
    if (cfg.C <= 0) throw std::invalid_argument("C must be positive");
    if (cfg.svm_tol <= 0) throw std::invalid_argument("svm_tol must be positive");
    parse_split(cfg.cv);
    if (cfg.min_lesion_count < 1) throw std::invalid_argument("min_lesion_count must be >= 1");
}

std::vector<DatasetCase> load_manifest(const std::string& dir) {
    const fs::path base(dir);
    const fs::path mpath = base / "manifest.csv";
    if (!fs::exists(mpath)) throw ManifestNotFound();
    std::ifstream in(mpath);
    if (!in) throw std::runtime_error("cannot open " + mpath.string());

    std::vector<DatasetCase> cases;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty manifest: " + mpath.string());
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id_s, label_s;
        if (!std::getline(row, id_s, ',') || !std::getline(row, label_s, ','))
            throw std::runtime_error("bad manifest row: " + line);
        DatasetCase c;
        c.id = std::stoi(id_s);
        c.label = label_s == "lesion" ? 1 : 0;
        const std::string stem = "case_" + std::to_string(c.id);
        for (const char* ext : {".pgm", ".png"}) {
            if (fs::exists(base / (stem + ext))) {
                c.image_path = (base / (stem + ext)).string();
                break;
            }
        }
        if (c.image_path.empty())
            throw std::runtime_error("image for case " + std::to_string(c.id) + " not found");
        const std::string tstem = "truth_" + std::to_string(c.id);
        for (const char* ext : {".pgm", ".png"}) {
            if (fs::exists(base / (tstem + ext))) {
                c.truth_path = (base / (tstem + ext)).string();
                break;
            }
        }
        cases.push_back(std::move(c));
    }
    std::sort(cases.begin(), cases.end(),
              [](const DatasetCase& a, const DatasetCase& b) { return a.id < b.id; });
    return cases;
}

void save_features_csv(const FeatureMatrix& fm, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "image,superpixel,label");
    for (std::size_t j = 0; j < fm.dims; ++j) std::fprintf(f, ",f%02zu", j);
    std::fprintf(f, "\n");
    for (std::size_t i = 0; i < fm.rows.size(); ++i) {
        const int label = fm.labels.empty() ? 0 : fm.labels[i];
        std::fprintf(f, "%d,%u,%d", fm.provenance[i].image, fm.provenance[i].superpixel, label);
        for (double v : fm.rows[i]) std::fprintf(f, ",%.17g", v);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

FeatureMatrix load_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty features csv: " + path);
    std::size_t dims = 0;
    {
        std::istringstream head(line);
        std::string col;
        int n = 0;
        while (std::getline(head, col, ',')) ++n;
        if (n < 4) throw std::runtime_error("bad features csv header: " + path);
        dims = static_cast<std::size_t>(n - 3);
    }
    FeatureMatrix fm;
    fm.dims = dims;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        FeatureMatrix::Provenance prov;
        std::getline(row, cell, ',');
        prov.image = std::stoi(cell);
        std::getline(row, cell, ',');
        prov.superpixel = static_cast<std::uint32_t>(std::stoul(cell));
        std::getline(row, cell, ',');
        fm.labels.push_back(std::stoi(cell));
        std::vector<double> vals;
        vals.reserve(dims);
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != dims) throw std::runtime_error("bad features csv row: " + line);
        fm.provenance.push_back(prov);
        fm.rows.push_back(std::move(vals));
    }
    return fm;
}

void save_raster_txt(const GrayImage& img, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "raster %d %d\n", img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            std::fprintf(f, "%s%.17g", x ? " " : "", img.at(x, y));
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

GrayImage load_raster_txt(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string tag;
    int w = 0, h = 0;
    if (!(in >> tag >> w >> h) || tag != "raster" || w < 1 || h < 1)
        throw std::runtime_error("bad raster file: " + path);
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (!(in >> img.at(x, y))) throw std::runtime_error("bad raster file: " + path);
    return img;
}

namespace {

[[noreturn]] void stage_error(const std::string& stage, int case_id, const std::exception& e) {
    throw std::runtime_error(stage + ": case " + std::to_string(case_id) + ": " + e.what());
}

}  // namespace

FeatureMatrix featurize_case(const GrayImage& img, const BinaryMask* truth, int case_id,
                             const PipelineConfig& cfg, const std::string& out_dir) {
    const bool save = !out_dir.empty();
    const fs::path out(out_dir);
    const std::string id = std::to_string(case_id);

    BrainMask brain;
    try {
        ExtractOptions opts;
        opts.radius = cfg.radius;
        opts.element = cfg.element == "square" ? ElementShape::Square : ElementShape::Disc;
        opts.threshold_override = cfg.threshold_override;
        brain = extract_brain(img, opts);
    } catch (const std::exception& e) {
        stage_error("extract", case_id, e);
    }
    if (save) {
        fs::create_directories(out / "extract");
        save_overlay(img, brain.mask, out / "extract" / ("mask_" + id + ".png"));
        GrayImage m(img.width, img.height);
        for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = brain.mask.bits[i] ? 255 : 0;
        save_pgm(m, out / "extract" / ("mask_" + id + ".pgm"));
    }

    LabelMap lm;
    try {
        SlicParams params;
        params.k = cfg.k;
        params.m = cfg.m;
        params.max_iters = cfg.slic_max_iters;
        params.tol = cfg.slic_tol;
        params.squared_distance = cfg.slic_squared;
        lm = segment(img, params, &brain.mask);
    } catch (const std::exception& e) {
        stage_error("segment", case_id, e);
    }
    if (save) {
        fs::create_directories(out / "segment");
        save_pgm16(lm.labels, lm.width, lm.height, out / "segment" / ("labels_" + id + ".pgm"));
        save_overlay(img, lm.labels, out / "segment" / ("overlay_" + id + ".png"));
    }

    std::vector<std::uint32_t> kept;
    try {
        kept = prune_superpixels(lm, img, cfg.bright_quantile);
    } catch (const std::exception& e) {
        stage_error("prune", case_id, e);
    }
    if (save) {
        fs::create_directories(out / "prune");
        std::ofstream kf(out / "prune" / ("kept_" + id + ".txt"));
        for (std::uint32_t l : kept) kf << l << "\n";
    }

    SubbandSet bands;
    try {
        bands = dwt2(img, make_wavelet(cfg.wavelet), cfg.levels);
    } catch (const std::exception& e) {
        stage_error("dwt", case_id, e);
    }
    if (save) {
        fs::create_directories(out / "dwt");
        for (int lvl = 1; lvl <= bands.levels; ++lvl) {
            const LevelBands& lb = bands.band[lvl - 1];
            const std::string suffix = std::to_string(lvl) + ".txt";
            save_raster_txt(lb.A, (out / "dwt" / ("case_" + id + "_A" + suffix)).string());
            save_raster_txt(lb.H, (out / "dwt" / ("case_" + id + "_H" + suffix)).string());
            save_raster_txt(lb.V, (out / "dwt" / ("case_" + id + "_V" + suffix)).string());
            save_raster_txt(lb.D, (out / "dwt" / ("case_" + id + "_D" + suffix)).string());
        }
    }

    FeatureMatrix fm;
    try {
        fm = superpixel_features(lm, kept, bands, parse_sources(cfg.sources));
        for (auto& p : fm.provenance) p.image = case_id;
        if (truth) {
            // rows surviving featurization keep their position in `kept`
            std::vector<std::uint32_t> surviving;
            surviving.reserve(fm.rows.size());
            for (const auto& p : fm.provenance) surviving.push_back(p.superpixel);
            fm.labels = label_superpixels(lm, surviving, *truth, cfg.overlap);
        } else {
            fm.labels.assign(fm.rows.size(), 0);
        }
    } catch (const std::exception& e) {
        stage_error("features", case_id, e);
    }
    return fm;
}

FeatureMatrix featurize_dataset(const std::vector<DatasetCase>& cases, const PipelineConfig& cfg,
                                const std::string& out_dir) {
    std::vector<FeatureMatrix> parts(cases.size());
    parallel_for(cases.size(), [&](std::size_t i) {
        const DatasetCase& c = cases[i];
        const GrayImage img = load_image(c.image_path);
        BinaryMask truth;
        bool has_truth = false;
        if (!c.truth_path.empty()) {
            const GrayImage t = load_image(c.truth_path);
            if (t.width != img.width || t.height != img.height)
                throw std::runtime_error("features: case " + std::to_string(c.id) +
                                         ": truth dimension mismatch");
            truth = BinaryMask(t.width, t.height);
            for (int y = 0; y < t.height; ++y)
                for (int x = 0; x < t.width; ++x) truth.set(x, y, t.at(x, y) > 127.0);
            has_truth = true;
        }
        parts[i] = featurize_case(img, has_truth ? &truth : nullptr, c.id, cfg, out_dir);
    });

    FeatureMatrix all;
    for (const FeatureMatrix& part : parts) {
        if (all.dims == 0) all.dims = part.dims;
        all.rows.insert(all.rows.end(), part.rows.begin(), part.rows.end());
        all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
        all.provenance.insert(all.provenance.end(), part.provenance.begin(),
                              part.provenance.end());
    }
    if (all.rows.empty()) throw std::runtime_error("no feature rows produced");
    return all;
}

namespace {

void write_metrics_csv(const MetricsReport& rep, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "scope,fold,tp,fp,fn,tn,accuracy,sensitivity,specificity\n");
    auto line = [&](const char* scope, const char* fold, const Confusion& c) {
        std::fprintf(f, "%s,%s,%ld,%ld,%ld,%ld,%.6f,%.6f,%.6f\n", scope, fold, c.tp, c.fp, c.fn,
                     c.tn, c.accuracy(), c.sensitivity(), c.specificity());
    };
    for (const FoldDiag& d : rep.folds) {
        const std::string fold = std::to_string(d.fold);
        line("superpixel", fold.c_str(), d.superpixel);
        line("image", fold.c_str(), d.image);
    }
    line("superpixel", "all", rep.superpixel);
    line("image", "all", rep.image);
    std::fclose(f);
}

void write_table_csv(const std::vector<KernelTableRow>& table, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "kernel,method,accuracy\n");
    for (const KernelTableRow& row : table)
        std::fprintf(f, "%s,%s,%.6f\n", row.kernel.c_str(), row.method.c_str(), row.accuracy);
    std::fclose(f);
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& data_dir,
                            const std::string& out_dir) {
    validate_config(cfg);
    const std::vector<DatasetCase> cases = load_manifest(data_dir);
    if (!out_dir.empty()) fs::create_directories(out_dir);

    const FeatureMatrix features = featurize_dataset(cases, cfg, out_dir);
    EvalOptions opts;
    opts.pca_r = std::min(cfg.pca_r, features.dims);
    opts.svm_tol = cfg.svm_tol;
    opts.min_lesion_count = cfg.min_lesion_count;
    for (const DatasetCase& c : cases) opts.image_labels[c.id] = c.label;

    const fs::path out(out_dir);
    if (!out_dir.empty()) {
        fs::create_directories(out / "features");
        save_features_csv(features, (out / "features" / "features.csv").string());
        fs::create_directories(out / "pca");
        save_pca(pca_fit(features, opts.pca_r), (out / "pca" / "model.txt").string());
    }

    KernelSpec kspec = parse_kernel(cfg.kernel);
    if (cfg.kernel != "quadratic") kspec.degree = cfg.degree;
    kspec.gamma = cfg.gamma;
    kspec.coef = cfg.coef;

    std::vector<int> image_ids;
    for (const DatasetCase& c : cases) image_ids.push_back(c.id);
    SplitSpec split = parse_split(cfg.cv);
    split.seed = cfg.seed;
    const SplitPlan plan = make_splits(image_ids, split);

    PipelineResult result;
    result.metrics = evaluate(features, plan, kspec, cfg.C, opts);

    if (!out_dir.empty()) {
        // per-fold svm models for resumability
        fs::create_directories(out / "train");
        for (int round = 0; round < plan.rounds; ++round) {
            const int test_fold = plan.test_fold(round);
            std::map<int, int> fold_of;
            for (std::size_t i = 0; i < image_ids.size(); ++i)
                fold_of[image_ids[i]] = plan.assignments[i];
            std::vector<std::vector<double>> train_rows;
            std::vector<int> train_labels;
            for (std::size_t i = 0; i < features.rows.size(); ++i) {
                if (fold_of.at(features.provenance[i].image) == test_fold) continue;
                train_rows.push_back(features.rows[i]);
                train_labels.push_back(features.labels[i] == 1 ? 1 : -1);
            }
            const PcaModel pca = pca_fit(train_rows, opts.pca_r);
            std::vector<std::vector<double>> red(train_rows.size());
            for (std::size_t i = 0; i < train_rows.size(); ++i)
                red[i] = pca_transform(pca, train_rows[i], opts.pca_r);
            const SvmModel model = svm_train(red, train_labels, kspec, cfg.C, cfg.svm_tol);
            save_pca(pca, (out / "train" / ("pca_fold" + std::to_string(round) + ".txt")).string());
            save_svm(model,
                     (out / "train" / ("svm_fold" + std::to_string(round) + ".txt")).string());
        }
    }

    result.table = kernel_table(features, cfg.seed, cfg.C, opts);
    if (!out_dir.empty()) {
        fs::create_directories(out / "evaluate");
        write_metrics_csv(result.metrics, (out / "evaluate" / "metrics.csv").string());
        write_table_csv(result.table, (out / "evaluate" / "kernel_table.csv").string());
    }
    return result;
}

}  // namespace msl
