#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <set>
#include <stdexcept>

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

namespace py = pybind11;
using namespace msl;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const DoubleArray& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2d array");
    GrayImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::memcpy(img.data.data(), a.data(), sizeof(double) * img.data.size());
    return img;
}

py::array_t<double> from_image(const GrayImage& img) {
    py::array_t<double> a({static_cast<py::ssize_t>(img.height),
                           static_cast<py::ssize_t>(img.width)});
    std::memcpy(a.mutable_data(), img.data.data(), sizeof(double) * img.data.size());
    return a;
}

BinaryMask to_mask(const ByteArray& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2d array");
    BinaryMask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    const std::uint8_t* src = a.data();
    for (std::size_t i = 0; i < m.bits.size(); ++i) m.bits[i] = src[i] ? 1 : 0;
    return m;
}

py::array_t<std::uint8_t> from_mask(const BinaryMask& m) {
    py::array_t<std::uint8_t> a({static_cast<py::ssize_t>(m.height),
                                 static_cast<py::ssize_t>(m.width)});
    std::memcpy(a.mutable_data(), m.bits.data(), m.bits.size());
    return a;
}

std::vector<std::vector<double>> to_rows(const DoubleArray& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2d array");
    const auto n = static_cast<std::size_t>(a.shape(0));
    const auto d = static_cast<std::size_t>(a.shape(1));
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    const double* src = a.data();
    for (std::size_t i = 0; i < n; ++i)
        std::copy(src + i * d, src + (i + 1) * d, rows[i].begin());
    return rows;
}

py::array_t<double> from_rows(const std::vector<std::vector<double>>& rows) {
    const auto n = static_cast<py::ssize_t>(rows.size());
    const auto d = static_cast<py::ssize_t>(rows.empty() ? 0 : rows[0].size());
    py::array_t<double> a({n, d});
    double* dst = a.mutable_data();
    for (const auto& row : rows) {
        std::copy(row.begin(), row.end(), dst);
        dst += row.size();
    }
    return a;
}

py::dict confusion_dict(const Confusion& c) {
    py::dict d;
    d["tp"] = c.tp;
    d["fp"] = c.fp;
    d["fn"] = c.fn;
    d["tn"] = c.tn;
    d["accuracy"] = c.accuracy();
    d["sensitivity"] = c.sensitivity();
    d["specificity"] = c.specificity();
    return d;
}

KernelSpec make_kernel(const std::string& name, double gamma, double coef, int degree) {
    KernelSpec spec = parse_kernel(name);
    if (name != "quadratic") spec.degree = degree;
    spec.gamma = gamma;
    spec.coef = coef;
    return spec;
}

SplitPlan plan_for(const FeatureMatrix& fm, const std::string& cv, std::uint64_t seed) {
    std::set<int> ids;
    for (const auto& p : fm.provenance) ids.insert(p.image);
    SplitSpec spec = parse_split(cv);
    spec.seed = seed;
    return make_splits(std::vector<int>(ids.begin(), ids.end()), spec);
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "MS lesion detection pipeline: superpixel wavelet features + kernel SVM";

    py::class_<LabelMap>(mod, "LabelMap")
        .def_readonly("width", &LabelMap::width)
        .def_readonly("height", &LabelMap::height)
        .def_readonly("interval", &LabelMap::interval)
        .def_property_readonly("n_labels", &LabelMap::n_labels)
        .def_property_readonly("labels", [](const LabelMap& lm) {
            py::array_t<std::uint32_t> a({static_cast<py::ssize_t>(lm.height),
                                          static_cast<py::ssize_t>(lm.width)});
            std::memcpy(a.mutable_data(), lm.labels.data(),
                        sizeof(std::uint32_t) * lm.labels.size());
            return a;
        });

    py::class_<SubbandSet>(mod, "SubbandSet")
        .def_readonly("levels", &SubbandSet::levels)
        .def("band", [](const SubbandSet& s, int level) {
            if (level < 1 || level > s.levels) throw std::out_of_range("bad level");
            const LevelBands& lb = s.band[static_cast<std::size_t>(level) - 1];
            py::dict d;
            d["A"] = from_image(lb.A);
            d["H"] = from_image(lb.H);
            d["V"] = from_image(lb.V);
            d["D"] = from_image(lb.D);
            return d;
        });

    py::class_<FeatureMatrix>(mod, "FeatureMatrix")
        .def_readonly("dims", &FeatureMatrix::dims)
        .def_property_readonly("features",
                               [](const FeatureMatrix& fm) { return from_rows(fm.rows); })
        .def_readonly("labels", &FeatureMatrix::labels)
        .def_property_readonly("images",
                               [](const FeatureMatrix& fm) {
                                   std::vector<int> out;
                                   for (const auto& p : fm.provenance) out.push_back(p.image);
                                   return out;
                               })
        .def_property_readonly("superpixels", [](const FeatureMatrix& fm) {
            std::vector<std::uint32_t> out;
            for (const auto& p : fm.provenance) out.push_back(p.superpixel);
            return out;
        });

    py::class_<PcaModel>(mod, "PcaModel")
        .def_readonly("n", &PcaModel::n)
        .def_readonly("retained", &PcaModel::retained)
        .def_readonly("mean", &PcaModel::mean)
        .def_readonly("eigenvalues", &PcaModel::eigenvalues)
        .def_property_readonly(
            "components", [](const PcaModel& m) { return from_rows(m.components); });

    py::class_<SvmModel>(mod, "SvmModel")
        .def_readonly("bias", &SvmModel::bias)
        .def_readonly("C", &SvmModel::C)
        .def_property_readonly("n_support", [](const SvmModel& m) {
            return m.support_vectors.size();
        });

    py::class_<PipelineConfig>(mod, "PipelineConfig")
        .def(py::init<>())
        .def_readwrite("seed", &PipelineConfig::seed)
        .def_readwrite("radius", &PipelineConfig::radius)
        .def_readwrite("element", &PipelineConfig::element)
        .def_readwrite("threshold_override", &PipelineConfig::threshold_override)
        .def_readwrite("k", &PipelineConfig::k)
        .def_readwrite("m", &PipelineConfig::m)
        .def_readwrite("slic_max_iters", &PipelineConfig::slic_max_iters)
        .def_readwrite("slic_tol", &PipelineConfig::slic_tol)
        .def_readwrite("slic_squared", &PipelineConfig::slic_squared)
        .def_readwrite("bright_quantile", &PipelineConfig::bright_quantile)
        .def_readwrite("wavelet", &PipelineConfig::wavelet)
        .def_readwrite("levels", &PipelineConfig::levels)
        .def_readwrite("sources", &PipelineConfig::sources)
        .def_readwrite("overlap", &PipelineConfig::overlap)
        .def_readwrite("pca_r", &PipelineConfig::pca_r)
        .def_readwrite("kernel", &PipelineConfig::kernel)
        .def_readwrite("gamma", &PipelineConfig::gamma)
        .def_readwrite("coef", &PipelineConfig::coef)
        .def_readwrite("degree", &PipelineConfig::degree)
        .def_readwrite("C", &PipelineConfig::C)
        .def_readwrite("svm_tol", &PipelineConfig::svm_tol)
        .def_readwrite("cv", &PipelineConfig::cv)
        .def_readwrite("min_lesion_count", &PipelineConfig::min_lesion_count);

    mod.def("load_image",
            [](const std::string& path) { return from_image(load_image(path)); });
    mod.def("save_pgm", [](const DoubleArray& img, const std::string& path) {
        save_pgm(to_image(img), path);
    });

    mod.def(
        "generate_phantom",
        [](std::uint64_t seed, int size, int n_lesion, int n_healthy, double noise_sigma) {
            PhantomSpec spec;
            spec.seed = seed;
            spec.size = size;
            spec.n_lesion = n_lesion;
            spec.n_healthy = n_healthy;
            spec.noise_sigma = noise_sigma;
            py::list out;
            for (const PhantomCase& c : generate_phantom(spec)) {
                py::dict d;
                d["id"] = c.id;
                d["image"] = from_image(c.image);
                d["truth"] = from_mask(c.truth);
                d["lesion"] = c.lesion;
                d["lesion_count"] = c.lesion_count;
                out.append(d);
            }
            return out;
        },
        py::arg("seed") = 1, py::arg("size") = 128, py::arg("n_lesion") = 35,
        py::arg("n_healthy") = 35, py::arg("noise_sigma") = 8.0);

    mod.def(
        "make_dataset",
        [](const std::string& dir, std::uint64_t seed, int size, int n_lesion, int n_healthy,
           double noise_sigma) {
            PhantomSpec spec;
            spec.seed = seed;
            spec.size = size;
            spec.n_lesion = n_lesion;
            spec.n_healthy = n_healthy;
            spec.noise_sigma = noise_sigma;
            export_phantom(generate_phantom(spec), dir);
        },
        py::arg("dir"), py::arg("seed") = 1, py::arg("size") = 128, py::arg("n_lesion") = 35,
        py::arg("n_healthy") = 35, py::arg("noise_sigma") = 8.0);

    mod.def(
        "extract_brain",
        [](const DoubleArray& img, int radius, const std::string& element, int threshold) {
            ExtractOptions opts;
            opts.radius = radius;
            opts.element = element == "square" ? ElementShape::Square : ElementShape::Disc;
            opts.threshold_override = threshold;
            const BrainMask brain = extract_brain(to_image(img), opts);
            py::dict d;
            d["mask"] = from_mask(brain.mask);
            d["threshold"] = brain.threshold;
            d["centroid"] = py::make_tuple(brain.centroid_x, brain.centroid_y);
            return d;
        },
        py::arg("image"), py::arg("radius") = 2, py::arg("element") = "disc",
        py::arg("threshold") = -1);

    mod.def(
        "segment",
        [](const DoubleArray& img, int k, double m, int max_iters, double tol, bool squared,
           const py::object& roi) {
            SlicParams params;
            params.k = k;
            params.m = m;
            params.max_iters = max_iters;
            params.tol = tol;
            params.squared_distance = squared;
            if (roi.is_none()) return segment(to_image(img), params, nullptr);
            const BinaryMask mask = to_mask(roi.cast<ByteArray>());
            return segment(to_image(img), params, &mask);
        },
        py::arg("image"), py::arg("k") = 500, py::arg("m") = 5.0, py::arg("max_iters") = 10,
        py::arg("tol") = 0.5, py::arg("squared") = false, py::arg("roi") = py::none());

    mod.def(
        "prune_superpixels",
        [](const LabelMap& lm, const DoubleArray& img, double bright_quantile) {
            return prune_superpixels(lm, to_image(img), bright_quantile);
        },
        py::arg("label_map"), py::arg("image"), py::arg("bright_quantile") = 0.9);

    mod.def(
        "dwt2",
        [](const DoubleArray& img, const std::string& wavelet, int levels) {
            return dwt2(to_image(img), make_wavelet(wavelet), levels);
        },
        py::arg("image"), py::arg("wavelet") = "haar", py::arg("levels") = 2);

    mod.def(
        "idwt2",
        [](const SubbandSet& bands, const std::string& wavelet) {
            return from_image(idwt2(bands, make_wavelet(wavelet)));
        },
        py::arg("bands"), py::arg("wavelet") = "haar");

    mod.def("region_moments", [](const std::vector<double>& values) {
        const RegionStats st = region_moments(values);
        py::dict d;
        d["mean"] = st.mean;
        d["variance"] = st.variance;
        d["skewness"] = st.skewness;
        d["kurtosis"] = st.kurtosis;
        return d;
    });

    mod.def(
        "featurize_case",
        [](const DoubleArray& img, const py::object& truth, int case_id,
           const PipelineConfig& cfg) {
            if (truth.is_none()) return featurize_case(to_image(img), nullptr, case_id, cfg);
            const BinaryMask mask = to_mask(truth.cast<ByteArray>());
            return featurize_case(to_image(img), &mask, case_id, cfg);
        },
        py::arg("image"), py::arg("truth") = py::none(), py::arg("case_id") = 0,
        py::arg("config") = PipelineConfig{});

    mod.def("save_features_csv", &save_features_csv);
    mod.def("load_features_csv", &load_features_csv);

    mod.def(
        "pca_fit",
        [](const DoubleArray& rows, std::size_t r) { return pca_fit(to_rows(rows), r); },
        py::arg("rows"), py::arg("r"));
    mod.def(
        "pca_transform",
        [](const PcaModel& model, const DoubleArray& rows, std::size_t r) {
            std::vector<std::vector<double>> out;
            for (const auto& row : to_rows(rows)) out.push_back(pca_transform(model, row, r));
            return from_rows(out);
        },
        py::arg("model"), py::arg("rows"), py::arg("r") = 0);
    mod.def(
        "pca_inverse",
        [](const PcaModel& model, const DoubleArray& rows) {
            std::vector<std::vector<double>> out;
            for (const auto& row : to_rows(rows)) out.push_back(pca_inverse(model, row));
            return from_rows(out);
        },
        py::arg("model"), py::arg("rows"));

    mod.def(
        "svm_train",
        [](const DoubleArray& X, const std::vector<int>& y, const std::string& kernel, double C,
           double gamma, double coef, int degree, double tol) {
            return svm_train(to_rows(X), y, make_kernel(kernel, gamma, coef, degree), C, tol);
        },
        py::arg("X"), py::arg("y"), py::arg("kernel") = "rbf", py::arg("C") = 1.0,
        py::arg("gamma") = -1.0, py::arg("coef") = 1.0, py::arg("degree") = 3,
        py::arg("tol") = 1e-3);
    mod.def("svm_predict", [](const SvmModel& model, const DoubleArray& X) {
        std::vector<int> out;
        for (const auto& row : to_rows(X)) out.push_back(svm_predict(model, row));
        return out;
    });
    mod.def("svm_decision", [](const SvmModel& model, const DoubleArray& X) {
        std::vector<double> out;
        for (const auto& row : to_rows(X)) out.push_back(svm_decision(model, row));
        return out;
    });

    mod.def(
        "evaluate",
        [](const FeatureMatrix& fm, const std::string& cv, const std::string& kernel,
           std::uint64_t seed, double C, double gamma, double coef, int degree,
           std::size_t pca_r, int min_lesion_count) {
            EvalOptions opts;
            opts.pca_r = std::min(pca_r, fm.dims);
            opts.min_lesion_count = min_lesion_count;
            const MetricsReport rep = evaluate(fm, plan_for(fm, cv, seed),
                                               make_kernel(kernel, gamma, coef, degree), C, opts);
            py::dict d;
            d["superpixel"] = confusion_dict(rep.superpixel);
            d["image"] = confusion_dict(rep.image);
            d["folds"] = static_cast<int>(rep.folds.size());
            return d;
        },
        py::arg("features"), py::arg("cv") = "kfold:10", py::arg("kernel") = "polynomial",
        py::arg("seed") = 1, py::arg("C") = 1.0, py::arg("gamma") = -1.0, py::arg("coef") = 1.0,
        py::arg("degree") = 3, py::arg("pca_r") = 10, py::arg("min_lesion_count") = 1);

    mod.def(
        "kernel_table",
        [](const FeatureMatrix& fm, std::uint64_t seed, double C, std::size_t pca_r) {
            EvalOptions opts;
            opts.pca_r = std::min(pca_r, fm.dims);
            py::list out;
            for (const KernelTableRow& row : kernel_table(fm, seed, C, opts))
                out.append(py::make_tuple(row.kernel, row.method, row.accuracy));
            return out;
        },
        py::arg("features"), py::arg("seed") = 1, py::arg("C") = 1.0, py::arg("pca_r") = 10);

    mod.def(
        "run_pipeline",
        [](const PipelineConfig& cfg, const std::string& data_dir, const std::string& out_dir) {
            const PipelineResult result = run_pipeline(cfg, data_dir, out_dir);
            py::dict d;
            d["superpixel"] = confusion_dict(result.metrics.superpixel);
            d["image"] = confusion_dict(result.metrics.image);
            py::list table;
            for (const KernelTableRow& row : result.table)
                table.append(py::make_tuple(row.kernel, row.method, row.accuracy));
            d["kernel_table"] = table;
            return d;
        },
        py::arg("config"), py::arg("data_dir"), py::arg("out_dir"));

    mod.def("load_config", &load_config);
    mod.def("render_config", &render_config);
}
