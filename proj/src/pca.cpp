#include "mslesion/pca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace msl {

namespace {

double off_diagonal_sq(const std::vector<std::vector<double>>& a) {
    const std::size_t n = a.size();
    double s = 0;
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) s += 2.0 * a[p][q] * a[p][q];
    return s;
}

}  // namespace

void jacobi_eigen(std::vector<std::vector<double>>& a, std::vector<double>& eigenvalues,
                  std::vector<std::vector<double>>& vectors) {
    const std::size_t n = a.size();
    for (const auto& row : a)
        if (row.size() != n) throw std::invalid_argument("matrix not square");

    vectors.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) vectors[i][i] = 1.0;
    eigenvalues.resize(n);
    if (n == 0) return;

    double fro = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) fro += a[i][j] * a[i][j];
    // stop when the off-diagonal norm is negligible at the matrix's own scale
    const double target = 1e-12 * std::max(1.0, std::sqrt(fro));
    const double target_sq = target * target;

    for (int sweep = 0; sweep < 100 && off_diagonal_sq(a) > target_sq; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p][q];
                if (apq == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 1.0 / (2.0 * theta);
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a[p][p], aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a[i][p], aiq = a[i][q];
                    a[i][p] = aip - s * (aiq + tau * aip);
                    a[p][i] = a[i][p];
                    a[i][q] = aiq + s * (aip - tau * aiq);
                    a[q][i] = a[i][q];
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = vectors[i][p], viq = vectors[i][q];
                    vectors[i][p] = vip - s * (viq + tau * vip);
                    vectors[i][q] = viq + s * (vip - tau * viq);
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a[i][i];
}

PcaModel pca_fit(const std::vector<std::vector<double>>& rows, std::size_t r) {
    if (rows.size() < 2) throw std::invalid_argument("fewer than 2 rows");
    const std::size_t n = rows[0].size();
    if (n == 0) throw std::invalid_argument("empty feature vectors");
    for (const auto& row : rows) {
        if (row.size() != n) throw std::invalid_argument("dimension mismatch");
        for (double v : row)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature values");
    }
    if (r > n) throw std::invalid_argument("retained count exceeds dimensionality");

    PcaModel model;
    model.n = n;
    model.retained = r == 0 ? n : r;
    model.mean.assign(n, 0.0);
    const double k = static_cast<double>(rows.size());
    for (const auto& row : rows)
        for (std::size_t j = 0; j < n; ++j) model.mean[j] += row[j];
    for (std::size_t j = 0; j < n; ++j) model.mean[j] /= k;

    std::vector<std::vector<double>> cov(n, std::vector<double>(n, 0.0));
    std::vector<double> d(n);
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < n; ++j) d[j] = row[j] - model.mean[j];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) cov[i][j] += d[i] * d[j];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            cov[i][j] /= k;
            cov[j][i] = cov[i][j];
        }

    std::vector<double> evals;
    std::vector<std::vector<double>> evecs;
    jacobi_eigen(cov, evals, evecs);

    // columns of evecs -> rows of the component matrix, sign-fixed
    std::vector<std::pair<double, std::vector<double>>> pairs(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = evecs[i][c];
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
        if (v[arg] < 0)
            for (double& x : v) x = -x;
        pairs[c] = {evals[c], std::move(v)};
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;  // repeated eigenvalue: first differing coordinate
    });
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (pairs[i].first == pairs[i + 1].first)
            std::cerr << "pca: repeated eigenvalue " << pairs[i].first << "\n";

    model.eigenvalues.resize(n);
    model.components.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        model.eigenvalues[i] = pairs[i].first;
        model.components[i] = std::move(pairs[i].second);
    }
    return model;
}

PcaModel pca_fit(const FeatureMatrix& X, std::size_t r) { return pca_fit(X.rows, r); }

std::vector<double> pca_transform(const PcaModel& model, const std::vector<double>& x,
                                  std::size_t r) {
    if (x.size() != model.n) throw std::invalid_argument("dimension mismatch");
    if (r == 0) r = model.retained;
    if (r > model.n) throw std::invalid_argument("retained count exceeds dimensionality");
    std::vector<double> y(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < model.n; ++j)
            s += model.components[i][j] * (x[j] - model.mean[j]);
        y[i] = s;
    }
    return y;
}

std::vector<double> pca_inverse(const PcaModel& model, const std::vector<double>& y) {
    if (y.size() > model.n) throw std::invalid_argument("dimension mismatch");
    std::vector<double> x = model.mean;
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = 0; j < model.n; ++j) x[j] += model.components[i][j] * y[i];
    return x;
}

std::size_t pick_r_by_variance(const PcaModel& model, double fraction) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw std::invalid_argument("fraction must be in (0,1]");
    double total = 0;
    for (double e : model.eigenvalues) total += std::max(e, 0.0);
    if (total <= 0) return 1;
    double acc = 0;
    for (std::size_t r = 0; r < model.eigenvalues.size(); ++r) {
        acc += std::max(model.eigenvalues[r], 0.0);
        if (acc >= fraction * total) return r + 1;
    }
    return model.eigenvalues.size();
}

namespace {

void write_row(std::FILE* f, const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i)
        std::fprintf(f, "%s%.17g", i ? " " : "", row[i]);
    std::fprintf(f, "\n");
}

}  // namespace

void save_pca(const PcaModel& model, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "pca %zu %zu\n", model.n, model.retained);
    write_row(f, model.mean);
    write_row(f, model.eigenvalues);
    for (const auto& row : model.components) write_row(f, row);
    std::fclose(f);
}

PcaModel load_pca(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string tag;
    PcaModel model;
    if (!(in >> tag >> model.n >> model.retained) || tag != "pca")
        throw std::runtime_error("bad pca model file: " + path);
    auto read_row = [&](std::vector<double>& row) {
        row.resize(model.n);
        for (auto& v : row)
            if (!(in >> v)) throw std::runtime_error("bad pca model file: " + path);
    };
    read_row(model.mean);
    read_row(model.eigenvalues);
    model.components.resize(model.n);
    for (auto& row : model.components) read_row(row);
    return model;
}

}  // namespace msl
