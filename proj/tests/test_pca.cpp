#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "mslesion/pca.hpp"
#include "mslesion/rng.hpp"
#include "oracles.hpp"

using namespace msl;

namespace {

std::vector<std::vector<double>> covariance_of(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows[0].size();
    const double k = static_cast<double>(rows.size());
    std::vector<double> mean(n, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < n; ++j) mean[j] += r[j] / k;
    std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
    for (const auto& r : rows)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / k;
    return c;
}

std::vector<std::vector<double>> random_rows(DetRng& rng, std::size_t k, std::size_t n) {
    std::vector<std::vector<double>> rows(k, std::vector<double>(n));
    for (auto& r : rows)
        for (auto& v : r) v = rng.uniform(-10.0, 10.0);
    return rows;
}

}  // namespace

TEST_CASE("line data gives one component along the line") {
    const std::vector<std::vector<double>> rows{{1, 2}, {2, 4}, {3, 6}, {-1, -2}, {-2, -4}, {-3, -6}};
    const PcaModel m = pca_fit(rows, 2);
    REQUIRE(m.n == 2);
    const double inv_sqrt5 = 1.0 / std::sqrt(5.0);
    CHECK(std::abs(m.components[0][0] - inv_sqrt5) <= 1e-8);
    CHECK(std::abs(m.components[0][1] - 2.0 * inv_sqrt5) <= 1e-8);
    CHECK(m.eigenvalues[1] == doctest::Approx(0.0).epsilon(1e-10));
    // rank-1 data reconstructs exactly from one component
    for (const auto& r : rows) {
        const auto back = pca_inverse(m, pca_transform(m, r, 1));
        CHECK(std::abs(back[0] - r[0]) <= 1e-9);
        CHECK(std::abs(back[1] - r[1]) <= 1e-9);
    }
}

TEST_CASE("identical rows give zero eigenvalues and zero transforms") {
    const std::vector<std::vector<double>> rows(5, std::vector<double>{3.0, -1.0, 7.0});
    const PcaModel m = pca_fit(rows, 3);
    for (double ev : m.eigenvalues) CHECK(std::abs(ev) <= 1e-12);
    const auto y = pca_transform(m, rows[0], 3);
    for (double v : y) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("axis-aligned data keeps the identity basis") {
    // var(x1)=4, var(x2)=1, cov=0
    const std::vector<std::vector<double>> rows{{2, 1}, {2, -1}, {-2, 1}, {-2, -1}};
    const PcaModel m = pca_fit(rows, 2);
    CHECK(m.eigenvalues[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(m.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m.components[0][0] - 1.0) <= 1e-10);
    CHECK(std::abs(m.components[0][1]) <= 1e-10);
    CHECK(std::abs(m.components[1][0]) <= 1e-10);
    CHECK(std::abs(m.components[1][1] - 1.0) <= 1e-10);
    // direct covariance of this toy is [[4,0],[0,1]]
    const auto c = covariance_of(rows);
    CHECK(c[0][0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(c[0][1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c[1][1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit rejects degenerate input") {
    CHECK_THROWS_AS(pca_fit(std::vector<std::vector<double>>{{1.0, 2.0}}, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(pca_fit(std::vector<std::vector<double>>{}, 2), std::invalid_argument);
    const std::vector<std::vector<double>> ragged{{1.0, 2.0}, {1.0}};
    CHECK_THROWS_AS(pca_fit(ragged, 2), std::invalid_argument);
}

TEST_CASE("transform at the mean is zero and full rank preserves norms") {
    DetRng rng(14);
    const auto rows = random_rows(rng, 12, 5);
    const PcaModel m = pca_fit(rows, 5);
    const auto zero = pca_transform(m, m.mean, 5);
    for (double v : zero) CHECK(std::abs(v) <= 1e-12);
    for (const auto& r : rows) {
        double centered = 0;
        for (std::size_t j = 0; j < 5; ++j)
            centered += (r[j] - m.mean[j]) * (r[j] - m.mean[j]);
        const auto y = pca_transform(m, r, 5);
        double ny = 0;
        for (double v : y) ny += v * v;
        CHECK(std::sqrt(ny) == doctest::Approx(std::sqrt(centered)).epsilon(1e-10));
        // full-rank round trip
        const auto back = pca_inverse(m, y);
        for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(back[j] - r[j]) <= 1e-9);
    }
    CHECK_THROWS_AS(pca_transform(m, std::vector<double>{1.0, 2.0}, 5), std::invalid_argument);
    CHECK_THROWS_AS(pca_transform(m, rows[0], 6), std::invalid_argument);
}

TEST_CASE("inverse of the zero vector is the mean") {
    DetRng rng(15);
    const auto rows = random_rows(rng, 8, 4);
    const PcaModel m = pca_fit(rows, 4);
    const auto x = pca_inverse(m, std::vector<double>(4, 0.0));
    for (std::size_t j = 0; j < 4; ++j) CHECK(x[j] == doctest::Approx(m.mean[j]).epsilon(1e-12));
    // shorter y vectors are padded with zeros
    const auto x1 = pca_inverse(m, std::vector<double>(1, 0.0));
    for (std::size_t j = 0; j < 4; ++j) CHECK(x1[j] == doctest::Approx(m.mean[j]).epsilon(1e-12));
}

TEST_CASE("model invariants on random data") {
    DetRng rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(8));
        const auto rows = random_rows(rng, 6 + static_cast<std::size_t>(rng.uniform_int(20)), n);
        const PcaModel m = pca_fit(rows, n);
        // orthonormal rows
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double dot = 0;
                for (std::size_t t = 0; t < n; ++t)
                    dot += m.components[i][t] * m.components[j][t];
                CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) <= 1e-9);
            }
        // descending non-negative eigenvalues
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(m.eigenvalues[i] >= -1e-10);
            if (i + 1 < n) CHECK(m.eigenvalues[i] >= m.eigenvalues[i + 1]);
        }
        // sum of eigenvalues equals the covariance trace
        const auto c = covariance_of(rows);
        double trace = 0, sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            trace += c[i][i];
            sum += m.eigenvalues[i];
        }
        CHECK(std::abs(sum - trace) <= 1e-9 * std::max(1.0, std::abs(trace)));
        // sign convention: the largest-magnitude entry of each row is positive
        for (std::size_t i = 0; i < n; ++i) {
            double best = 0;
            for (double v : m.components[i])
                if (std::abs(v) > std::abs(best)) best = v;
            CHECK(best >= 0.0);
        }
    }
}

TEST_CASE("transformed training data has diagonal covariance") {
    DetRng rng(17);
    const auto rows = random_rows(rng, 40, 6);
    const PcaModel m = pca_fit(rows, 6);
    std::vector<std::vector<double>> projected;
    for (const auto& r : rows) projected.push_back(pca_transform(m, r, 6));
    const auto c = covariance_of(projected);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            if (i != j) CHECK(std::abs(c[i][j]) <= 1e-8);
    // diagonal entries are the eigenvalues
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(c[i][i] == doctest::Approx(m.eigenvalues[i]).epsilon(1e-8));
}

TEST_CASE("eigenvalues match the characteristic-polynomial oracle") {
    DetRng rng(18);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = trial % 2 == 0 ? 2 : 3;
        const auto rows = random_rows(rng, 5 + static_cast<std::size_t>(rng.uniform_int(10)), n);
        const PcaModel m = pca_fit(rows, n);
        const auto want = oracle::charpoly_eigs(covariance_of(rows));
        REQUIRE(want.size() == n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(m.eigenvalues[i] - want[i]) <=
                  1e-8 * std::max(1.0, std::abs(want[i])));
    }
}

TEST_CASE("reconstruction error is monotone in retained count") {
    DetRng rng(19);
    const auto rows = random_rows(rng, 30, 8);
    const PcaModel m = pca_fit(rows, 8);
    double prev = -1.0;
    for (std::size_t r = 8; r >= 1; --r) {
        double err = 0;
        for (const auto& row : rows) {
            const auto back = pca_inverse(m, pca_transform(m, row, r));
            for (std::size_t j = 0; j < 8; ++j)
                err += (back[j] - row[j]) * (back[j] - row[j]);
        }
        CHECK(err >= prev - 1e-9);
        prev = err;
    }
}

TEST_CASE("repeated eigenvalues stay orthonormal and ordered") {
    // identity covariance: every direction ties
    const std::vector<std::vector<double>> rows{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    const PcaModel m = pca_fit(rows, 2);
    CHECK(m.eigenvalues[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(m.eigenvalues[1] == doctest::Approx(0.5).epsilon(1e-10));
    double dot = 0;
    for (std::size_t t = 0; t < 2; ++t) dot += m.components[0][t] * m.components[1][t];
    CHECK(std::abs(dot) <= 1e-10);
}

TEST_CASE("pick_r_by_variance finds the smallest sufficient count") {
    PcaModel m;
    m.n = 4;
    m.eigenvalues = {6.0, 3.0, 1.0, 0.0};
    CHECK(pick_r_by_variance(m, 0.5) == 1);
    CHECK(pick_r_by_variance(m, 0.6) == 1);
    CHECK(pick_r_by_variance(m, 0.9) == 2);
    CHECK(pick_r_by_variance(m, 0.95) == 3);
    CHECK(pick_r_by_variance(m, 1.0) == 3);
}

TEST_CASE("model text round trip") {
    DetRng rng(20);
    const auto rows = random_rows(rng, 10, 4);
    const PcaModel m = pca_fit(rows, 3);
    const auto path = std::filesystem::temp_directory_path() / "mslesion_pca_rt.txt";
    save_pca(m, path.string());
    const PcaModel back = load_pca(path.string());
    CHECK(back.n == m.n);
    CHECK(back.retained == m.retained);
    CHECK(back.mean == m.mean);
    CHECK(back.eigenvalues == m.eigenvalues);
    CHECK(back.components == m.components);
    CHECK_THROWS_AS(load_pca((std::filesystem::temp_directory_path() / "nope.txt").string()),
                    std::runtime_error);
}
