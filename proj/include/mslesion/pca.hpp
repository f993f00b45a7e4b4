#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mslesion/texfeat.hpp"

namespace msl {

struct PcaModel {
    std::size_t n = 0;         // input dimensionality
    std::size_t retained = 0;  // default r used by transform
    std::vector<double> mean;
    std::vector<double> eigenvalues;              // descending
    std::vector<std::vector<double>> components;  // row i = i-th eigenvector
};

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// a is destroyed; eigenvalues land unsorted with matching columns of vectors.
void jacobi_eigen(std::vector<std::vector<double>>& a, std::vector<double>& eigenvalues,
                  std::vector<std::vector<double>>& vectors);

// Mean, biased (1/k) covariance, Jacobi eigendecomposition. Rows of the
// component matrix are sorted by descending eigenvalue; each row's
// largest-magnitude entry is made positive.
PcaModel pca_fit(const std::vector<std::vector<double>>& rows, std::size_t r);
PcaModel pca_fit(const FeatureMatrix& X, std::size_t r);

// First r coordinates of A(x - mean). r = 0 means the model's retained count.
std::vector<double> pca_transform(const PcaModel& model, const std::vector<double>& x,
                                  std::size_t r = 0);

// x_hat = A^T (y padded with zeros) + mean
std::vector<double> pca_inverse(const PcaModel& model, const std::vector<double>& y);

// smallest r whose leading eigenvalues explain at least `fraction` of the total
std::size_t pick_r_by_variance(const PcaModel& model, double fraction);

void save_pca(const PcaModel& model, const std::string& path);
PcaModel load_pca(const std::string& path);

}  // namespace msl
