#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace msl {

enum class KernelKind { Linear, Polynomial, Rbf, Sigmoid };

struct KernelSpec {
    KernelKind kind = KernelKind::Polynomial;
    double gamma = -1.0;  // <= 0 resolves to 1/n_features at training time
    double coef = 1.0;
    int degree = 3;
};

KernelSpec parse_kernel(const std::string& text);  // "linear|polynomial|quadratic|rbf|sigmoid"
std::string kernel_name(const KernelSpec& spec);

double kernel_eval(const KernelSpec& spec, const std::vector<double>& x,
                   const std::vector<double>& y);

// per-column standardization fitted on training rows only
struct Scaler {
    std::vector<double> mean;
    std::vector<double> scale;  // population stddev; 1 where the column is constant
};

Scaler fit_scaler(const std::vector<std::vector<double>>& rows);
std::vector<double> apply_scaler(const Scaler& s, const std::vector<double>& x);

struct SvmModel {
    KernelSpec kernel;  // gamma resolved
    double C = 1.0;
    Scaler scaler;
    double bias = 0.0;
    std::vector<double> dual_coefs;                     // alpha_i * y_i
    std::vector<std::vector<double>> support_vectors;  // standardized rows
};

struct SvmTrainInfo {
    std::vector<double> alphas;  // per training row, bound values exact
    int iterations = 0;
    double dual_objective = 0.0;
};

// Soft-margin dual via SMO with maximal-violating-pair selection (ties by
// lowest index). y entries must be -1 or +1. Throws "single-class input",
// "non-finite feature values", "solver did not converge".
SvmModel svm_train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   KernelSpec spec, double C, double tol = 1e-3,
                   SvmTrainInfo* info = nullptr);

double svm_decision(const SvmModel& model, const std::vector<double>& x);
int svm_predict(const SvmModel& model, const std::vector<double>& x);  // f==0 -> +1

struct KktAudit {
    double worst_violation = 0.0;
    bool pass = false;
};

// Checks the optimality conditions of every training row against the trained
// model: alpha=0 rows must satisfy y*f >= 1-tol, alpha=C rows y*f <= 1+tol,
// free rows |y*f - 1| <= tol.
KktAudit kkt_audit(const SvmModel& model, const std::vector<std::vector<double>>& X,
                   const std::vector<int>& y, const std::vector<double>& alphas, double tol);

void save_svm(const SvmModel& model, const std::string& path);
SvmModel load_svm(const std::string& path);

}  // namespace msl
