#include "mslesion/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <list>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace msl {

KernelSpec parse_kernel(const std::string& text) {
    KernelSpec spec;
    if (text == "linear") {
        spec.kind = KernelKind::Linear;
    } else if (text == "polynomial" || text == "poly") {
        spec.kind = KernelKind::Polynomial;
        spec.degree = 3;
    } else if (text == "quadratic") {
        spec.kind = KernelKind::Polynomial;
        spec.degree = 2;
    } else if (text == "rbf") {
        spec.kind = KernelKind::Rbf;
    } else if (text == "sigmoid") {
        spec.kind = KernelKind::Sigmoid;
    } else {
        throw std::invalid_argument("unknown kernel: " + text);
    }
    return spec;
}

std::string kernel_name(const KernelSpec& spec) {
    switch (spec.kind) {
        case KernelKind::Linear: return "linear";
        case KernelKind::Polynomial: return spec.degree == 2 ? "quadratic" : "polynomial";
        case KernelKind::Rbf: return "rbf";
        default: return "sigmoid";
    }
}

double kernel_eval(const KernelSpec& spec, const std::vector<double>& x,
                   const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("dimension mismatch");
    switch (spec.kind) {
        case KernelKind::Linear: {
            double s = 0;
            for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
            return s;
        }
        case KernelKind::Polynomial: {
            double s = 0;
            for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
            return std::pow(spec.gamma * s + spec.coef, spec.degree);
        }
        case KernelKind::Rbf: {
            double s = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - y[i];
                s += d * d;
            }
            return std::exp(-spec.gamma * s);
        }
        default: {
            double s = 0;
            for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
            return std::tanh(spec.gamma * s + spec.coef);
        }
    }
}

Scaler fit_scaler(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("no rows");
    const std::size_t d = rows[0].size();
    Scaler s;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
    for (std::size_t j = 0; j < d; ++j) s.mean[j] /= n;
    std::vector<double> var(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) {
            const double dv = r[j] - s.mean[j];
            var[j] += dv * dv;
        }
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(var[j] / n);
        s.scale[j] = sd > 0 ? sd : 1.0;
    }
    return s;
}

std::vector<double> apply_scaler(const Scaler& s, const std::vector<double>& x) {
    if (x.size() != s.mean.size()) throw std::invalid_argument("dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - s.mean[j]) / s.scale[j];
    return out;
}

namespace {

// Kernel rows for the SMO gradient updates, bounded LRU.
class RowCache {
public:
    RowCache(const std::vector<std::vector<double>>& X, const KernelSpec& spec)
        : X_(X), spec_(spec) {
        const std::size_t row_bytes = X.size() * sizeof(double);
        capacity_ = std::max<std::size_t>(2, (256u << 20) / std::max<std::size_t>(row_bytes, 1));
        capacity_ = std::min(capacity_, X.size());
    }

    const std::vector<double>& row(std::size_t i) {
        auto it = map_.find(i);
        if (it != map_.end()) {
            order_.splice(order_.begin(), order_, it->second.second);
            return it->second.first;
        }
        if (map_.size() >= capacity_) {
            const std::size_t victim = order_.back();
            order_.pop_back();
            map_.erase(victim);
        }
        order_.push_front(i);
        std::vector<double> r(X_.size());
        for (std::size_t j = 0; j < X_.size(); ++j) r[j] = kernel_eval(spec_, X_[i], X_[j]);
        auto [ins, ok] = map_.emplace(i, std::make_pair(std::move(r), order_.begin()));
        (void)ok;
        return ins->second.first;
    }

private:
    const std::vector<std::vector<double>>& X_;
    const KernelSpec& spec_;
    std::size_t capacity_;
    std::list<std::size_t> order_;
    std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>>
        map_;
};

}  // namespace

SvmModel svm_train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   KernelSpec spec, double C, double tol, SvmTrainInfo* info) {
    const std::size_t n = X.size();
    if (n < 2) throw std::invalid_argument("need at least 2 rows");
    if (y.size() != n) throw std::invalid_argument("dimension mismatch");
    if (C <= 0) throw std::invalid_argument("C must be positive");
    const std::size_t d = X[0].size();
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (X[i].size() != d) throw std::invalid_argument("dimension mismatch");
        for (double v : X[i])
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature values");
        if (y[i] == 1)
            has_pos = true;
        else if (y[i] == -1)
            has_neg = true;
        else
            throw std::invalid_argument("labels must be -1 or +1");
    }
    if (!has_pos || !has_neg) throw std::invalid_argument("single-class input");

    if (spec.gamma <= 0) spec.gamma = 1.0 / static_cast<double>(d);

    const Scaler scaler = fit_scaler(X);
    std::vector<std::vector<double>> Z(n);
    for (std::size_t i = 0; i < n; ++i) Z[i] = apply_scaler(scaler, X[i]);

    RowCache cache(Z, spec);
    std::vector<double> alpha(n, 0.0);
    // gradient of 1/2 a'Qa - sum(a); at a=0 it is -e
    std::vector<double> grad(n, -1.0);
    std::vector<double> self(n);
    for (std::size_t i = 0; i < n; ++i) self[i] = kernel_eval(spec, Z[i], Z[i]);

    const long max_iter = std::max<long>(10 * static_cast<long>(n), 1000);
    long iter = 0;
    for (;; ++iter) {
        // maximal violating pair over v_i = -y_i * grad_i
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        std::size_t i_up = n, i_low = n;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = -y[i] * grad[i];
            const bool in_up = (y[i] == 1 && alpha[i] < C) || (y[i] == -1 && alpha[i] > 0);
            const bool in_low = (y[i] == 1 && alpha[i] > 0) || (y[i] == -1 && alpha[i] < C);
            if (in_up && v > m_up) {
                m_up = v;
                i_up = i;
            }
            if (in_low && v < m_low) {
                m_low = v;
                i_low = i;
            }
        }
        if (i_up == n || i_low == n || m_up - m_low <= tol) break;
        if (iter >= max_iter) throw std::runtime_error("solver did not converge");

        const std::size_t i = i_up, j = i_low;
        const std::vector<double>& Ki = cache.row(i);
        const std::vector<double>& Kj = cache.row(j);
        double eta = self[i] + self[j] - 2.0 * Ki[j];
        if (eta < 1e-12) eta = 1e-12;

        // step along alpha_i += y_i*delta, alpha_j -= y_j*delta; both rooms
        // are strictly positive by the I_up/I_low membership above
        const double room_i = y[i] == 1 ? C - alpha[i] : alpha[i];
        const double room_j = y[j] == 1 ? alpha[j] : C - alpha[j];
        double delta = (m_up - m_low) / eta;
        delta = std::min(delta, std::min(room_i, room_j));
        if (!(delta > 0)) throw std::runtime_error("solver did not converge");

        const double old_i = alpha[i], old_j = alpha[j];
        if (delta == room_i)
            alpha[i] = y[i] == 1 ? C : 0.0;
        else
            alpha[i] += y[i] * delta;
        if (delta == room_j)
            alpha[j] = y[j] == 1 ? 0.0 : C;
        else
            alpha[j] -= y[j] * delta;

        const double dai = alpha[i] - old_i;
        const double daj = alpha[j] - old_j;
        for (std::size_t k = 0; k < n; ++k)
            grad[k] += y[k] * (y[i] * Ki[k] * dai + y[j] * Kj[k] * daj);
    }

    // bias: mean over free vectors of y_i - sum_j alpha_j y_j K_ij; if none
    // are free, midpoint of the feasible interval
    double bias;
    {
        double sum = 0;
        std::size_t free_count = 0;
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double v = -y[i] * grad[i];  // equals y_i - E_i
            const bool in_up = (y[i] == 1 && alpha[i] < C) || (y[i] == -1 && alpha[i] > 0);
            const bool in_low = (y[i] == 1 && alpha[i] > 0) || (y[i] == -1 && alpha[i] < C);
            if (alpha[i] > 0 && alpha[i] < C) {
                sum += v;
                ++free_count;
            }
            if (in_up) lo = std::max(lo, v);
            if (in_low) hi = std::min(hi, v);
        }
        if (free_count > 0)
            bias = sum / static_cast<double>(free_count);
        else
            bias = (lo + hi) / 2.0;
    }

    SvmModel model;
    model.kernel = spec;
    model.C = C;
    model.scaler = scaler;
    model.bias = bias;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 0) {
            model.dual_coefs.push_back(alpha[i] * y[i]);
            model.support_vectors.push_back(Z[i]);
        }
    }
    if (model.support_vectors.empty()) throw std::runtime_error("solver did not converge");

    if (info) {
        info->alphas = alpha;
        info->iterations = static_cast<int>(iter);
        double ag = 0, asum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            ag += alpha[i] * grad[i];
            asum += alpha[i];
        }
        info->dual_objective = 0.5 * (asum - ag);  // sum(a) - 1/2 a'Qa
    }
    return model;
}

double svm_decision(const SvmModel& model, const std::vector<double>& x) {
    const std::vector<double> z = apply_scaler(model.scaler, x);
    double f = model.bias;
    for (std::size_t s = 0; s < model.support_vectors.size(); ++s)
        f += model.dual_coefs[s] * kernel_eval(model.kernel, model.support_vectors[s], z);
    return f;
}

int svm_predict(const SvmModel& model, const std::vector<double>& x) {
    return svm_decision(model, x) >= 0 ? 1 : -1;
}

KktAudit kkt_audit(const SvmModel& model, const std::vector<std::vector<double>>& X,
                   const std::vector<int>& y, const std::vector<double>& alphas, double tol) {
    if (X.size() != y.size() || X.size() != alphas.size())
        throw std::invalid_argument("dimension mismatch");
    KktAudit audit;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double yf = y[i] * svm_decision(model, X[i]);
        double v = 0;
        if (alphas[i] <= 0) {
            v = std::max(0.0, 1.0 - yf);
        } else if (alphas[i] >= model.C) {
            v = std::max(0.0, yf - 1.0);
        } else {
            v = std::abs(yf - 1.0);
        }
        audit.worst_violation = std::max(audit.worst_violation, v);
    }
    audit.pass = audit.worst_violation <= tol;
    return audit;
}

namespace {

const char* kind_tag(KernelKind k) {
    switch (k) {
        case KernelKind::Linear: return "linear";
        case KernelKind::Polynomial: return "polynomial";
        case KernelKind::Rbf: return "rbf";
        default: return "sigmoid";
    }
}

KernelKind parse_kind_tag(const std::string& t) {
    if (t == "linear") return KernelKind::Linear;
    if (t == "polynomial") return KernelKind::Polynomial;
    if (t == "rbf") return KernelKind::Rbf;
    if (t == "sigmoid") return KernelKind::Sigmoid;
    throw std::runtime_error("bad svm model file");
}

}  // namespace

void save_svm(const SvmModel& model, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "svm %s %.17g %.17g %d\n", kind_tag(model.kernel.kind), model.kernel.gamma,
                 model.kernel.coef, model.kernel.degree);
    std::fprintf(f, "C %.17g\n", model.C);
    const std::size_t d = model.scaler.mean.size();
    std::fprintf(f, "scaler %zu\n", d);
    for (std::size_t j = 0; j < d; ++j)
        std::fprintf(f, "%s%.17g", j ? " " : "", model.scaler.mean[j]);
    std::fprintf(f, "\n");
    for (std::size_t j = 0; j < d; ++j)
        std::fprintf(f, "%s%.17g", j ? " " : "", model.scaler.scale[j]);
    std::fprintf(f, "\n");
    std::fprintf(f, "bias %.17g\n", model.bias);
    std::fprintf(f, "nsv %zu\n", model.support_vectors.size());
    for (std::size_t s = 0; s < model.support_vectors.size(); ++s) {
        std::fprintf(f, "%.17g", model.dual_coefs[s]);
        for (double v : model.support_vectors[s]) std::fprintf(f, " %.17g", v);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

SvmModel load_svm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    SvmModel model;
    std::string tag, kind;
    if (!(in >> tag >> kind >> model.kernel.gamma >> model.kernel.coef >> model.kernel.degree) ||
        tag != "svm")
        throw std::runtime_error("bad svm model file: " + path);
    model.kernel.kind = parse_kind_tag(kind);
    std::size_t d = 0, nsv = 0;
    if (!(in >> tag >> model.C) || tag != "C") throw std::runtime_error("bad svm model file: " + path);
    if (!(in >> tag >> d) || tag != "scaler") throw std::runtime_error("bad svm model file: " + path);
    model.scaler.mean.resize(d);
    model.scaler.scale.resize(d);
    for (auto& v : model.scaler.mean)
        if (!(in >> v)) throw std::runtime_error("bad svm model file: " + path);
    for (auto& v : model.scaler.scale)
        if (!(in >> v)) throw std::runtime_error("bad svm model file: " + path);
    if (!(in >> tag >> model.bias) || tag != "bias")
        throw std::runtime_error("bad svm model file: " + path);
    if (!(in >> tag >> nsv) || tag != "nsv")
        throw std::runtime_error("bad svm model file: " + path);
    model.dual_coefs.resize(nsv);
    model.support_vectors.assign(nsv, std::vector<double>(d));
    for (std::size_t s = 0; s < nsv; ++s) {
        if (!(in >> model.dual_coefs[s])) throw std::runtime_error("bad svm model file: " + path);
        for (auto& v : model.support_vectors[s])
            if (!(in >> v)) throw std::runtime_error("bad svm model file: " + path);
    }
    return model;
}

}  // namespace msl
