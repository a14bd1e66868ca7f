#include "mlsvm/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <list>
#include <sstream>
#include <unordered_map>

namespace mlsvm {

double rbf_kernel(std::span<const double> xi, std::span<const double> xj, double gamma) {
    return std::exp(-gamma * squared_distance(xi, xj));
}

namespace {

constexpr double kTau = 1e-12;

// LRU cache of kernel rows K(i, .) over the full training set.
class KernelCache {
public:
    KernelCache(const Matrix& x, double gamma, std::size_t budget_bytes)
        : x_(x), gamma_(gamma), n_(x.rows) {
        sqnorm_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) sqnorm_[i] = dot(x_.row(i), x_.row(i));
        max_rows_ = std::max<std::size_t>(2, budget_bytes / (n_ * sizeof(double)));
    }

    const double* row(int i) {
        auto it = map_.find(i);
        if (it != map_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.pos);
            return it->second.values.data();
        }
        if (map_.size() >= max_rows_) {
            map_.erase(lru_.back());
            lru_.pop_back();
        }
        lru_.push_front(i);
        Entry e;
        e.pos = lru_.begin();
        e.values.resize(n_);
        const auto xi = x_.row(static_cast<std::size_t>(i));
        const double si = sqnorm_[static_cast<std::size_t>(i)];
        for (std::size_t t = 0; t < n_; ++t)
            e.values[t] = std::exp(-gamma_ * (si + sqnorm_[t] - 2.0 * dot(xi, x_.row(t))));
        auto [pos, inserted] = map_.emplace(i, std::move(e));
        (void)inserted;
        return pos->second.values.data();
    }

private:
    struct Entry {
        std::list<int>::iterator pos;
        std::vector<double> values;
    };
    const Matrix& x_;
    double gamma_;
    std::size_t n_;
    std::size_t max_rows_;
    std::vector<double> sqnorm_;
    std::list<int> lru_;
    std::unordered_map<int, Entry> map_;
};

}  // namespace

TrainedModel train(const Matrix& points, const std::vector<int>& labels,
                   const std::vector<double>& instance_weights, const ModelParams& params,
                   const TrainOptions& opts, TrainStats* stats) {
    const std::size_t n = points.rows;
    if (labels.size() != n) throw DomainError("train: label count mismatch");
    if (!(params.c_plus > 0.0 && params.c_minus > 0.0 && params.gamma > 0.0) ||
        !std::isfinite(params.c_plus) || !std::isfinite(params.c_minus) ||
        !std::isfinite(params.gamma))
        throw DomainError("train: parameters must be positive and finite");
    std::size_t npos = 0;
    for (int y : labels) {
        if (y != +1 && y != -1) throw DomainError("train: labels must be +1 or -1");
        if (y == +1) ++npos;
    }
    if (npos == 0 || npos == n) throw DomainError("train: need at least one point per class");
    if (!instance_weights.empty() && instance_weights.size() != n)
        throw DomainError("train: instance weight count mismatch");

    std::vector<double> box(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = instance_weights.empty() ? 1.0 : instance_weights[i];
        if (!(w > 0.0)) throw DomainError("train: instance weights must be positive");
        box[i] = (labels[i] == +1 ? params.c_plus : params.c_minus) * w;
    }

    KernelCache cache(points, params.gamma, opts.cache_bytes);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a at a = 0
    const std::vector<int>& y = labels;

#ifndef NDEBUG
    double prev_obj = 0.0;  // objective at alpha = 0
#endif

    long long iter = 0;
    for (;; ++iter) {
        // maximal violating pair
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        int i = -1, j = -1;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -static_cast<double>(y[t]) * grad[t];
            const bool in_up = (y[t] == +1 && alpha[t] < box[t]) || (y[t] == -1 && alpha[t] > 0.0);
            const bool in_low = (y[t] == +1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < box[t]);
            if (in_up && v > gmax) {
                gmax = v;
                i = static_cast<int>(t);
            }
            if (in_low && v < gmin) {
                gmin = v;
                j = static_cast<int>(t);
            }
        }
        if (gmax - gmin <= opts.tol || i < 0 || j < 0) break;
        if (iter >= opts.max_iter) break;

        const double* Ki = cache.row(i);
        const double* Kj = cache.row(j);
        const std::size_t ii = static_cast<std::size_t>(i);
        const std::size_t jj = static_cast<std::size_t>(j);
        const double old_ai = alpha[ii];
        const double old_aj = alpha[jj];

        // two-variable subproblem, clipped to the box (K_ii = K_jj = 1 for RBF)
        if (y[ii] != y[jj]) {
            double quad = 2.0 + 2.0 * Ki[jj];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[ii] - grad[jj]) / quad;
            const double diff = alpha[ii] - alpha[jj];
            alpha[ii] += delta;
            alpha[jj] += delta;
            if (diff > 0.0) {
                if (alpha[jj] < 0.0) {
                    alpha[jj] = 0.0;
                    alpha[ii] = diff;
                }
            } else {
                if (alpha[ii] < 0.0) {
                    alpha[ii] = 0.0;
                    alpha[jj] = -diff;
                }
            }
            if (diff > box[ii] - box[jj]) {
                if (alpha[ii] > box[ii]) {
                    alpha[ii] = box[ii];
                    alpha[jj] = box[ii] - diff;
                }
            } else {
                if (alpha[jj] > box[jj]) {
                    alpha[jj] = box[jj];
                    alpha[ii] = box[jj] + diff;
                }
            }
        } else {
            double quad = 2.0 - 2.0 * Ki[jj];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[ii] - grad[jj]) / quad;
            const double sum = alpha[ii] + alpha[jj];
            alpha[ii] -= delta;
            alpha[jj] += delta;
            if (sum > box[ii]) {
                if (alpha[ii] > box[ii]) {
                    alpha[ii] = box[ii];
                    alpha[jj] = sum - box[ii];
                }
            } else {
                if (alpha[jj] < 0.0) {
                    alpha[jj] = 0.0;
                    alpha[ii] = sum;
                }
            }
            if (sum > box[jj]) {
                if (alpha[jj] > box[jj]) {
                    alpha[jj] = box[jj];
                    alpha[ii] = sum - box[jj];
                }
            } else {
                if (alpha[ii] < 0.0) {
                    alpha[ii] = 0.0;
                    alpha[jj] = sum;
                }
            }
        }

        const double dai = alpha[ii] - old_ai;
        const double daj = alpha[jj] - old_aj;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += static_cast<double>(y[t]) *
                       (static_cast<double>(y[ii]) * Ki[t] * dai +
                        static_cast<double>(y[jj]) * Kj[t] * daj);

#ifndef NDEBUG
        if (iter % 1024 == 0) {
            // dual objective is non-increasing (minimization form)
            double obj = 0.0;
            for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * (grad[t] - 1.0);
            obj *= 0.5;
            assert(obj <= prev_obj + 1e-9 * (1.0 + std::abs(prev_obj)));
            prev_obj = obj;
        }
#endif
    }

    // bias from free SVs, else midpoint of the bound interval
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lb = -std::numeric_limits<double>::infinity();
    double ub = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double v = -static_cast<double>(y[t]) * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < box[t]) {
            free_sum += v;
            ++free_count;
        } else if ((y[t] == +1 && alpha[t] == 0.0) || (y[t] == -1 && alpha[t] >= box[t])) {
            lb = std::max(lb, v);
        } else {
            ub = std::min(ub, v);
        }
    }
    double bias;
    if (free_count > 0) {
        bias = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(lb) && std::isfinite(ub)) {
        bias = 0.5 * (lb + ub);
    } else {
        bias = std::isfinite(lb) ? lb : (std::isfinite(ub) ? ub : 0.0);
    }

    TrainedModel model;
    model.params = params;
    model.bias = bias;
    model.n_features = static_cast<int>(points.cols);
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            model.sv_indices.push_back(static_cast<int>(t));
            model.dual_coefs.push_back(alpha[t] * static_cast<double>(y[t]));
        }
    }
    model.support_vectors = points.gather(model.sv_indices);
    assert(!model.sv_indices.empty());  // at least one pair update ran

    if (stats) {
        stats->iterations = iter;
        double obj = 0.0;
        for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * (grad[t] - 1.0);
        stats->dual_objective = 0.5 * obj;
    }
    if (iter >= opts.max_iter)
        throw SolverNonConvergence("train: SMO did not converge within max_iter",
                                   std::move(model));
    return model;
}

double TrainedModel::decision_value(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(n_features))
        throw DomainError("decision_value: dimension mismatch");
    double s = bias;
    for (std::size_t i = 0; i < dual_coefs.size(); ++i)
        s += dual_coefs[i] * rbf_kernel(support_vectors.row(i), x, params.gamma);
    return s;
}

int TrainedModel::predict(std::span<const double> x) const {
    return decision_value(x) < 0.0 ? -1 : +1;
}

std::vector<int> TrainedModel::predict_all(const Matrix& x) const {
    std::vector<int> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict(x.row(i));
    return out;
}

void save_model(const TrainedModel& model, std::ostream& out) {
    char buf[192];
    std::snprintf(buf, sizeof(buf), "mlsvm-model 1\n");
    out << buf;
    std::snprintf(buf, sizeof(buf), "c_plus %.17g\nc_minus %.17g\ngamma %.17g\nbias %.17g\n",
                  model.params.c_plus, model.params.c_minus, model.params.gamma, model.bias);
    out << buf;
    out << "n_features " << model.n_features << "\n";
    out << "n_sv " << model.dual_coefs.size() << "\n";
    for (std::size_t i = 0; i < model.dual_coefs.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", model.dual_coefs[i]);
        out << buf;
        const auto row = model.support_vectors.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] == 0.0) continue;
            std::snprintf(buf, sizeof(buf), " %zu:%.17g", j + 1, row[j]);
            out << buf;
        }
        out << '\n';
    }
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    save_model(model, out);
}

TrainedModel load_model(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "mlsvm-model" || version != 1)
        throw ParseError("not an mlsvm model file");
    TrainedModel m;
    std::size_t n_sv = 0;
    bool have_nsv = false;
    std::string key;
    while (!have_nsv && in >> key) {
        if (key == "c_plus")
            in >> m.params.c_plus;
        else if (key == "c_minus")
            in >> m.params.c_minus;
        else if (key == "gamma")
            in >> m.params.gamma;
        else if (key == "bias")
            in >> m.bias;
        else if (key == "n_features")
            in >> m.n_features;
        else if (key == "n_sv") {
            in >> n_sv;
            have_nsv = true;
        } else {
            throw ParseError("unknown model field '" + key + "'");
        }
        if (!in) throw ParseError("truncated model file");
    }
    if (!have_nsv || m.n_features <= 0) throw ParseError("incomplete model header");
    std::string line;
    std::getline(in, line);  // rest of the n_sv line
    m.support_vectors = Matrix(n_sv, static_cast<std::size_t>(m.n_features));
    m.dual_coefs.resize(n_sv);
    for (std::size_t i = 0; i < n_sv; ++i) {
        if (!std::getline(in, line)) throw ParseError("truncated model file");
        std::istringstream ss(line);
        if (!(ss >> m.dual_coefs[i])) throw ParseError("bad support-vector line");
        std::string tok;
        auto row = m.support_vectors.row(i);
        while (ss >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw ParseError("bad support-vector entry");
            const int idx = std::stoi(tok.substr(0, colon));
            const double val = std::stod(tok.substr(colon + 1));
            if (idx < 1 || idx > m.n_features) throw ParseError("support-vector index out of range");
            row[static_cast<std::size_t>(idx - 1)] = val;
        }
        m.sv_indices.push_back(static_cast<int>(i));
    }
    return m;
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return load_model(in);
}

}  // namespace mlsvm
