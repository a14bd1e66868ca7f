#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlsvm/error.hpp"
#include "mlsvm/matrix.hpp"

namespace mlsvm {

// (C+, C-, gamma) of the weighted soft-margin RBF model.
struct ModelParams {
    double c_plus = 1.0;
    double c_minus = 1.0;
    double gamma = 1.0;
};

double rbf_kernel(std::span<const double> xi, std::span<const double> xj, double gamma);

// Kernel expansion f(x) = sum_i dual_coefs[i] * K(sv_i, x) + bias with
// dual_coefs[i] = alpha_i * y_i.
struct TrainedModel {
    Matrix support_vectors;
    std::vector<double> dual_coefs;
    double bias = 0.0;
    ModelParams params;
    std::vector<int> sv_indices;  // rows of the training matrix passed to train()
    int n_features = 0;

    double decision_value(std::span<const double> x) const;
    int predict(std::span<const double> x) const;  // sign, ties at 0 -> +1
    std::vector<int> predict_all(const Matrix& x) const;
};

struct TrainOptions {
    double tol = 1e-3;             // maximal KKT violation at termination
    long long max_iter = 10'000'000;
    std::size_t cache_bytes = 256ull << 20;
};

struct TrainStats {
    long long iterations = 0;
    double dual_objective = 0.0;  // value of 1/2 a'Qa - e'a at the solution
};

// Thrown when the pair-update budget runs out; carries the best iterate.
class SolverNonConvergence : public std::runtime_error {
public:
    SolverNonConvergence(std::string msg, TrainedModel model)
        : std::runtime_error(std::move(msg)), best(std::move(model)) {}
    TrainedModel best;
};

// Solves the dual of the weighted soft-margin problem with an SMO solver
// using maximal-violating-pair selection. The box of point i is
// c_plus * instance_weight[i] for y_i = +1 and c_minus * instance_weight[i]
// otherwise; pass an empty weight vector for unit weights.
TrainedModel train(const Matrix& points, const std::vector<int>& labels,
                   const std::vector<double>& instance_weights, const ModelParams& params,
                   const TrainOptions& opts = {}, TrainStats* stats = nullptr);

// Text round trip; loaded models reproduce decision values to 1e-12.
void save_model(const TrainedModel& model, const std::string& path);
void save_model(const TrainedModel& model, std::ostream& out);
TrainedModel load_model(const std::string& path);
TrainedModel load_model(std::istream& in);

}  // namespace mlsvm
