#pragma once

// Dense reference solver for the weighted SVM dual, independent of the SMO
// implementation path: accelerated projected gradient on
//   min 1/2 a'Qa - e'a   s.t.  0 <= a_i <= box_i,  y'a = 0,
// with Q_ij = y_i y_j K(x_i, x_j). Meant for n <= ~100.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mlsvm/matrix.hpp"
#include "mlsvm/solver.hpp"

namespace mlsvm::testing {

struct QpReference {
    std::vector<double> alpha;
    double objective = 0.0;
    double bias = 0.0;
};

inline std::vector<double> dense_q(const Matrix& x, const std::vector<int>& y, double gamma) {
    const std::size_t n = x.rows;
    std::vector<double> q(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            q[i * n + j] = static_cast<double>(y[i] * y[j]) * rbf_kernel(x.row(i), x.row(j), gamma);
    return q;
}

// projection onto the box intersected with the hyperplane y'a = 0, via
// bisection on the hyperplane multiplier
inline std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y,
                                   const std::vector<double>& box) {
    const std::size_t n = v.size();
    auto eval = [&](double lam, std::vector<double>* out) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a =
                std::clamp(v[i] - lam * static_cast<double>(y[i]), 0.0, box[i]);
            if (out) (*out)[i] = a;
            s += static_cast<double>(y[i]) * a;
        }
        return s;
    };
    double span = 1.0;
    for (std::size_t i = 0; i < n; ++i) span = std::max(span, std::abs(v[i]) + box[i]);
    double lo = -2.0 * span, hi = 2.0 * span;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (eval(mid, nullptr) > 0.0 ? lo : hi) = mid;
    }
    std::vector<double> out(n);
    eval(0.5 * (lo + hi), &out);
    return out;
}

inline QpReference solve_reference_qp(const Matrix& x, const std::vector<int>& y,
                                      const std::vector<double>& box, double gamma,
                                      long max_iter = 200000) {
    const std::size_t n = x.rows;
    const auto q = dense_q(x, y, gamma);

    // Lipschitz constant via power iteration on Q
    double lip = 1.0;
    {
        std::vector<double> v(n, 1.0), qv(n);
        for (int it = 0; it < 50; ++it) {
            double norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j) s += q[i * n + j] * v[j];
                qv[i] = s;
                norm += s * s;
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) break;
            for (std::size_t i = 0; i < n; ++i) v[i] = qv[i] / norm;
            lip = norm;
        }
        lip = std::max(lip, 1e-8);
    }

    auto grad = [&](const std::vector<double>& a, std::vector<double>& g) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = -1.0;
            for (std::size_t j = 0; j < n; ++j) s += q[i * n + j] * a[j];
            g[i] = s;
        }
    };
    auto objective = [&](const std::vector<double>& a) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double qa = 0.0;
            for (std::size_t j = 0; j < n; ++j) qa += q[i * n + j] * a[j];
            s += a[i] * (0.5 * qa - 1.0);
        }
        return s;
    };

    // FISTA with adaptive restart
    std::vector<double> a(n, 0.0), a_prev(n, 0.0), z(n, 0.0), g(n), step(n);
    double t = 1.0;
    double best_obj = objective(a);
    double box_max = 1.0;
    for (double b : box) box_max = std::max(box_max, b);
    int stable = 0;
    for (long it = 0; it < max_iter; ++it) {
        grad(z, g);
        for (std::size_t i = 0; i < n; ++i) step[i] = z[i] - g[i] / lip;
        a_prev = a;
        a = project(step, y, box);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = a[i] + (t - 1.0) / t_next * (a[i] - a_prev[i]);
            delta = std::max(delta, std::abs(a[i] - a_prev[i]));
            z[i] = m;
        }
        t = t_next;
        const double obj = objective(a);
        if (obj > best_obj) {  // restart momentum
            z = a;
            t = 1.0;
        }
        best_obj = std::min(best_obj, obj);
        if (delta <= 1e-13 * (1.0 + box_max)) {
            if (++stable >= 10) break;
        } else {
            stable = 0;
        }
    }

    QpReference ref;
    ref.alpha = a;
    ref.objective = objective(a);

    // bias from free points, else the midpoint of the KKT interval
    std::vector<double> ga(n);
    grad(a, ga);
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lb = -1e300, ub = 1e300;
    const double eps = 1e-8 * box_max;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = -static_cast<double>(y[i]) * ga[i];
        if (a[i] > eps && a[i] < box[i] - eps) {
            free_sum += v;
            ++free_count;
        } else if ((y[i] == +1 && a[i] <= eps) || (y[i] == -1 && a[i] >= box[i] - eps)) {
            lb = std::max(lb, v);
        } else {
            ub = std::min(ub, v);
        }
    }
    ref.bias = free_count > 0 ? free_sum / static_cast<double>(free_count)
                              : 0.5 * (lb + ub);
    return ref;
}

inline double reference_decision(const Matrix& x_train, const std::vector<int>& y,
                                 const std::vector<double>& alpha, double bias, double gamma,
                                 std::span<const double> probe) {
    double s = bias;
    for (std::size_t i = 0; i < x_train.rows; ++i)
        if (alpha[i] > 0.0)
            s += alpha[i] * static_cast<double>(y[i]) * rbf_kernel(x_train.row(i), probe, gamma);
    return s;
}

}  // namespace mlsvm::testing
