#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace ampis {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// An (epsilon, delta) privacy guarantee. delta defaults to 0; most of the
/// library works with pure-epsilon guarantees.
struct PrivacyBudget {
    double epsilon = 0.0;
    double delta = 0.0;

    PrivacyBudget() = default;
    PrivacyBudget(double eps, double del = 0.0) : epsilon(eps), delta(del) {
        if (!(epsilon >= 0.0))
            throw std::invalid_argument("PrivacyBudget: epsilon must be >= 0");
        if (!(delta >= 0.0 && delta <= 1.0))
            throw std::invalid_argument("PrivacyBudget: delta must be in [0, 1]");
    }
};

/// A point together with its importance weight, the reciprocal of its
/// selection probability. Weights are always >= 1.
struct WeightedPoint {
    double weight = 1.0;
    Vector point;
};

struct WeightedDataset {
    std::vector<WeightedPoint> items;
    Index dimension = 0;

    void validate() const {
        for (const auto& it : items) {
            if (it.point.size() != dimension)
                throw std::invalid_argument("WeightedDataset: dimension mismatch");
            if (!(it.weight >= 1.0))
                throw std::invalid_argument("WeightedDataset: weight must be >= 1");
        }
    }
};

/// Per-(weight, point) indistinguishability level of a mechanism operating on
/// weighted datasets, together with its w-derivative and a per-point strong
/// convexity constant of exp(eval) in w. Closures capture mechanism
/// parameters; derivatives are analytic and cross-checked numerically in
/// tests.
struct WeightedProfile {
    std::function<double(double, const Vector&)> eval;
    std::function<double(double, const Vector&)> deriv;
    std::function<double(const Vector&)> strong_convexity;
};

/// Per-point indistinguishability level of a mechanism on unweighted data.
struct Profile {
    std::function<double(const Vector&)> eval;
};

inline double l1_norm(const Vector& x) { return x.lpNorm<1>(); }

}  // namespace ampis
