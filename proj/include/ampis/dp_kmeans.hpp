#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ampis/rng.hpp"
#include "ampis/types.hpp"

namespace ampis {

struct LloydConfig {
    int k = 1;
    int T = 10;
    double beta_sum = 1.0;
    double beta_count = 1.0;
    double r = 1.0;          // l1 domain radius
    double rho = 0.225;      // noise allocation constant

    void validate() const {
        if (k < 1 || T < 1 || !(beta_sum > 0.0) || !(beta_count > 0.0) ||
            !(r > 0.0) || !(rho > 0.0))
            throw std::invalid_argument("LloydConfig: all fields must be positive");
    }
};

struct Centers {
    Matrix points;  // k rows of dimension d

    Index k() const { return points.rows(); }
    Index dim() const { return points.cols(); }
};

/// Laplace scales for the sum and count queries given the allocation
/// constant B: beta_sum = sqrt(T r / B) * cbrt(d / (2 rho)) and
/// beta_count = cbrt(4 d rho^2) * beta_sum.
inline std::pair<double, double> allocate_noise(double B, int T, double r, int d,
                                                double rho = 0.225) {
    if (!(B > 0.0 && T > 0 && r > 0.0 && d > 0 && rho > 0.0))
        throw std::invalid_argument("allocate_noise: all inputs must be positive");
    const double beta_sum =
        std::sqrt(static_cast<double>(T) * r / B) * std::cbrt(static_cast<double>(d) / (2.0 * rho));
    const double beta_count = std::cbrt(4.0 * static_cast<double>(d) * rho * rho) * beta_sum;
    return {beta_sum, beta_count};
}

/// Nearest-center label per item by squared 2-norm, ties to the lowest index.
inline std::vector<int> assign_clusters(const WeightedDataset& data,
                                        const Centers& centers) {
    std::vector<int> labels(data.items.size());
    for (std::size_t i = 0; i < data.items.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (Index j = 0; j < centers.k(); ++j) {
            const double d2 = (data.items[i].point - centers.points.row(j).transpose())
                                  .squaredNorm();
            if (d2 < best) {
                best = d2;
                arg = static_cast<int>(j);
            }
        }
        labels[i] = arg;
    }
    return labels;
}

/// k initial centers drawn uniformly without replacement from the items.
inline Centers init_centers(const WeightedDataset& data, int k, std::uint64_t seed) {
    const auto n = static_cast<std::uint64_t>(data.items.size());
    if (n == 0 || static_cast<std::uint64_t>(k) > n)
        throw std::invalid_argument("init_centers: need at least k items");
    // Partial Fisher-Yates over indices, driven by the counter-based stream.
    std::vector<std::uint64_t> idx(n);
    for (std::uint64_t i = 0; i < n; ++i) idx[i] = i;
    Centers c;
    c.points.resize(k, data.dimension);
    for (int j = 0; j < k; ++j) {
        const std::uint64_t remaining = n - static_cast<std::uint64_t>(j);
        const double u = rng::to_unit(rng::key(seed, 0x696e6974ULL, static_cast<std::uint64_t>(j)));
        const auto pick = static_cast<std::uint64_t>(u * static_cast<double>(remaining));
        std::swap(idx[j], idx[j + std::min(pick, remaining - 1)]);
        c.points.row(j) = data.items[idx[j]].point.transpose();
    }
    return c;
}

/// Weighted DP-Lloyd: T iterations of nearest-center assignment followed by
/// the noisy update c_j = (zeta_j + sum w x) / (xi_j + sum w), with
/// xi_j ~ Lap(0, beta_count) and zeta_j entrywise Lap(0, beta_sum). Noise is
/// drawn from a substream indexed by (iteration, cluster), so the trajectory
/// is deterministic given the seed. A near-zero noisy denominator leaves the
/// center unchanged for that iteration.
inline Centers weighted_dp_lloyd(const WeightedDataset& data, const Centers& init,
                                 const LloydConfig& cfg, std::uint64_t seed,
                                 bool add_noise = true) {
    cfg.validate();
    if (data.items.empty()) throw std::invalid_argument("weighted_dp_lloyd: empty input");
    if (init.k() != cfg.k || init.dim() != data.dimension)
        throw std::invalid_argument("weighted_dp_lloyd: init centers shape mismatch");
    data.validate();

    const Index d = data.dimension;
    Centers centers = init;
    for (int t = 0; t < cfg.T; ++t) {
        const std::vector<int> labels = assign_clusters(data, centers);
        Matrix sums = Matrix::Zero(cfg.k, d);
        Vector counts = Vector::Zero(cfg.k);
        for (std::size_t i = 0; i < data.items.size(); ++i) {
            sums.row(labels[i]) += data.items[i].weight * data.items[i].point.transpose();
            counts(labels[i]) += data.items[i].weight;
        }
        for (int j = 0; j < cfg.k; ++j) {
            double xi = 0.0;
            Vector zeta = Vector::Zero(d);
            if (add_noise) {
                const auto tj = rng::key(seed, 0x6c6c6f79ULL, static_cast<std::uint64_t>(t),
                                         static_cast<std::uint64_t>(j));
                xi = rng::laplace(cfg.beta_count, rng::mix64(tj ^ 0));
                for (Index c = 0; c < d; ++c)
                    zeta(c) = rng::laplace(cfg.beta_sum,
                                           rng::mix64(tj ^ (1 + static_cast<std::uint64_t>(c))));
            }
            const double denom = xi + counts(j);
            if (denom <= 1e-12) continue;  // keep previous center
            centers.points.row(j) = (zeta.transpose() + sums.row(j)) / denom;
        }
    }
    return centers;
}

/// Weighted distinguishability profile of DP-Lloyd:
///   eps(w, x) = (1/beta_count + ||x||_1/beta_sum) * T * w,
/// linear in w, with strong convexity constant (a T)^2 e^{a T} for
/// exp(eps) where a = 1/beta_count + ||x||_1/beta_sum.
inline double lloyd_strong_convexity(const LloydConfig& cfg, const Vector& x) {
    const double a = 1.0 / cfg.beta_count + l1_norm(x) / cfg.beta_sum;
    const double aT = a * static_cast<double>(cfg.T);
    return aT * aT * std::exp(aT);  // min over w >= 1 of the second derivative
}

inline WeightedProfile lloyd_profile(const LloydConfig& cfg) {
    cfg.validate();
    const double T = cfg.T;
    const double bs = cfg.beta_sum;
    const double bc = cfg.beta_count;
    WeightedProfile p;
    p.eval = [T, bs, bc](double w, const Vector& x) {
        return (1.0 / bc + l1_norm(x) / bs) * T * w;
    };
    p.deriv = [T, bs, bc](double, const Vector& x) {
        return (1.0 / bc + l1_norm(x) / bs) * T;
    };
    p.strong_convexity = [cfg](const Vector& x) { return lloyd_strong_convexity(cfg, x); };
    return p;
}

/// Parameters of the coreset-mixture privacy bound.
struct CoreStats {
    Index n = 0;
    Index m = 0;
    double lambda = 0.5;
    double x_tilde = 0.0;
    double r = 0.0;
};

/// Closed-form eps-DP guarantee of DP-Lloyd under the coreset-mixture
/// sampler: log(1 + max{theta(A1, A2), theta(A1', A2')}) with
/// theta(u, v) = (e^{u/v} - 1) v. The amplified profile is maximized at
/// ||x||_1 in {0, r}; the two branches are those endpoints. With lambda = 0
/// the zero-norm endpoint has q = 0 and its branch is vacuous.
inline double core_sampler_epsilon(const LloydConfig& cfg, const CoreStats& stats) {
    cfg.validate();
    if (!(stats.lambda >= 0.0 && stats.lambda <= 1.0))
        throw std::invalid_argument("core_sampler_epsilon: lambda must be in [0, 1]");
    if (!(stats.x_tilde > 0.0) || !(stats.r > 0.0) || stats.n < 1 || stats.m < 1)
        throw std::invalid_argument("core_sampler_epsilon: invalid stats");
    const double n = static_cast<double>(stats.n);
    const double m = static_cast<double>(stats.m);
    if (m > n * stats.x_tilde / stats.r + 1e-12)
        throw std::invalid_argument("core_sampler_epsilon: m > n*x~/r");
    const double T = cfg.T;
    auto theta = [](double u, double v) { return std::expm1(u / v) * v; };
    const double a1 = (1.0 / cfg.beta_count + stats.r / cfg.beta_sum) * T;
    const double a2 = m / n * (stats.lambda + (1.0 - stats.lambda) * stats.r / stats.x_tilde);
    double worst = theta(a1, a2);
    if (stats.lambda > 0.0) {
        const double a1p = T / cfg.beta_count;
        const double a2p = stats.lambda * m / n;
        worst = std::max(worst, theta(a1p, a2p));
    }
    return std::log1p(worst);
}

/// Sum of squared 2-norm distances to the nearest center.
inline double kmeans_cost(const std::vector<Vector>& data, const Centers& centers) {
    double total = 0.0;
    for (const auto& x : data) {
        double best = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < centers.k(); ++j)
            best = std::min(best, (x - centers.points.row(j).transpose()).squaredNorm());
        total += best;
    }
    return total;
}

}  // namespace ampis
