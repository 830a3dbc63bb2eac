#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ampis/optimal_weights.hpp"
#include "ampis/rng.hpp"
#include "ampis/types.hpp"

namespace ampis {

enum class SamplerFamily { Uniform, Coreset, Optimal, Full };

inline const char* family_name(SamplerFamily f) {
    switch (f) {
        case SamplerFamily::Uniform: return "unif";
        case SamplerFamily::Coreset: return "core";
        case SamplerFamily::Optimal: return "opt";
        case SamplerFamily::Full: return "full";
    }
    return "?";
}

/// Summary statistics of a (centered) dataset: size, dimension, largest and
/// mean l1-norm, and the l1-norm of the empirical mean (centering residual).
struct DatasetStats {
    Index n = 0;
    Index d = 0;
    double r = 0.0;        // max_i ||x_i||_1
    double x_tilde = 0.0;  // mean ||x_i||_1
    double center_l1 = 0.0;
};

inline DatasetStats compute_stats(const std::vector<Vector>& data) {
    DatasetStats s;
    s.n = static_cast<Index>(data.size());
    if (data.empty()) return s;
    s.d = data.front().size();
    Vector mean = Vector::Zero(s.d);
    for (const auto& x : data) {
        const double nrm = l1_norm(x);
        s.r = std::max(s.r, nrm);
        s.x_tilde += nrm;
        mean += x;
    }
    s.x_tilde /= static_cast<double>(s.n);
    s.center_l1 = l1_norm(mean) / static_cast<double>(s.n);
    return s;
}

/// A selection-probability function q: X -> [0, 1] plus metadata. For the
/// optimal family, per-index probabilities bound to a specific dataset are
/// precomputed and used by draw().
struct SamplerSpec {
    SamplerFamily family = SamplerFamily::Full;
    std::function<double(const Vector&)> prob;  // q(x)
    double expected_size = 0.0;                 // sum of q over the bound dataset
    double lambda = 0.5;
    double m = 0.0;
    std::vector<double> bound_probs;  // per-index q, optimal family only

    double prob_at(std::size_t i, const Vector& x) const {
        return bound_probs.empty() ? prob(x) : bound_probs.at(i);
    }
};

struct SampleDraw {
    WeightedDataset items;
    std::uint64_t seed = 0;
    Index realized_size = 0;
};

/// Poisson importance sampling: each point enters independently with
/// probability q(x_i) and carries weight 1/q(x_i). The per-point Bernoulli
/// decision is a pure function of (seed, point index), so the draw is
/// order-independent and reproducible.
inline SampleDraw draw(const SamplerSpec& spec, const std::vector<Vector>& data,
                       std::uint64_t seed) {
    SampleDraw out;
    out.seed = seed;
    out.items.dimension = data.empty() ? 0 : data.front().size();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double q = spec.prob_at(i, data[i]);
        if (q > 1.0) throw std::logic_error("draw: q(x) > 1, invalid sampler spec");
        if (q == 0.0) continue;  // probability-zero points are never selected
        if (q < 0.0) throw std::logic_error("draw: q(x) < 0, invalid sampler spec");
        const double u = rng::to_unit(rng::key(seed, 0x706f6973ULL, i));
        if (u < q) out.items.items.push_back({1.0 / q, data[i]});
    }
    out.realized_size = static_cast<Index>(out.items.items.size());
    return out;
}

/// q(x) = 1 everywhere: the full-data "sampler".
inline SamplerSpec make_full(Index n) {
    SamplerSpec s;
    s.family = SamplerFamily::Full;
    s.prob = [](const Vector&) { return 1.0; };
    s.expected_size = static_cast<double>(n);
    s.m = static_cast<double>(n);
    s.lambda = 1.0;
    return s;
}

/// q(x) = m/n for every point.
inline SamplerSpec make_uniform(Index n, Index m) {
    if (!(m >= 1 && m <= n))
        throw std::invalid_argument("make_uniform: need 1 <= m <= n");
    SamplerSpec s;
    s.family = SamplerFamily::Uniform;
    const double q = static_cast<double>(m) / static_cast<double>(n);
    s.prob = [q](const Vector&) { return q; };
    s.expected_size = static_cast<double>(m);
    s.m = static_cast<double>(m);
    s.lambda = 1.0;
    return s;
}

/// Coreset-inspired mixture q(x) = lambda*m/n + (1-lambda)*m*||x||_1/(n*x~).
/// Requires centered data and m <= n*x~/r so that q <= 1 on the whole domain.
inline SamplerSpec make_coreset(const DatasetStats& stats, Index m, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("make_coreset: lambda must be in [0, 1]");
    if (!(m >= 1)) throw std::invalid_argument("make_coreset: m must be >= 1");
    if (stats.x_tilde <= 0.0)
        throw std::invalid_argument("make_coreset: degenerate data, mean l1-norm is 0");
    if (stats.center_l1 > 1e-9 * stats.x_tilde)
        throw std::invalid_argument("make_coreset: data is not centered");
    const double n = static_cast<double>(stats.n);
    if (static_cast<double>(m) > n * stats.x_tilde / stats.r + 1e-12)
        throw std::invalid_argument("make_coreset: m > n*x~/r, q would exceed 1");
    SamplerSpec s;
    s.family = lambda == 1.0 ? SamplerFamily::Uniform : SamplerFamily::Coreset;
    const double base = lambda * static_cast<double>(m) / n;
    const double slope = (1.0 - lambda) * static_cast<double>(m) / (n * stats.x_tilde);
    s.prob = [base, slope](const Vector& x) { return base + slope * l1_norm(x); };
    s.expected_size = static_cast<double>(m);  // exact: the data is centered
    s.m = static_cast<double>(m);
    s.lambda = lambda;
    return s;
}

/// Privacy-optimal sampler: q(x_i) = 1/w*_i from the per-point solve. The
/// solved probabilities are bound to `data` by index; prob(x) re-solves for
/// arbitrary points.
inline SamplerSpec make_optimal(const WeightedProfile& profile,
                                const std::vector<Vector>& data, double eps_star,
                                const SolverConfig& cfg_in = {}) {
    SolverConfig cfg = cfg_in;
    cfg.target_epsilon = eps_star;
    WeightSolution sol = solve_dataset(profile, data, cfg);
    SamplerSpec s;
    s.family = SamplerFamily::Optimal;
    s.bound_probs.reserve(sol.weights.size());
    for (double w : sol.weights) {
        s.bound_probs.push_back(1.0 / w);
        s.expected_size += 1.0 / w;
    }
    s.prob = [profile, cfg](const Vector& x) {
        return 1.0 / solve_point(profile, x, cfg).weight;
    };
    s.lambda = 0.0;
    s.m = s.expected_size;
    return s;
}

/// Horvitz-Thompson estimate of the full-data objective from a weighted
/// sample: sum of w * loss(x) over the sample. Unbiased for any q.
inline double estimate_objective(const SampleDraw& sample,
                                 const std::function<double(const Vector&)>& loss) {
    double total = 0.0;
    for (const auto& it : sample.items.items) total += it.weight * loss(it.point);
    return total;
}

}  // namespace ampis
