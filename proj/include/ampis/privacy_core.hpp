#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ampis/types.hpp"

namespace ampis {

/// Amplification by uniform subsampling: a point sampled with probability p
/// enjoys epsilon' = log(1 + (e^eps - 1) p) and delta' = p * delta.
inline PrivacyBudget subsample_amplify(const PrivacyBudget& budget, double p) {
    if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument("subsample_amplify: p must be in (0, 1]");
    return PrivacyBudget(std::log1p(std::expm1(budget.epsilon) * p), p * budget.delta);
}

/// Amplified distinguishability profile of a mechanism composed with a
/// Poisson importance sampler:
///   psi(x) = log(1 + q(x) * (exp(eps(1/q(x), x)) - 1)).
/// The sampler is given as its selection-probability function q. Evaluating
/// the returned profile at a point with q(x) = 0 or q(x) > 1 throws.
inline Profile amplified_profile(const WeightedProfile& profile,
                                 std::function<double(const Vector&)> q) {
    return Profile{[profile, q = std::move(q)](const Vector& x) -> double {
        const double qx = q(x);
        if (qx == 0.0)
            throw std::domain_error("amplified_profile: q(x) = 0, weight undefined");
        if (!(qx > 0.0 && qx <= 1.0))
            throw std::invalid_argument("amplified_profile: q(x) outside (0, 1]");
        const double w = 1.0 / qx;
        return std::log1p(qx * std::expm1(profile.eval(w, x)));
    }};
}

/// True iff some selection probability q(x) < 1 yields psi(x) < eps(1, x),
/// i.e. eps'(1, x) < 1 - exp(-eps(1, x)).
inline bool improvement_possible(const WeightedProfile& profile, const Vector& x) {
    return profile.deriv(1.0, x) < -std::expm1(-profile.eval(1.0, x));
}

/// Sampled certificate that no Poisson importance sampler can improve on the
/// full-data guarantee at x: checks eps(w, x) <= w * eps'(w, x) on the given
/// grid. The underlying condition quantifies over all w >= 1; a grid check
/// cannot prove it for a black-box profile, only refute it.
inline bool improvement_impossible(const WeightedProfile& profile, const Vector& x,
                                   const std::vector<double>& w_grid) {
    if (w_grid.empty())
        throw std::invalid_argument("improvement_impossible: empty grid");
    for (double w : w_grid) {
        if (!(w >= 1.0))
            throw std::invalid_argument("improvement_impossible: grid entries must be >= 1");
        if (profile.eval(w, x) > w * profile.deriv(w, x)) return false;
    }
    return true;
}

}  // namespace ampis
