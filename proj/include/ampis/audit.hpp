#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ampis/rng.hpp"
#include "ampis/sampler.hpp"
#include "ampis/types.hpp"

namespace ampis {

struct AuditReport {
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
    long samples = 0;
};

inline AuditReport finish_report(std::string name, double observed, double bound,
                                 double tolerance, long samples) {
    AuditReport r;
    r.name = std::move(name);
    r.observed = observed;
    r.bound = bound;
    r.tolerance = tolerance;
    r.samples = samples;
    r.passed = observed <= bound + tolerance;
    return r;
}

/// Checks the analytic log-density ratio of a noisy weighted sum under
/// neighboring weighted datasets against the sensitivity bound w*||x||_1/beta.
/// The two output densities are shifted products of Laplace densities with
/// means 0 and w*x; the log-ratio at y is (||y - w*x||_1 - ||y||_1)/beta.
/// The grid runs along the line through both means, extended by 10*beta.
inline AuditReport audit_density_ratio(double beta, double w, const Vector& x,
                                       int grid) {
    if (grid < 100) throw std::invalid_argument("audit_density_ratio: grid must be >= 100");
    if (!(beta > 0.0) || !(w >= 1.0))
        throw std::invalid_argument("audit_density_ratio: need beta > 0 and w >= 1");
    const Vector shift = w * x;
    Vector dir = shift;
    if (dir.norm() == 0.0) {
        dir = Vector::Zero(x.size() > 0 ? x.size() : 1);
        dir(0) = 1.0;
    } else {
        dir /= dir.norm();
    }
    const double span = shift.norm();
    double observed = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double t = -10.0 * beta +
                         (span + 20.0 * beta) * static_cast<double>(i) /
                             static_cast<double>(grid - 1);
        const Vector y = t * dir;
        const double log_ratio = ((y - shift).lpNorm<1>() - y.lpNorm<1>()) / beta;
        observed = std::max(observed, std::abs(log_ratio));
    }
    const double bound = w * l1_norm(x) / beta;
    return finish_report("density_ratio", observed, bound, 1e-9, grid);
}

/// Verifies the amplification formula on a two-outcome randomized-response
/// mechanism with exactly known eps_true. All output laws are finite, so the
/// subsampled likelihood ratio is computed by exact mixture arithmetic:
///   observed = max log-ratio, bound = log(1 + q (e^{eps_true} - 1)).
inline AuditReport audit_amplification_mc(double q, double eps_true, int trials) {
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("audit_amplification_mc: q must be in [0, 1]");
    if (!(eps_true >= 0.0))
        throw std::invalid_argument("audit_amplification_mc: eps_true must be >= 0");
    // Output laws of the base mechanism on the two neighboring datasets.
    const double e = std::exp(eps_true);
    const double p1 = e / (1.0 + e);   // P(outcome 1 | point present)
    const double q1 = 1.0 / (1.0 + e); // P(outcome 1 | point absent)
    // Subsampled mechanism: sees the point with probability q.
    const double mix1 = q * p1 + (1.0 - q) * q1;
    const double mix0 = 1.0 - mix1;
    const double ref1 = q1;
    const double ref0 = 1.0 - q1;
    double observed = 0.0;
    for (double ratio : {mix1 / ref1, ref1 / mix1, mix0 / ref0, ref0 / mix0})
        observed = std::max(observed, std::log(ratio));
    const double bound = std::log1p(q * std::expm1(eps_true));
    AuditReport r = finish_report("amplification_exact", observed, bound, 1e-12, trials);
    // Exact arithmetic: the observed ratio must also attain the bound.
    r.passed = r.passed && std::abs(observed - bound) <= 1e-12;
    return r;
}

/// Monte-Carlo check that the Horvitz-Thompson estimate of the objective is
/// unbiased: |mean over draws - phi_D| <= 3 standard errors.
inline AuditReport audit_unbiasedness(const SamplerSpec& spec,
                                      const std::vector<Vector>& data,
                                      const std::function<double(const Vector&)>& loss,
                                      int trials, std::uint64_t seed = 12345) {
    if (trials < 10000)
        throw std::invalid_argument("audit_unbiasedness: trials must be >= 10^4");
    double phi = 0.0;
    for (const auto& x : data) phi += loss(x);
    double mean = 0.0, m2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double est = estimate_objective(
            draw(spec, data, rng::key(seed, 0x756e6269ULL, static_cast<std::uint64_t>(t))), loss);
        const double delta = est - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta * (est - mean);
    }
    const double se = std::sqrt(m2 / static_cast<double>(trials - 1) /
                                static_cast<double>(trials));
    return finish_report("unbiasedness", std::abs(mean - phi), 3.0 * se, 0.0, trials);
}

}  // namespace ampis
