#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ampis/audit.hpp"
#include "ampis/dp_kmeans.hpp"
#include "ampis/harness.hpp"
#include "ampis/privacy_core.hpp"
#include "ampis/sampler.hpp"

namespace {

using namespace ampis;

std::vector<SamplerFamily> parse_families(const std::vector<std::string>& names) {
    std::vector<SamplerFamily> out;
    for (const auto& s : names) {
        if (s == "full")
            out.push_back(SamplerFamily::Full);
        else if (s == "unif")
            out.push_back(SamplerFamily::Uniform);
        else if (s == "core")
            out.push_back(SamplerFamily::Coreset);
        else if (s == "opt")
            out.push_back(SamplerFamily::Optimal);
        else
            throw CLI::ValidationError("unknown family: " + s);
    }
    return out;
}

std::vector<Vector> load_data(const std::string& input,
                              const std::vector<double>& synthetic, std::uint64_t seed) {
    if (!input.empty()) return harness::load_csv(input);
    harness::SyntheticSpec spec;
    if (synthetic.size() == 4) {
        spec.n = static_cast<Index>(synthetic[0]);
        spec.d = static_cast<Index>(synthetic[1]);
        spec.k_true = static_cast<int>(synthetic[2]);
        spec.cluster_spread = synthetic[3];
    }
    return harness::make_synthetic(spec, seed);
}

int run_audit_suite() {
    std::vector<AuditReport> reports;

    Vector x(3);
    x << 0.2, -0.1, 0.15;
    reports.push_back(audit_density_ratio(1.0, 2.0, x, 10000));
    reports.push_back(audit_density_ratio(0.5, 5.0, x, 10000));
    for (double q : {0.1, 0.5, 0.9})
        for (double eps : {0.5, 1.0, 2.0}) reports.push_back(audit_amplification_mc(q, eps, 1));

    const auto data = harness::make_synthetic({200, 3, 3, 0.05}, 7);
    auto [centered, stats] = harness::preprocess(data, 0.0);
    auto loss = [](const Vector& v) { return v.squaredNorm(); };
    reports.push_back(audit_unbiasedness(make_uniform(stats.n, stats.n / 2), centered,
                                         loss, 20000));
    reports.push_back(audit_unbiasedness(make_coreset(stats, stats.n / 4, 0.5), centered,
                                         loss, 20000));

    bool all = true;
    for (const auto& r : reports) {
        std::printf("%-22s %s  observed=%.12g bound=%.12g tol=%g samples=%ld\n",
                    r.name.c_str(), r.passed ? "PASS" : "FAIL", r.observed, r.bound,
                    r.tolerance, r.samples);
        all = all && r.passed;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Privacy amplification via Poisson importance sampling"};
    app.require_subcommand(1);
    app.set_config("--config");

    // run
    auto* run = app.add_subcommand("run", "Run the experiment sweep");
    harness::ExperimentConfig cfg;
    std::string input, out = "results.csv";
    std::vector<double> synthetic;
    std::vector<std::string> families = {"full", "unif", "core", "opt"};
    run->add_option("--input", input, "CSV input file");
    run->add_option("--synthetic", synthetic, "n,d,k_true,spread")->expected(4);
    run->add_option("--k", cfg.k, "number of clusters");
    run->add_option("--T", cfg.T, "Lloyd iterations");
    run->add_option("--m", cfg.m_list, "target sample sizes");
    run->add_option("--B", cfg.B_list, "allocation constants");
    run->add_option("--lambda", cfg.lambda, "coreset mixture weight");
    run->add_option("--trim", cfg.trim_fraction, "trim fraction");
    run->add_option("--reps", cfg.repetitions, "repetitions per cell");
    run->add_option("--families", families, "subset of full,unif,core,opt");
    run->add_option("--seed", cfg.seed, "root seed");
    run->add_option("--rho", cfg.rho, "noise allocation constant");
    run->add_option("--out", out, "output CSV path");

    // audit
    auto* audit_cmd = app.add_subcommand("audit", "Run the privacy audit suite");

    // weights
    auto* weights = app.add_subcommand("weights", "Emit optimal q(x_i) per point");
    std::string w_input, w_out = "weights.csv";
    std::vector<double> w_synthetic;
    double w_B = 1.0, w_trim = 0.025, w_rho = 0.225;
    int w_T = 10;
    std::uint64_t w_seed = 0;
    weights->add_option("--input", w_input, "CSV input file");
    weights->add_option("--synthetic", w_synthetic, "n,d,k_true,spread")->expected(4);
    weights->add_option("--B", w_B, "allocation constant");
    weights->add_option("--T", w_T, "Lloyd iterations");
    weights->add_option("--trim", w_trim, "trim fraction");
    weights->add_option("--rho", w_rho, "noise allocation constant");
    weights->add_option("--seed", w_seed, "root seed");
    weights->add_option("--out", w_out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*audit_cmd) return run_audit_suite();

        if (*run) {
            if (!input.empty()) cfg.input_path = input;
            if (synthetic.size() == 4) {
                cfg.synthetic.n = static_cast<Index>(synthetic[0]);
                cfg.synthetic.d = static_cast<Index>(synthetic[1]);
                cfg.synthetic.k_true = static_cast<int>(synthetic[2]);
                cfg.synthetic.cluster_spread = synthetic[3];
            }
            cfg.families = parse_families(families);
            cfg.output_path = out;
            const auto records = harness::run_experiment(cfg);
            const auto rows = harness::aggregate(records);
            harness::write_summary_csv(out, rows);
            const auto raw = cfg.input_path ? harness::load_csv(*cfg.input_path)
                                            : harness::make_synthetic(cfg.synthetic, cfg.seed);
            auto [d2, stats] = harness::preprocess(raw, cfg.trim_fraction);
            harness::write_metadata(out + ".meta.json", cfg, stats);
            std::size_t failed = 0;
            for (const auto& r : records) failed += r.ok ? 0 : 1;
            std::cout << records.size() << " runs (" << failed << " failed/skipped), "
                      << rows.size() << " summary rows -> " << out << '\n';
            return 0;
        }

        if (*weights) {
            const auto raw = load_data(w_input, w_synthetic, w_seed);
            auto [data, stats] = harness::preprocess(raw, w_trim);
            auto [bs, bc] = allocate_noise(w_B, w_T, stats.r, static_cast<int>(stats.d), w_rho);
            const LloydConfig lc{1, w_T, bs, bc, stats.r, w_rho};
            const double eps_star = (stats.r / bs + 1.0 / bc) * w_T;
            const SamplerSpec spec = make_optimal(lloyd_profile(lc), data, eps_star);
            std::ofstream f(w_out);
            if (!f) throw std::runtime_error("cannot open " + w_out);
            f.precision(17);
            f << "index,l1_norm,q,weight\n";
            for (std::size_t i = 0; i < data.size(); ++i)
                f << i << ',' << l1_norm(data[i]) << ',' << spec.bound_probs[i] << ','
                  << 1.0 / spec.bound_probs[i] << '\n';
            std::cout << data.size() << " points, eps*=" << eps_star
                      << ", expected sample size " << spec.expected_size << " -> " << w_out
                      << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
