#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ampis/sampler.hpp"
#include "ampis/types.hpp"

namespace ampis::harness {

struct SyntheticSpec {
    Index n = 5000;
    Index d = 5;
    int k_true = 5;
    double cluster_spread = 0.05;
};

struct ExperimentConfig {
    std::optional<std::string> input_path;
    SyntheticSpec synthetic;  // used when input_path is empty
    int k = 25;
    int T = 10;
    std::vector<Index> m_list = {5000, 10000, 20000};
    std::vector<double> B_list = {0.0001, 0.001, 0.01, 0.1, 1.0, 3.0};
    double lambda = 0.5;
    double trim_fraction = 0.025;
    int repetitions = 50;
    std::vector<SamplerFamily> families = {SamplerFamily::Full, SamplerFamily::Uniform,
                                           SamplerFamily::Coreset, SamplerFamily::Optimal};
    std::uint64_t seed = 0;
    double rho = 0.225;
    std::string output_path;
};

/// One experiment repetition. On failure, ok is false and error carries the
/// reason; the numeric fields are unset.
struct RunRecord {
    std::string family;
    double B = 0.0;
    Index m = 0;
    std::uint64_t seed = 0;
    double epsilon = 0.0;     // realized eps-DP guarantee
    double max_psi = 0.0;     // max amplified profile over the data (opt only)
    double cost = 0.0;        // full-data k-means cost divided by n
    Index realized_size = 0;
    double wall_ms = 0.0;
    bool ok = true;
    std::string error;
};

struct SummaryRow {
    std::string family;
    double B = 0.0;
    Index m = 0;
    double epsilon = 0.0;
    double cost_median = 0.0;
    double cost_q25 = 0.0;
    double cost_q75 = 0.0;
    int reps = 0;
};

std::vector<Vector> load_csv(const std::string& path);

/// Center, drop the floor(trim_fraction * n) points with the highest
/// l1-norms (ties by input order, later rows dropped first), re-center, and
/// report r and x~ of the result.
std::pair<std::vector<Vector>, DatasetStats> preprocess(const std::vector<Vector>& data,
                                                        double trim_fraction);

std::vector<Vector> make_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records);

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);
void write_metadata(const std::string& path, const ExperimentConfig& cfg,
                    const DatasetStats& stats);

/// Linear interpolation between order statistics on sorted values.
double quantile_sorted(const std::vector<double>& sorted, double p);

}  // namespace ampis::harness
