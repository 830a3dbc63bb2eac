#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "ampis/harness.hpp"

using namespace ampis;
using namespace ampis::harness;

namespace {

std::string temp_file(const std::string& name, const std::string& contents) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << contents;
    return path;
}

}  // namespace

TEST_CASE("load_csv") {
    SUBCASE("rectangular file") {
        const auto path = temp_file("ampis_ok.csv", "1,2\n3,4\n");
        const auto data = load_csv(path);
        REQUIRE(data.size() == 2);
        CHECK(data[0](0) == 1.0);
        CHECK(data[0](1) == 2.0);
        CHECK(data[1](1) == 4.0);
        std::remove(path.c_str());
    }
    SUBCASE("ragged row is rejected with its position") {
        const auto path = temp_file("ampis_ragged.csv", "1,2\n3\n");
        CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("row 2"),
                             std::runtime_error);
        std::remove(path.c_str());
    }
    SUBCASE("non-numeric field is rejected") {
        const auto path = temp_file("ampis_bad.csv", "1,2\n3,abc\n");
        CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("column 2"),
                             std::runtime_error);
        std::remove(path.c_str());
    }
    SUBCASE("empty and missing files are rejected") {
        const auto path = temp_file("ampis_empty.csv", "");
        CHECK_THROWS_AS(load_csv(path), std::runtime_error);
        std::remove(path.c_str());
        CHECK_THROWS_AS(load_csv("/nonexistent/ampis.csv"), std::runtime_error);
    }
}

TEST_CASE("preprocess") {
    SUBCASE("center, trim the largest norm, re-center") {
        // Raw: {0, 1, -1, 8}; centered: {-2, -1, -3, 6}; drop the 6;
        // re-centered survivors: {0, 1, -1}.
        std::vector<Vector> data;
        for (double v : {0.0, 1.0, -1.0, 8.0}) {
            Vector x(1);
            x << v;
            data.push_back(x);
        }
        const auto [kept, stats] = preprocess(data, 0.25);
        REQUIRE(kept.size() == 3);
        CHECK(kept[0](0) == doctest::Approx(0.0));
        CHECK(kept[1](0) == doctest::Approx(1.0));
        CHECK(kept[2](0) == doctest::Approx(-1.0));
        CHECK(stats.r == doctest::Approx(1.0));
        CHECK(stats.center_l1 <= 1e-12);
    }
    SUBCASE("floor rule: trim below 1/n drops nothing") {
        std::vector<Vector> data(10, Vector::Zero(2));
        const auto [kept, stats] = preprocess(data, 0.025);
        CHECK(kept.size() == 10);
    }
    SUBCASE("ties drop later rows first") {
        // All norms equal after centering; the highest index goes.
        std::vector<Vector> data;
        for (double v : {-1.0, -1.0, 1.0, 1.0}) {
            Vector x(1);
            x << v;
            data.push_back(x);
        }
        const auto [kept, stats] = preprocess(data, 0.25);
        REQUIRE(kept.size() == 3);
        // Survivors {-1, -1, 1} re-centered to {-2/3, -2/3, 4/3}.
        CHECK(kept[2](0) == doctest::Approx(4.0 / 3.0));
        CHECK(stats.r == doctest::Approx(4.0 / 3.0));
    }
    CHECK_THROWS_AS(preprocess({Vector::Zero(1)}, 1.0), std::invalid_argument);
}

TEST_CASE("quantile_sorted uses linear interpolation") {
    const std::vector<double> v = {1.0, 2.0, 9.0};
    CHECK(quantile_sorted(v, 0.5) == 2.0);
    CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.5));
    CHECK(quantile_sorted(v, 0.75) == doctest::Approx(5.5));
    CHECK(quantile_sorted({3.0}, 0.5) == 3.0);
    CHECK_THROWS_AS(quantile_sorted({}, 0.5), std::invalid_argument);
}

TEST_CASE("aggregate groups by (family, B, m) and skips failed runs") {
    std::vector<RunRecord> recs;
    for (double c : {1.0, 2.0, 9.0}) {
        RunRecord r;
        r.family = "unif";
        r.B = 0.5;
        r.m = 10;
        r.epsilon = 0.7;
        r.cost = c;
        recs.push_back(r);
    }
    RunRecord bad;
    bad.family = "unif";
    bad.B = 0.5;
    bad.m = 10;
    bad.ok = false;
    recs.push_back(bad);
    RunRecord other;
    other.family = "full";
    other.B = 0.5;
    other.m = 10;
    other.cost = 4.0;
    recs.push_back(other);

    const auto rows = aggregate(recs);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].family == "unif");
    CHECK(rows[0].reps == 3);
    CHECK(rows[0].cost_median == 2.0);
    CHECK(rows[0].cost_q25 == doctest::Approx(1.5));
    CHECK(rows[0].cost_q75 == doctest::Approx(5.5));
    CHECK(rows[0].epsilon == 0.7);
    CHECK(rows[1].family == "full");
    CHECK(rows[1].reps == 1);
}

TEST_CASE("make_synthetic") {
    SyntheticSpec spec;
    spec.n = 100;
    spec.d = 3;
    spec.k_true = 4;

    SUBCASE("deterministic in the seed") {
        const auto a = make_synthetic(spec, 7);
        const auto b = make_synthetic(spec, 7);
        const auto c = make_synthetic(spec, 8);
        REQUIRE(a.size() == 100);
        double max_diff = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            max_diff = std::max(max_diff, (a[i] - b[i]).norm());
        CHECK(max_diff == 0.0);
        bool any_diff = false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if ((a[i] - c[i]).norm() > 0.0) any_diff = true;
        CHECK(any_diff);
    }
    SUBCASE("one component with zero spread collapses to a single point") {
        spec.k_true = 1;
        spec.cluster_spread = 0.0;
        const auto pts = make_synthetic(spec, 3);
        for (const auto& x : pts) CHECK((x - pts.front()).norm() == 0.0);
    }
    SUBCASE("norms land near 1 after the percentile rescale") {
        const auto pts = make_synthetic(spec, 5);
        double max_norm = 0.0;
        for (const auto& x : pts) max_norm = std::max(max_norm, l1_norm(x));
        CHECK(max_norm >= 1.0);
        CHECK(max_norm <= 3.0);
    }
}

TEST_CASE("run_experiment on a small sweep") {
    ExperimentConfig cfg;
    cfg.synthetic = {200, 2, 2, 0.05};
    cfg.k = 3;
    cfg.T = 2;
    cfg.m_list = {50};
    cfg.B_list = {1.0};
    cfg.repetitions = 2;
    cfg.seed = 17;

    SUBCASE("dense grid, deterministic, consistent bookkeeping") {
        const auto recs1 = run_experiment(cfg);
        const auto recs2 = run_experiment(cfg);
        REQUIRE(recs1.size() == 4 * 1 * 1 * 2);
        REQUIRE(recs1.size() == recs2.size());
        double eps_full = 0.0, eps_unif = 0.0, eps_opt = 0.0;
        for (std::size_t i = 0; i < recs1.size(); ++i) {
            CHECK(recs1[i].ok);
            CHECK(recs1[i].cost == recs2[i].cost);
            CHECK(recs1[i].epsilon == recs2[i].epsilon);
            CHECK(recs1[i].seed == recs2[i].seed);
            if (recs1[i].family == "full") {
                eps_full = recs1[i].epsilon;
                // 2.5% trimming drops 5 of the 200 synthetic points.
                CHECK(recs1[i].realized_size == 195);
            }
            if (recs1[i].family == "unif") eps_unif = recs1[i].epsilon;
            if (recs1[i].family == "opt") {
                eps_opt = recs1[i].epsilon;
                CHECK(recs1[i].max_psi <= recs1[i].epsilon + 1e-7);
            }
        }
        // The count/sum profile is linear in w, so uniform subsampling with
        // importance weights can only cost privacy; the optimal sampler
        // targets exactly the full-data guarantee.
        CHECK(eps_unif >= eps_full - 1e-12);
        CHECK(eps_opt == eps_full);
    }
    SUBCASE("lambda = 1 makes core and unif bookkeeping identical") {
        cfg.lambda = 1.0;
        cfg.families = {SamplerFamily::Uniform, SamplerFamily::Coreset};
        const auto recs = run_experiment(cfg);
        REQUIRE(recs.size() == 4);
        CHECK(recs[0].family == "unif");
        CHECK(recs[2].family == "core");
        CHECK(recs[0].epsilon == recs[2].epsilon);
    }
}

TEST_CASE("summary csv round trip") {
    SummaryRow row;
    row.family = "unif";
    row.B = 0.5;
    row.m = 10;
    row.epsilon = 0.25;
    row.cost_median = 1.5;
    row.cost_q25 = 1.0;
    row.cost_q75 = 2.0;
    row.reps = 3;
    const auto path = (std::filesystem::temp_directory_path() / "ampis_sum.csv").string();
    write_summary_csv(path, {row});
    std::ifstream in(path);
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    CHECK(header == "family,B,m,epsilon,cost_median,cost_q25,cost_q75,reps");
    CHECK(line == "unif,0.5,10,0.25,1.5,1,2,3");
    std::remove(path.c_str());
}
