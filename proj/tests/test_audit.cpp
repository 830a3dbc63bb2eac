#include <doctest.h>

#include <cmath>

#include "ampis/audit.hpp"
#include "ampis/rng.hpp"

using namespace ampis;

TEST_CASE("audit_density_ratio") {
    SUBCASE("identical distributions observe zero") {
        const auto r = audit_density_ratio(1.0, 1.0, Vector::Zero(2), 1000);
        CHECK(r.passed);
        CHECK(r.observed == 0.0);
        CHECK(r.bound == 0.0);
    }
    SUBCASE("shifted Laplace ratio stays within the sensitivity bound") {
        Vector x(1);
        x << 0.5;
        const auto r = audit_density_ratio(1.0, 2.0, x, 10000);
        CHECK(r.passed);
        CHECK(r.bound == doctest::Approx(1.0));
        CHECK(r.observed <= 1.0 + 1e-9);
        // The bound is tight: the grid extends past both means.
        CHECK(r.observed == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("negative control: doubling the shift breaks the stated bound") {
        Vector x(1);
        x << 0.5;
        auto r = audit_density_ratio(1.0, 4.0, x, 10000);  // shift inflated 2x
        r.bound = 2.0 * 0.5 / 1.0;  // the bound the un-inflated shift would claim
        CHECK(r.observed > r.bound);
    }
    CHECK_THROWS_AS(audit_density_ratio(1.0, 1.0, Vector::Zero(1), 50),
                    std::invalid_argument);
}

TEST_CASE("audit_amplification_mc is exact") {
    SUBCASE("q = 1 observes eps exactly") {
        const auto r = audit_amplification_mc(1.0, 1.3, 1);
        CHECK(r.passed);
        CHECK(r.observed == doctest::Approx(1.3).epsilon(1e-13));
    }
    SUBCASE("q = 0.5, eps = 1") {
        const auto r = audit_amplification_mc(0.5, 1.0, 1);
        CHECK(r.passed);
        CHECK(std::abs(r.observed - std::log1p(0.5 * std::expm1(1.0))) <= 1e-12);
    }
    SUBCASE("q -> 0 leaks nothing") {
        const auto r = audit_amplification_mc(0.0, 2.0, 1);
        CHECK(r.passed);
        CHECK(r.observed == 0.0);
    }
}

TEST_CASE("audit_unbiasedness") {
    std::vector<Vector> data;
    for (int i = 0; i < 100; ++i) {
        Vector x(1);
        x << (i - 49.5) / 49.5;
        data.push_back(x);
    }
    auto unit_loss = [](const Vector&) { return 1.0; };

    SUBCASE("full sampler observes exactly zero") {
        const auto r = audit_unbiasedness(make_full(100), data, unit_loss, 10000);
        CHECK(r.passed);
        CHECK(r.observed == 0.0);
    }
    SUBCASE("uniform q = 0.5 passes") {
        const auto r = audit_unbiasedness(make_uniform(100, 50), data, unit_loss, 100000);
        CHECK(r.passed);
    }
    SUBCASE("trial floor enforced") {
        CHECK_THROWS_AS(audit_unbiasedness(make_full(100), data, unit_loss, 100),
                        std::invalid_argument);
    }
}

TEST_CASE("audits are deterministic given seed and grid") {
    Vector x(2);
    x << 0.1, -0.3;
    const auto a = audit_density_ratio(0.7, 3.0, x, 5000);
    const auto b = audit_density_ratio(0.7, 3.0, x, 5000);
    CHECK(a.observed == b.observed);
    std::vector<Vector> data(10, Vector::Zero(1));
    auto loss = [](const Vector&) { return 2.0; };
    const auto u1 = audit_unbiasedness(make_uniform(10, 5), data, loss, 10000, 77);
    const auto u2 = audit_unbiasedness(make_uniform(10, 5), data, loss, 10000, 77);
    CHECK(u1.observed == u2.observed);
}
