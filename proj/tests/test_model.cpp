#include <doctest.h>

#include <cmath>

#include "qnet/errors.hpp"
#include "qnet/model.hpp"
#include "test_support.hpp"

using namespace qnet;
using namespace qnet::testing;

TEST_CASE("minimal M/M/1 validates") {
    const auto report = validate_network(mm1());
    CHECK(report.valid());
    CHECK(report.warnings.empty());
}

TEST_CASE("routing row sum above one is rejected") {
    auto spec = tandem();
    spec.routing = Matrix{{0.6, 0.7}, {0.0, 0.0}};
    const auto report = validate_network(spec);
    REQUIRE_FALSE(report.valid());
    bool found = false;
    for (const auto& f : report.failures)
        found |= f.detail.find("routing row sum exceeds 1") != std::string::npos;
    CHECK(found);
}

TEST_CASE("closed network is rejected as not open") {
    auto spec = mm1();
    spec.routing = Matrix{{1.0}};
    const auto report = validate_network(spec);
    REQUIRE_FALSE(report.valid());
    bool found = false;
    for (const auto& f : report.failures)
        found |= f.detail.find("not open") != std::string::npos;
    CHECK(found);
}

TEST_CASE("a class that never enters is flagged, not rejected") {
    auto spec = mm1();
    spec.num_classes = 2;
    spec.assign_prob = Matrix{{1.0}, {0.0}};
    spec.service_rate = Matrix{{2.0}, {2.0}};
    const auto report = validate_network(spec);
    CHECK(report.valid());
    REQUIRE_EQ(report.warnings.size(), 1);
}

TEST_CASE("tandem traffic solution") {
    const auto sol = solve_traffic(tandem());
    CHECK(sol.arrival_rate(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.arrival_rate(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.visit_counts(0, 0) == doctest::Approx(1.0));
    CHECK(sol.visit_counts(0, 1) == doctest::Approx(1.0));
    CHECK(sol.visit_counts(1, 0) == doctest::Approx(0.0));
    CHECK(sol.visit_counts(1, 1) == doctest::Approx(1.0));
    CHECK(sol.conservation_residual[0] < 1e-12);
    CHECK(sol.conservation_residual[1] < 1e-12);
}

TEST_CASE("feedback server: geometric series against route enumeration") {
    const auto spec = feedback();
    const auto sol = solve_traffic(spec);
    CHECK(sol.arrival_rate(0, 0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(sol.load(0, 0) == doctest::Approx(0.4).epsilon(1e-12));

    // Independent oracle: expected visits by truncated route enumeration,
    // sum of 0.5^n to depth 50.
    double expected = 0.0;
    for (int n = 0; n <= 50; ++n) expected += std::pow(0.5, n);
    CHECK(sol.visit_counts(0, 0) == doctest::Approx(expected).epsilon(1e-12));

    // Exogenous-rate reading of the conservation identity misses by the
    // feedback inflation; the equilibrium-rate reading closes.
    CHECK(sol.conservation_residual[0] < 1e-12);
    CHECK(sol.conservation_residual_exogenous[0] == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("immediate exit gives identity visit counts") {
    auto spec = mm1();
    const auto sol = solve_traffic(spec);
    CHECK(sol.arrival_rate(0, 0) == doctest::Approx(1.0));
    CHECK(sol.visit_counts(0, 0) == doctest::Approx(1.0));
    CHECK(sol.conservation_residual[0] == doctest::Approx(0.0));
}

TEST_CASE("symmetric two-server exchange against Neumann series") {
    const Matrix routing{{0.0, 0.5}, {0.5, 0.0}};
    const Matrix gamma = compute_visit_counts(routing);
    CHECK(gamma(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(gamma(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(gamma(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(gamma(1, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

    const Matrix oracle = neumann_visit_counts(routing, 200);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(gamma(i, k) == doctest::Approx(oracle(i, k)).epsilon(1e-10));
}

TEST_CASE("solve_traffic throws SingularSystem on a closed network") {
    auto spec = feedback();
    spec.routing = Matrix{{1.0}};
    CHECK_THROWS_AS(solve_traffic(spec), SingularSystem);
}

TEST_CASE("property: randomized specs satisfy every traffic invariant") {
    SpecSampler sampler(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const NetworkSpec spec = random_spec(sampler, 8, 4);
        REQUIRE(validate_network(spec).valid());
        const TrafficSolution sol = solve_traffic(spec);
        const std::uint32_t J = spec.num_servers;
        const std::uint32_t A = spec.num_classes;

        // Traffic equation residual, max norm.
        for (std::uint32_t a = 0; a < A; ++a) {
            for (std::uint32_t j = 0; j < J; ++j) {
                double rhs = spec.arrival_rate(a, j);
                for (std::uint32_t k = 0; k < J; ++k)
                    rhs += sol.arrival_rate(a, k) * spec.routing(k, j);
                CHECK(std::fabs(sol.arrival_rate(a, j) - rhs) < 1e-10);
                CHECK(sol.arrival_rate(a, j) >= -1e-12);
            }
        }

        // Left-inverse check, independent of the solver path.
        const Matrix prod = sol.visit_counts * (Matrix::identity(J) - spec.routing);
        for (std::uint32_t i = 0; i < J; ++i)
            for (std::uint32_t k = 0; k < J; ++k)
                CHECK(std::fabs(prod(i, k) - (i == k ? 1.0 : 0.0)) < 1e-9);

        for (std::uint32_t i = 0; i < J; ++i)
            for (std::uint32_t k = 0; k < J; ++k) CHECK(sol.visit_counts(i, k) >= -1e-12);

        for (std::uint32_t j = 0; j < J; ++j) CHECK(sol.conservation_residual[j] < 1e-9);

        // Linearity in lambda.
        NetworkSpec scaled = spec;
        scaled.lambda *= 3.5;
        const TrafficSolution sol2 = solve_traffic(scaled);
        for (std::uint32_t a = 0; a < A; ++a)
            for (std::uint32_t j = 0; j < J; ++j) {
                const double want = 3.5 * sol.arrival_rate(a, j);
                CHECK(std::fabs(sol2.arrival_rate(a, j) - want) <=
                      1e-12 * std::max(1.0, std::fabs(want)));
            }
    }
}
