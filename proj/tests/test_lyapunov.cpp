#include <doctest.h>

#include <cmath>

#include "qnet/errors.hpp"
#include "qnet/lyapunov.hpp"
#include "test_support.hpp"

using namespace qnet;
using namespace qnet::testing;

TEST_CASE("lyapunov_value basics") {
    const auto spec = tandem();
    const auto sol = solve_traffic(spec);

    CountVector zero(1, 2);
    CHECK(lyapunov_value(zero, sol.visit_counts, 0) == 0.0);
    CHECK(lyapunov_value(zero, sol.visit_counts, 1) == 0.0);

    CountVector one_at_first(1, 2);
    one_at_first.at(0, 0) = 1;
    CHECK(lyapunov_value(one_at_first, sol.visit_counts, 0) == doctest::Approx(1.0));
    CHECK(lyapunov_value(one_at_first, sol.visit_counts, 1) == doctest::Approx(1.0));

    const auto fb = feedback();
    const auto fb_sol = solve_traffic(fb);
    CountVector three(1, 1);
    three.at(0, 0) = 3;
    CHECK(lyapunov_value(three, fb_sol.visit_counts, 0) == doctest::Approx(6.0).epsilon(1e-12));

    CHECK_THROWS_AS(lyapunov_value(three, sol.visit_counts, 0), DimensionMismatch);
}

TEST_CASE("lyapunov_value is additive") {
    const auto spec = ring3();
    const auto sol = solve_traffic(spec);
    CountVector x(1, 3), y(1, 3), sum(1, 3);
    x.at(0, 0) = 2;
    x.at(0, 2) = 1;
    y.at(0, 1) = 4;
    for (std::size_t i = 0; i < x.counts.size(); ++i) sum.counts[i] = x.counts[i] + y.counts[i];
    for (std::uint32_t j = 0; j < 3; ++j) {
        CHECK(lyapunov_value(sum, sol.visit_counts, j) ==
              doctest::Approx(lyapunov_value(x, sol.visit_counts, j) +
                              lyapunov_value(y, sol.visit_counts, j)));
    }
}

TEST_CASE("analytic drift on the frozen examples") {
    // Single-rate tandem, lambda = 1, mu = 3, Q = 7: busy server 2 drifts by
    // (1 - 3)/7.
    const auto spec = tandem();
    const auto sol = solve_traffic(spec);
    CountVector x(1, 2);
    x.at(0, 1) = 2;
    CHECK(analytic_drift(spec, sol, x, 1) == doctest::Approx(-2.0 / 7.0).epsilon(1e-12));
    // Empty server 1: indicator off.
    CHECK(analytic_drift(spec, sol, x, 0) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));

    // Feedback: lambda = 0.2, mu = 1, Q = 1.2, busy: (0.4 - 1)/1.2 = -0.5.
    const auto fb = feedback();
    const auto fb_sol = solve_traffic(fb);
    CountVector y(1, 1);
    y.at(0, 0) = 1;
    CHECK(analytic_drift(fb, fb_sol, y, 0) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("analytic_drift rejects mixed rates") {
    auto spec = tandem();
    spec.service_rate = Matrix{{3.0, 4.0}};
    const auto sol = solve_traffic(spec);
    CountVector x(1, 2);
    CHECK_THROWS_AS(analytic_drift(spec, sol, x, 0), NotSingleRate);
}

TEST_CASE("brute force drift equals the analytic form on the examples") {
    const auto spec = tandem();
    const auto sol = solve_traffic(spec);
    CountVector x(1, 2);
    x.at(0, 1) = 1;
    CHECK(std::fabs(brute_force_drift(spec, sol, x, 1) - (-2.0 / 7.0)) < 1e-12);

    CountVector zero(1, 2);
    // Only arrivals and the self-loop are possible from empty.
    CHECK(std::fabs(brute_force_drift(spec, sol, zero, 0) -
                    sol.total_arrival_rate(0) / spec.uniformization_rate()) < 1e-14);
}

TEST_CASE("brute force drift works standalone on general rates") {
    auto spec = multiclass2x3();
    spec.service_rate = Matrix{{1.0, 2.0, 0.7}, {1.5, 1.1, 0.9}};
    const auto sol = solve_traffic(spec);
    CountVector x(2, 3);
    x.at(0, 0) = 1;
    x.at(1, 2) = 2;
    CHECK(std::isfinite(brute_force_drift(spec, sol, x, 0)));
}

TEST_CASE("property: drift identity over randomized single-rate specs") {
    SpecSampler sampler(77);
    for (int trial = 0; trial < 50; ++trial) {
        const NetworkSpec spec = random_single_rate_spec(sampler, 3, 2);
        const TrafficSolution sol = solve_traffic(spec);
        const auto states = enumerate_states(spec.num_classes, spec.num_servers, 6, 400);
        for (const auto& x : states) {
            for (std::uint32_t j = 0; j < spec.num_servers; ++j) {
                const double a = analytic_drift(spec, sol, x, j);
                const double b = brute_force_drift(spec, sol, x, j);
                REQUIRE(std::fabs(a - b) < 1e-12);
            }
        }
    }
}

TEST_CASE("drift depends on the state only through the busy indicator") {
    SpecSampler sampler(1234);
    const NetworkSpec spec = random_single_rate_spec(sampler, 3, 2);
    const TrafficSolution sol = solve_traffic(spec);
    for (std::uint32_t j = 0; j < spec.num_servers; ++j) {
        // >= 10 states per emptiness value of server j, varying elsewhere.
        for (int busy = 0; busy <= 1; ++busy) {
            double reference = 0.0;
            bool first = true;
            int produced = 0;
            const auto states = enumerate_states(spec.num_classes, spec.num_servers, 4, 0);
            for (const auto& x : states) {
                if ((x.server_total(j) > 0) != (busy == 1)) continue;
                const double d = brute_force_drift(spec, sol, x, j);
                if (first) {
                    reference = d;
                    first = false;
                } else {
                    REQUIRE(std::fabs(d - reference) < 1e-12);
                }
                if (++produced >= 25) break;
            }
            CHECK(produced >= 10);
        }
    }
}

TEST_CASE("drift profile signs track the load condition") {
    const auto spec = tandem();
    const auto sol = solve_traffic(spec);
    const auto profile = drift_profile(spec, sol);
    for (std::uint32_t j = 0; j < 2; ++j) {
        CHECK(profile.eta[j] == doctest::Approx(sol.total_arrival_rate(j) / 7.0));
        CHECK(profile.epsilon[j] > 0.0);
        CHECK((sol.server_load[j] < 1.0));
    }

    // Overloaded single-rate network: epsilon goes nonpositive exactly when
    // the summed load reaches 1.
    auto hot = tandem(4.0, 3.0);  // rho = 4/3
    const auto hot_sol = solve_traffic(hot);
    const auto hot_profile = drift_profile(hot, hot_sol);
    for (std::uint32_t j = 0; j < 2; ++j) {
        CHECK((hot_sol.server_load[j] >= 1.0));
        CHECK(hot_profile.epsilon[j] <= 0.0);
    }
}
