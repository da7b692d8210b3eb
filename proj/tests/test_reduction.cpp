#include <doctest.h>

#include <cmath>

#include "qnet/errors.hpp"
#include "qnet/reduction.hpp"
#include "test_support.hpp"

using namespace qnet;
using namespace qnet::testing;

namespace {

NetworkSpec infeasible_two_class() {
    // Two classes at one server, Lambda = (0.9, 0.9), mu = (10, 1):
    // rho = 0.99 < 1 but the summed flow 1.8 exceeds min mu = 1.
    NetworkSpec s;
    s.num_servers = 1;
    s.num_classes = 2;
    s.lambda = 1.8;
    s.assign_prob = Matrix{{0.5}, {0.5}};
    s.service_rate = Matrix{{10.0}, {1.0}};
    s.routing = Matrix{{0.0}};
    return s;
}

}  // namespace

TEST_CASE("M/M/1 reduction with the frozen eta") {
    const auto spec = mm1();  // lambda 1, mu 2, rho 0.5
    const auto sol = solve_traffic(spec);
    const auto red = build_reduction(spec, sol, Matrix{{0.1}});

    CHECK(red.scale == doctest::Approx(1.0));
    CHECK(red.lambda_prime == doctest::Approx(1.0));
    // Window (max(1, 1/0.6), 2) = (5/3, 2), midpoint 11/6.
    CHECK(red.mu == doctest::Approx(11.0 / 6.0).epsilon(1e-12));
    CHECK(red.q1 == doctest::Approx(6.0));
    CHECK(red.q2 == doctest::Approx(6.0));
    // Sandwich: 0.5 < 1/mu = 0.545.. < 0.6 < 1.
    const double rho_prime = red.lambda_prime / red.mu;
    CHECK(rho_prime > 0.5);
    CHECK(rho_prime < 0.6);

    const auto report = verify_reduction(red);
    for (const auto& c : report.checks) {
        INFO(c.name, " margin ", c.margin);
        CHECK(c.ok);
    }
}

TEST_CASE("already single-rate specs still reduce") {
    for (const auto& spec : {tandem(), feedback(), ring3(), scale_to_max_load(multiclass2x3(), 0.8)}) {
        const auto sol = solve_traffic(spec);
        const auto red = build_reduction(spec, sol);
        CHECK(red.mu < spec.min_service_rate() * red.scale + 1e-15);
        const auto report = verify_reduction(red);
        CHECK(report.all_ok());
    }
}

TEST_CASE("documented infeasible spec is rejected") {
    const auto spec = infeasible_two_class();
    const auto sol = solve_traffic(spec);
    CHECK(sol.server_load[0] == doctest::Approx(0.99));
    CHECK_THROWS_AS(build_reduction(spec, sol), Infeasible);
}

TEST_CASE("bad slack is rejected") {
    const auto spec = mm1();
    const auto sol = solve_traffic(spec);
    CHECK_THROWS_AS(build_reduction(spec, sol, Matrix{{0.6}}), BadSlack);   // rho + eta > 1
    CHECK_THROWS_AS(build_reduction(spec, sol, Matrix{{-0.1}}), BadSlack);  // eta <= 0
}

TEST_CASE("tampering trips verify_reduction") {
    const auto spec = mm1();
    const auto sol = solve_traffic(spec);
    auto red = build_reduction(spec, sol, Matrix{{0.1}});

    SUBCASE("mu at the boundary breaks rho' > rho") {
        red.mu = spec.min_service_rate() * red.scale;
        red.reduced_spec.service_rate = Matrix(1, 1, red.mu);
        const auto report = verify_reduction(red);
        bool tripped = false;
        for (const auto& c : report.checks)
            if (c.name.find("rho' > rho") != std::string::npos) tripped = !c.ok;
        CHECK(tripped);
    }

    SUBCASE("breaking the arrival probability match") {
        red.q2 *= 1.0 + 1e-9;
        const auto report = verify_reduction(red);
        bool tripped = false;
        for (const auto& c : report.checks)
            if (c.name.find("arrival_probability_match") != std::string::npos) tripped = !c.ok;
        CHECK(tripped);
    }
}

TEST_CASE("property: feasible reductions verify with strict margins") {
    SpecSampler sampler(9);
    int built = 0;
    for (int trial = 0; trial < 60 && built < 25; ++trial) {
        NetworkSpec spec = random_spec(sampler, 5, 3);
        TrafficSolution sol = solve_traffic(spec);
        double max_flow = 0.0, max_load = 0.0;
        for (std::uint32_t j = 0; j < spec.num_servers; ++j) {
            max_flow = std::max(max_flow, sol.total_arrival_rate(j));
            max_load = std::max(max_load, sol.server_load[j]);
        }
        if (max_load >= 1.0 || max_flow >= spec.min_service_rate()) continue;
        ++built;

        const auto red = build_reduction(spec, sol);
        const auto report = verify_reduction(red);
        for (const auto& c : report.checks) {
            INFO(c.name, " margin ", c.margin);
            CHECK(c.ok);
        }

        // Determinism: rebuilding gives the identical reduction.
        const auto red2 = build_reduction(spec, sol);
        CHECK(red2.mu == red.mu);
        CHECK(red2.lambda_prime == red.lambda_prime);
        CHECK(red2.q1 == red.q1);
        CHECK(red2.q2 == red.q2);
    }
    CHECK(built >= 10);
}
