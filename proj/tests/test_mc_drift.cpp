#include <doctest.h>

#include <cmath>

#include "qnet/exactkernel.hpp"
#include "qnet/mc_drift.hpp"
#include "test_support.hpp"

using namespace qnet;
using namespace qnet::testing;

TEST_CASE("one-step Monte-Carlo drift agrees with the exact kernels") {
    const auto spec = tandem();
    const auto sol = solve_traffic(spec);
    CountVector x(1, 2);
    x.at(0, 1) = 2;

    const auto est = multi_step_drift(spec, sol, Policy::fifo(), x, 1, 100000, 31);
    for (std::uint32_t j = 0; j < 2; ++j) {
        const double oracle = brute_force_drift(spec, sol, x, j);
        INFO("server ", j, ": ", est[j].estimate, " +- ", est[j].stderr_, " vs ", oracle);
        CHECK(std::fabs(est[j].estimate - oracle) <= 3.0 * est[j].stderr_);
    }
    // Frozen value: server 2 busy in the single-rate tandem drifts by -2/7.
    CHECK(std::fabs(est[1].estimate - (-2.0 / 7.0)) <= 3.0 * est[1].stderr_);
}

TEST_CASE("multi-step drift is bit-reproducible for a fixed seed") {
    const auto spec = mm1();
    const auto sol = solve_traffic(spec);
    CountVector x(1, 1);
    const auto a = multi_step_drift(spec, sol, Policy::fifo(), x, 5, 2000, 7);
    const auto b = multi_step_drift(spec, sol, Policy::fifo(), x, 5, 2000, 7);
    CHECK(a[0].estimate == b[0].estimate);
    CHECK(a[0].stderr_ == b[0].stderr_);
}

TEST_CASE("uub table: estimates from x stay below estimates from zero") {
    const auto spec = mm1();  // lambda 1, mu 2, Q = 3
    const auto sol = solve_traffic(spec);

    CountVector x5(1, 1);
    x5.at(0, 0) = 5;
    const std::vector<CountVector> states = {CountVector(1, 1), x5};
    const std::vector<std::uint32_t> ks = {1, 10, 50};
    const auto report = uub_estimate(spec, sol, Policy::fifo(), states, ks, 20000, 101);

    CHECK(report.comparison_ok);
    REQUIRE_EQ(report.rows.size(), states.size() * ks.size());

    // Cross-check the k = 50 estimates against the exact kernel.
    const auto chain = build_kernel(spec, 40);
    for (const auto& row : report.rows) {
        if (row.k != 50) continue;
        const auto exact =
            exact_k_drift(chain, sol.visit_counts, states[row.state_id], row.server, row.k);
        INFO("state ", row.state_id, ": ", row.estimate, " +- ", row.stderr_, " vs ",
             exact.direct);
        CHECK(std::fabs(row.estimate - exact.direct) <= 4.0 * row.stderr_);
    }

    // k = 1 rows carry the analytic closed form and match it.
    for (const auto& row : report.rows) {
        if (row.k != 1) continue;
        CHECK_FALSE(std::isnan(row.analytic));
        CHECK(std::fabs(row.estimate - row.analytic) <= 3.0 * row.stderr_ + 1e-12);
    }

    // cstar estimates exist and sit near zero for this stable chain.
    REQUIRE_EQ(report.cstar.size(), 1);
    CHECK(std::fabs(report.cstar[0]) < 0.05);
}

TEST_CASE("uub prepends the zero state when missing") {
    const auto spec = mm1();
    const auto sol = solve_traffic(spec);
    CountVector x(1, 1);
    x.at(0, 0) = 2;
    const auto report = uub_estimate(spec, sol, Policy::fifo(), {x}, {1}, 100, 3);
    bool has_zero_row = false;
    for (const auto& row : report.rows) has_zero_row |= row.state_id == 0;
    CHECK(has_zero_row);
    CHECK(report.rows.size() == 2);
}
