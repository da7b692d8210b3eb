#include <doctest.h>

#include <cmath>

#include "qnet/errors.hpp"
#include "qnet/exactkernel.hpp"
#include "test_support.hpp"

using namespace qnet;
using namespace qnet::testing;

namespace {

CountVector single(std::uint32_t num_servers, std::uint32_t server, std::int64_t n) {
    CountVector x(1, num_servers);
    x.at(0, server) = n;
    return x;
}

}  // namespace

TEST_CASE("M/M/1 kernel at cap 2 matches the hand enumeration") {
    const auto chain = build_kernel(mm1(), 2);
    REQUIRE_EQ(chain.num_states(), 3);
    // Q = 3: from 0: stay 2/3, up 1/3; from 1: down 2/3, up 1/3; from 2
    // (blocked arrivals): down 2/3, stay 1/3.
    const double expected[3][3] = {{2.0 / 3, 1.0 / 3, 0.0},
                                   {2.0 / 3, 0.0, 1.0 / 3},
                                   {0.0, 2.0 / 3, 1.0 / 3}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 3; ++k)
            CHECK(chain.probability(i, k) == doctest::Approx(expected[i][k]).epsilon(1e-12));
}

TEST_CASE("no arrivals leaves only departure flow") {
    auto spec = mm1();
    spec.lambda = 1e-14;  // lambda must stay positive for validity; negligible
    const auto chain = build_kernel(spec, 3);
    // From state 2: down with 2/Q, else self.
    const auto idx2 = chain.index_of(single(1, 0, 2));
    const auto idx1 = chain.index_of(single(1, 0, 1));
    CHECK(chain.probability(idx2, idx1) ==
          doctest::Approx(2.0 / spec.uniformization_rate()).epsilon(1e-12));
}

TEST_CASE("tandem kernel at cap 1") {
    const auto chain = build_kernel(tandem(), 1);
    REQUIRE_EQ(chain.num_states(), 3);  // (0,0), lex over totals: (0,1), (1,0)
    const auto s00 = chain.index_of(CountVector(1, 2));
    const auto s01 = chain.index_of(single(2, 1, 1));
    const auto s10 = chain.index_of(single(2, 0, 1));
    const double q = 7.0;
    CHECK(chain.probability(s00, s10) == doctest::Approx(1.0 / q));
    CHECK(chain.probability(s00, s00) == doctest::Approx(1.0 - 1.0 / q));
    // Full server 1 moves its customer to server 2 (E2), blocked arrival folds in.
    CHECK(chain.probability(s10, s01) == doctest::Approx(3.0 / q));
    CHECK(chain.probability(s10, s10) == doctest::Approx(1.0 - 3.0 / q));
    // Server 2 exits (E3).
    CHECK(chain.probability(s01, s00) == doctest::Approx(3.0 / q));
}

TEST_CASE("rows are stochastic after construction") {
    for (const auto& spec : {mm1(), tandem(), feedback(), ring3()}) {
        const auto chain = build_kernel(spec, 8);
        for (const double s : chain.row_sums()) CHECK(std::fabs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("n-step empty probabilities: hand values") {
    const auto chain = build_kernel(mm1(), 20);
    const auto x0 = CountVector(1, 1);
    const auto x1 = single(1, 0, 1);
    CHECK(n_step_empty_prob(chain, x0, 0, 0) == doctest::Approx(1.0));
    CHECK(std::fabs(n_step_empty_prob(chain, x0, 0, 1) - 2.0 / 3.0) < 1e-12);
    CHECK(std::fabs(n_step_empty_prob(chain, x1, 0, 1) - 2.0 / 3.0) < 1e-12);
    CHECK(std::fabs(n_step_empty_prob(chain, x0, 0, 2) - 2.0 / 3.0) < 1e-12);
    CHECK(std::fabs(n_step_empty_prob(chain, x1, 0, 2) - 4.0 / 9.0) < 1e-12);
}

TEST_CASE("state space bound is enforced") {
    CHECK_THROWS_AS(build_kernel(ring3(), 60, 100), StateSpaceTooLarge);
}

TEST_CASE("kernel requires a single class") {
    CHECK_THROWS_AS(build_kernel(multiclass2x3(0.5), 4), ConfigError);
}

TEST_CASE("verify_lemma passes on the regression corpus") {
    struct Case {
        NetworkSpec spec;
        std::uint32_t cap;
    };
    const Case cases[] = {{mm1(), 12}, {tandem(), 10}, {feedback(), 12}, {ring3(), 10}};
    for (const auto& c : cases) {
        const auto chain = build_kernel(c.spec, c.cap);
        for (std::uint32_t j = 0; j < c.spec.num_servers; ++j) {
            const auto report = verify_lemma(chain, j, 60);
            CHECK(report.passed());
            CHECK(report.min_slack >= -1e-12);
        }
    }
}

TEST_CASE("exact k drift: two paths agree and match the one-step oracle") {
    const auto spec = mm1();
    const auto sol = solve_traffic(spec);
    const auto chain = build_kernel(spec, 30);

    const auto x5 = single(1, 0, 5);
    const auto x0 = CountVector(1, 1);

    // k = 1 equals brute_force_drift (two independent code paths).
    const auto d1 = exact_k_drift(chain, sol.visit_counts, x5, 0, 1);
    CHECK(std::fabs(d1.direct - brute_force_drift(spec, sol, x5, 0)) < 1e-12);
    const auto d0 = exact_k_drift(chain, sol.visit_counts, x0, 0, 1);
    CHECK(std::fabs(d0.direct - sol.total_arrival_rate(0) / spec.uniformization_rate()) < 1e-12);

    // Monotone toward zero in k from both starts; value(x) <= value(0).
    double prev5 = 1e9, prev0 = 1e9;
    for (const std::uint32_t k : {10u, 100u, 400u}) {
        const auto dx = exact_k_drift(chain, sol.visit_counts, x5, 0, k);
        const auto dz = exact_k_drift(chain, sol.visit_counts, x0, 0, k);
        CHECK(std::fabs(dx.direct - dx.identity) < 1e-10);
        CHECK(dx.direct <= dz.direct + 1e-10);
        CHECK(std::fabs(dx.direct) <= std::fabs(prev5) + 1e-12);
        CHECK(std::fabs(dz.direct) <= std::fabs(prev0) + 1e-12);
        prev5 = dx.direct;
        prev0 = dz.direct;
    }
}

TEST_CASE("exact k drift paths agree for interior states on the corpus") {
    for (const auto& spec : {mm1(), tandem(), feedback(), ring3()}) {
        const auto sol = solve_traffic(spec);
        const std::uint32_t cap = 12;
        const auto chain = build_kernel(spec, cap);
        for (const std::uint32_t k : {1u, 10u, 100u}) {
            for (std::uint32_t j = 0; j < spec.num_servers; ++j) {
                const auto table = exact_k_drift_all(chain, sol.visit_counts, j, k);
                for (std::size_t i = 0; i < chain.num_states(); ++i) {
                    std::uint64_t total = 0;
                    for (const auto c : chain.state(i)) total += c;
                    if (total > cap - 5) continue;
                    REQUIRE(std::fabs(table.direct[i] - table.identity[i]) < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("stationary distribution reproduces the M/M/1 mean") {
    const auto chain = build_kernel(mm1(), 40);
    const auto pi = stationary_distribution(chain);
    double mean = 0.0;
    for (std::size_t i = 0; i < chain.num_states(); ++i)
        mean += static_cast<double>(chain.state(i)[0]) * pi[i];
    // rho/(1-rho) = 1 for rho = 1/2; truncation at 40 is far in the tail.
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-6));
}
