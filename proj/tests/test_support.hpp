#pragma once

#include <cstdint>
#include <vector>

#include "qnet/lyapunov.hpp"
#include "qnet/model.hpp"
#include "qnet/rng.hpp"
#include "qnet/scenario.hpp"

namespace qnet::testing {

// --- gallery networks -------------------------------------------------------

inline NetworkSpec mm1(double lambda = 1.0, double mu = 2.0) {
    NetworkSpec s;
    s.num_servers = 1;
    s.num_classes = 1;
    s.lambda = lambda;
    s.assign_prob = Matrix{{1.0}};
    s.service_rate = Matrix{{mu}};
    s.routing = Matrix{{0.0}};
    return s;
}

inline NetworkSpec tandem(double lambda = 1.0, double mu = 3.0) {
    NetworkSpec s;
    s.num_servers = 2;
    s.num_classes = 1;
    s.lambda = lambda;
    s.assign_prob = Matrix{{1.0, 0.0}};
    s.service_rate = Matrix{{mu, mu}};
    s.routing = Matrix{{0.0, 1.0}, {0.0, 0.0}};
    return s;
}

inline NetworkSpec feedback(double lambda = 0.2, double mu = 1.0, double loop = 0.5) {
    NetworkSpec s;
    s.num_servers = 1;
    s.num_classes = 1;
    s.lambda = lambda;
    s.assign_prob = Matrix{{1.0}};
    s.service_rate = Matrix{{mu}};
    s.routing = Matrix{{loop}};
    return s;
}

// Three-server one-class ring with exits; lambda tuned so the max load is
// rho_max (server 1 carries lambda / (1 - 0.7^3)).
inline NetworkSpec ring3(double rho_max = 0.8, double mu = 1.0) {
    NetworkSpec s;
    s.num_servers = 3;
    s.num_classes = 1;
    s.lambda = rho_max * mu * (1.0 - 0.343);
    s.assign_prob = Matrix{{1.0, 0.0, 0.0}};
    s.service_rate = Matrix(1, 3, mu);
    s.routing = Matrix{{0.0, 0.7, 0.0}, {0.0, 0.0, 0.7}, {0.7, 0.0, 0.0}};
    return s;
}

// Two classes over three single-rate servers; lambda scaled afterwards by
// callers that want a specific max load.
inline NetworkSpec multiclass2x3(double lambda = 1.0, double mu = 1.0) {
    NetworkSpec s;
    s.num_servers = 3;
    s.num_classes = 2;
    s.lambda = lambda;
    s.assign_prob = Matrix{{0.3, 0.1, 0.1}, {0.1, 0.3, 0.1}};
    s.service_rate = Matrix(2, 3, mu);
    s.routing = Matrix{{0.0, 0.3, 0.2}, {0.2, 0.0, 0.3}, {0.3, 0.2, 0.0}};
    return s;
}

// Rescales lambda so that max_j sum_a rho(a,j) equals `target`.
NetworkSpec scale_to_max_load(NetworkSpec spec, double target);

// Two-station two-type fixed-route scenario: type 1 runs 1 -> 2, type 2 runs
// 2 -> 1; light first legs, heavy second legs (nominal station loads 0.7,
// second-leg loads summing to 1.2).
inline RoutedScenario two_station_scenario(ScenarioPolicy policy) {
    RoutedScenario sc;
    sc.num_servers = 2;
    sc.routes = {{0, 1}, {1, 0}};
    sc.mean_service = {{0.1, 0.6}, {0.1, 0.6}};
    sc.arrival_rate = {1.0, 1.0};
    sc.policy = policy;
    return sc;
}

// --- randomized specs --------------------------------------------------------

struct SpecSampler {
    std::uint64_t key;
    std::uint64_t index = 0;
    explicit SpecSampler(std::uint64_t seed)
        : key(rng::stream_key(seed, rng::StreamTag::Generic)) {}
    double uniform() { return rng::draw_uniform(key, index++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint32_t uniform_int(std::uint32_t lo, std::uint32_t hi) {  // inclusive
        return lo + static_cast<std::uint32_t>(uniform() * static_cast<double>(hi - lo + 1));
    }
};

// Valid spec with substochastic routing (row sums in [0.2, 0.9], so openness
// holds by construction), arbitrary service rates.
NetworkSpec random_spec(SpecSampler& sampler, std::uint32_t max_servers,
                        std::uint32_t max_classes);

// As above but all service rates equal.
NetworkSpec random_single_rate_spec(SpecSampler& sampler, std::uint32_t max_servers,
                                    std::uint32_t max_classes);

// --- independent oracles -----------------------------------------------------

// Visit counts via the truncated Neumann series sum_{n<=depth} R^n.
Matrix neumann_visit_counts(const Matrix& routing, std::uint32_t depth);

// All count vectors with total <= cap over an (classes x servers) grid,
// optionally thinned to at most `limit` states (deterministic selection).
std::vector<CountVector> enumerate_states(std::uint32_t num_classes,
                                          std::uint32_t num_servers, std::uint32_t cap,
                                          std::size_t limit = 0);

}  // namespace qnet::testing
