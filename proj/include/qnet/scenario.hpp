#pragma once

#include <cstdint>
#include <vector>

#include "qnet/model.hpp"
#include "qnet/simulate.hpp"

namespace qnet {

enum class ScenarioPolicy { Fifo, LaterLegPriority };

// Demo network where each class follows a fixed route of servers with a
// per-leg mean service time. Routing here depends on the class, which puts
// these networks outside the class-independent hypothesis; they exist to
// exhibit instability below nominal load and to show the hypothesis is
// load-bearing. A route may visit each server at most once so that
// (server, class) determines the leg.
struct RoutedScenario {
    std::uint32_t num_servers = 0;
    std::vector<std::vector<std::uint32_t>> routes;  // per class, 0-based servers
    std::vector<std::vector<double>> mean_service;   // per class, per leg
    std::vector<double> arrival_rate;                // per class
    ScenarioPolicy policy = ScenarioPolicy::Fifo;

    double total_arrival_rate() const;
    double max_service_rate() const;
    double uniformization_rate() const;
    bool single_rate() const;
    // Nominal load of each server: sum over (class, leg) of rate * mean.
    std::vector<double> nominal_loads() const;
    void validate() const;  // throws ConfigError
};

EventType scenario_step(NetworkState& state, const RoutedScenario& scenario,
                        const rng::Streams& streams);

Trace demo_route_run(const RoutedScenario& scenario, std::uint64_t horizon,
                     std::uint64_t seed, std::uint64_t record_stride = 1);

// Single-rate scenario from x0 versus from empty on shared streams. Routing
// is class-determined, so dominance has no guarantee here; violations are
// recorded, never thrown.
DominanceReport monotone_scenario_run(const RoutedScenario& scenario, const CountVector& x0,
                                      std::uint64_t horizon, std::uint64_t seed);

// Probabilistic class-independent analogue: identical entry points and
// per-(class, server) service rates, with routing probabilities matched to
// the scenario's mean flows and shared by all classes.
NetworkSpec class_independent_analogue(const RoutedScenario& scenario);

// Per-server class priority mirroring "serve the latest leg first" in the
// analogue's class structure.
Policy analogue_priority_policy(const RoutedScenario& scenario);

}  // namespace qnet
