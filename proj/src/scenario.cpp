#include "qnet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "qnet/errors.hpp"

namespace qnet {

double RoutedScenario::total_arrival_rate() const {
    double s = 0.0;
    for (double r : arrival_rate) s += r;
    return s;
}

double RoutedScenario::max_service_rate() const {
    double m = 0.0;
    for (const auto& legs : mean_service)
        for (double mean : legs) m = std::max(m, 1.0 / mean);
    return m;
}

double RoutedScenario::uniformization_rate() const {
    return total_arrival_rate() + static_cast<double>(num_servers) * max_service_rate();
}

bool RoutedScenario::single_rate() const {
    std::optional<double> first;
    for (const auto& legs : mean_service)
        for (double mean : legs) {
            if (!first) first = mean;
            else if (mean != *first) return false;
        }
    return true;
}

std::vector<double> RoutedScenario::nominal_loads() const {
    std::vector<double> load(num_servers, 0.0);
    for (std::size_t c = 0; c < routes.size(); ++c)
        for (std::size_t leg = 0; leg < routes[c].size(); ++leg)
            load[routes[c][leg]] += arrival_rate[c] * mean_service[c][leg];
    return load;
}

void RoutedScenario::validate() const {
    if (num_servers == 0) throw ConfigError("scenario: num_servers must be positive");
    if (routes.empty()) throw ConfigError("scenario: at least one class route required");
    if (routes.size() != mean_service.size() || routes.size() != arrival_rate.size())
        throw ConfigError("scenario: routes, mean_service, arrival_rate sizes disagree");
    for (std::size_t c = 0; c < routes.size(); ++c) {
        if (routes[c].empty()) throw ConfigError("scenario: empty route for a class");
        if (routes[c].size() != mean_service[c].size())
            throw ConfigError("scenario: route and mean_service length disagree for class " +
                              std::to_string(c + 1));
        std::vector<bool> seen(num_servers, false);
        for (const std::uint32_t j : routes[c]) {
            if (j >= num_servers) throw ConfigError("scenario: route server out of range");
            if (seen[j])
                throw ConfigError("scenario: a route may visit each server at most once");
            seen[j] = true;
        }
        for (const double mean : mean_service[c])
            if (!(mean > 0.0)) throw ConfigError("scenario: mean service times must be > 0");
        if (!(arrival_rate[c] > 0.0))
            throw ConfigError("scenario: arrival rates must be > 0");
    }
}

namespace {

// Leg of class c at server j, or nullopt when the route does not visit j.
std::optional<std::uint32_t> leg_at(const RoutedScenario& sc, std::uint32_t cls,
                                    std::uint32_t server) {
    const auto& route = sc.routes[cls];
    for (std::uint32_t leg = 0; leg < route.size(); ++leg)
        if (route[leg] == server) return leg;
    return std::nullopt;
}

// Pick the class to serve at `server`. FIFO compares arrival epochs across
// bucket heads; LaterLegPriority serves the class furthest along its route.
std::uint32_t select_class(const NetworkState& state, const RoutedScenario& sc,
                           std::uint32_t server) {
    const auto& buckets = state.queues[server];
    bool found = false;
    std::uint32_t best_cls = 0;
    if (sc.policy == ScenarioPolicy::LaterLegPriority) {
        std::uint32_t best_leg = 0;
        for (std::uint32_t c = 0; c < buckets.size(); ++c) {
            if (buckets[c].empty()) continue;
            const std::uint32_t leg = buckets[c].front().route_pos;
            if (!found || leg > best_leg) {
                best_leg = leg;
                best_cls = c;
                found = true;
            }
        }
    } else {
        std::uint64_t best_epoch = 0, best_id = 0;
        for (std::uint32_t c = 0; c < buckets.size(); ++c) {
            if (buckets[c].empty()) continue;
            const Customer& head = buckets[c].front();
            if (!found || head.arrival_epoch < best_epoch ||
                (head.arrival_epoch == best_epoch && head.id < best_id)) {
                best_epoch = head.arrival_epoch;
                best_id = head.id;
                best_cls = c;
                found = true;
            }
        }
    }
    if (!found) throw std::logic_error("work conservation violated: no customer found");
    return best_cls;
}

}  // namespace

EventType scenario_step(NetworkState& state, const RoutedScenario& sc,
                        const rng::Streams& streams) {
    const double q = sc.uniformization_rate();
    const double lambda = sc.total_arrival_rate();
    const double p_arr = lambda / q;
    const double slot_width = (1.0 - p_arr) / static_cast<double>(sc.num_servers);

    const std::uint64_t epoch = state.epoch++;
    const double u_event = streams.arrival(epoch);
    if (u_event < p_arr) {
        const double u = streams.assign(state.arrival_count++) * lambda;
        double cum = 0.0;
        std::uint32_t cls = static_cast<std::uint32_t>(sc.routes.size()) - 1;
        for (std::uint32_t c = 0; c < sc.routes.size(); ++c) {
            cum += sc.arrival_rate[c];
            if (u < cum) {
                cls = c;
                break;
            }
        }
        Customer customer{state.next_customer_id++, epoch, 0};
        state.queues[sc.routes[cls][0]][cls].push_back(customer);
        ++state.counts.at(cls, sc.routes[cls][0]);
        ++state.total;
        return EventType::Arrival;
    }

    const auto slot = std::min<std::uint32_t>(
        sc.num_servers - 1, static_cast<std::uint32_t>((u_event - p_arr) / slot_width));
    if (state.server_total(slot) == 0) return EventType::SelfLoop;

    const std::uint32_t cls = select_class(state, sc, slot);
    const Customer& head = state.queues[slot][cls].front();
    const double mu = 1.0 / sc.mean_service[cls][head.route_pos];
    const double u_service = streams.service(slot, epoch);
    if (u_service * slot_width >= mu / q) return EventType::SelfLoop;

    Customer customer = state.queues[slot][cls].front();
    state.queues[slot][cls].pop_front();
    --state.counts.at(cls, slot);
    --state.total;
    ++state.departure_count[slot];

    const std::uint32_t next_leg = customer.route_pos + 1;
    if (next_leg >= sc.routes[cls].size()) return EventType::Exit;
    customer.route_pos = next_leg;
    customer.arrival_epoch = epoch;
    const std::uint32_t dest = sc.routes[cls][next_leg];
    state.queues[dest][cls].push_back(customer);
    ++state.counts.at(cls, dest);
    ++state.total;
    return EventType::Move;
}

Trace demo_route_run(const RoutedScenario& scenario, std::uint64_t horizon,
                     std::uint64_t seed, std::uint64_t record_stride) {
    scenario.validate();
    const auto num_classes = static_cast<std::uint32_t>(scenario.routes.size());
    rng::Streams streams(seed, scenario.num_servers);
    NetworkState state(num_classes, scenario.num_servers);

    Trace trace;
    trace.num_classes = num_classes;
    trace.num_servers = scenario.num_servers;
    trace.record_stride = std::max<std::uint64_t>(1, record_stride);
    for (std::uint64_t n = 0; n < horizon; ++n) {
        const EventType event = scenario_step(state, scenario, streams);
        if (state.epoch % trace.record_stride == 0) {
            trace.epochs.push_back(state.epoch);
            trace.events.push_back(event);
            trace.totals.push_back(state.total);
            trace.counts.insert(trace.counts.end(), state.counts.counts.begin(),
                                state.counts.counts.end());
        }
    }
    return trace;
}

DominanceReport monotone_scenario_run(const RoutedScenario& scenario, const CountVector& x0,
                                      std::uint64_t horizon, std::uint64_t seed) {
    scenario.validate();
    const auto num_classes = static_cast<std::uint32_t>(scenario.routes.size());
    if (x0.num_classes != num_classes || x0.num_servers != scenario.num_servers)
        throw DimensionMismatch("x0 shape disagrees with scenario");

    rng::Streams streams(seed, scenario.num_servers);
    NetworkState big(x0);
    // Seed route positions: a class-c customer placed at server j starts at
    // the leg of c's route that visits j.
    for (std::uint32_t j = 0; j < scenario.num_servers; ++j) {
        for (std::uint32_t c = 0; c < num_classes; ++c) {
            if (big.queues[j][c].empty()) continue;
            const auto leg = leg_at(scenario, c, j);
            if (!leg)
                throw ConfigError("x0 places a class at a server its route never visits");
            for (auto& customer : big.queues[j][c]) customer.route_pos = *leg;
        }
    }
    NetworkState small(num_classes, scenario.num_servers);

    DominanceReport report;
    report.seed = seed;
    report.epochs = horizon;
    for (std::uint64_t n = 0; n < horizon; ++n) {
        scenario_step(big, scenario, streams);
        scenario_step(small, scenario, streams);
        for (std::uint32_t j = 0; j < scenario.num_servers; ++j) {
            if (big.server_total(j) < small.server_total(j)) {
                report.dominance_ok = false;
                ++report.violation_count;
                if (!report.first_violation_epoch) report.first_violation_epoch = big.epoch;
            }
        }
    }
    return report;
}

NetworkSpec class_independent_analogue(const RoutedScenario& scenario) {
    scenario.validate();
    const auto A = static_cast<std::uint32_t>(scenario.routes.size());
    const std::uint32_t J = scenario.num_servers;
    const double lambda = scenario.total_arrival_rate();

    NetworkSpec spec;
    spec.num_servers = J;
    spec.num_classes = A;
    spec.lambda = lambda;
    spec.assign_prob = Matrix(A, J);
    for (std::uint32_t c = 0; c < A; ++c)
        spec.assign_prob(c, scenario.routes[c][0]) = scenario.arrival_rate[c] / lambda;

    // Service rates: the class's rate at the servers its route visits; at
    // servers it never visits (reachable under probabilistic routing) use the
    // slowest of its own leg rates, a conservative stand-in.
    spec.service_rate = Matrix(A, J);
    for (std::uint32_t c = 0; c < A; ++c) {
        double slowest = std::numeric_limits<double>::infinity();
        for (const double mean : scenario.mean_service[c])
            slowest = std::min(slowest, 1.0 / mean);
        for (std::uint32_t j = 0; j < J; ++j) {
            const auto leg = leg_at(scenario, c, j);
            spec.service_rate(c, j) = leg ? 1.0 / scenario.mean_service[c][*leg] : slowest;
        }
    }

    // Routing matched to the scenario's mean flows: flow j->k aggregates
    // every class transition along its route, exits carry the rest.
    Matrix flow(J, J);
    std::vector<double> out_flow(J, 0.0);
    for (std::uint32_t c = 0; c < A; ++c) {
        const auto& route = scenario.routes[c];
        for (std::size_t leg = 0; leg < route.size(); ++leg) {
            out_flow[route[leg]] += scenario.arrival_rate[c];
            if (leg + 1 < route.size())
                flow(route[leg], route[leg + 1]) += scenario.arrival_rate[c];
        }
    }
    spec.routing = Matrix(J, J);
    for (std::uint32_t j = 0; j < J; ++j) {
        if (out_flow[j] == 0.0) continue;
        for (std::uint32_t k = 0; k < J; ++k) spec.routing(j, k) = flow(j, k) / out_flow[j];
    }
    return spec;
}

Policy analogue_priority_policy(const RoutedScenario& scenario) {
    const auto A = static_cast<std::uint32_t>(scenario.routes.size());
    std::vector<std::vector<std::uint32_t>> orders(scenario.num_servers);
    for (std::uint32_t j = 0; j < scenario.num_servers; ++j) {
        // Classes visiting j sorted by descending leg, i.e. latest leg first;
        // classes that never visit j trail in index order.
        std::vector<std::pair<std::int64_t, std::uint32_t>> keyed;
        for (std::uint32_t c = 0; c < A; ++c) {
            const auto leg = leg_at(scenario, c, j);
            keyed.emplace_back(leg ? -static_cast<std::int64_t>(*leg) : 1, c);
        }
        std::sort(keyed.begin(), keyed.end());
        for (const auto& [key, c] : keyed) orders[j].push_back(c);
    }
    return Policy::priority_per_server(std::move(orders));
}

}  // namespace qnet
