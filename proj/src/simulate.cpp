#include "qnet/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "qnet/errors.hpp"

namespace qnet {

const char* Policy::name() const {
    switch (type) {
        case PolicyType::Fifo: return "fifo";
        case PolicyType::Lifo: return "lifo";
        case PolicyType::StaticPriority: return "priority";
        case PolicyType::RandomOrder: return "random";
    }
    return "?";
}

const char* event_name(EventType e) {
    switch (e) {
        case EventType::Arrival: return "E1";
        case EventType::Move: return "E2";
        case EventType::Exit: return "E3";
        case EventType::SelfLoop: return "E4";
    }
    return "?";
}

NetworkState::NetworkState(std::uint32_t num_classes, std::uint32_t num_servers)
    : queues(num_servers, std::vector<std::deque<Customer>>(num_classes)),
      counts(num_classes, num_servers),
      departure_count(num_servers, 0) {}

NetworkState::NetworkState(const CountVector& x0)
    : NetworkState(x0.num_classes, x0.num_servers) {
    for (std::uint32_t a = 0; a < x0.num_classes; ++a) {
        for (std::uint32_t j = 0; j < x0.num_servers; ++j) {
            for (std::int64_t c = 0; c < x0.at(a, j); ++c) {
                queues[j][a].push_back(Customer{next_customer_id++, 0, 0});
            }
            counts.at(a, j) = x0.at(a, j);
            total += x0.at(a, j);
        }
    }
}

bool NetworkState::counts_consistent() const {
    std::int64_t sum = 0;
    for (std::uint32_t j = 0; j < counts.num_servers; ++j) {
        for (std::uint32_t a = 0; a < counts.num_classes; ++a) {
            const auto actual = static_cast<std::int64_t>(queues[j][a].size());
            if (actual != counts.at(a, j)) return false;
            sum += actual;
        }
    }
    return sum == total;
}

namespace {

// In-service class at server j plus the position to pop on departure.
struct Selection {
    std::uint32_t cls = 0;
    bool from_front = true;      // FIFO within class vs LIFO tail
    std::size_t random_pos = 0;  // RandomOrder only
    bool is_random = false;
};

const std::vector<std::uint32_t>* priority_order(const Policy& policy, std::uint32_t server) {
    if (policy.priority_by_server.empty()) return nullptr;
    if (policy.priority_by_server.size() == 1) return &policy.priority_by_server[0];
    return &policy.priority_by_server[server];
}

Selection select_in_service(const NetworkState& state, const Policy& policy,
                            std::uint32_t server, const rng::Streams& streams,
                            std::uint64_t& policy_draws) {
    const auto& buckets = state.queues[server];
    const std::uint32_t num_classes = static_cast<std::uint32_t>(buckets.size());
    Selection sel;
    switch (policy.type) {
        case PolicyType::Fifo: {
            // Earliest arrival wins; ids break ties among same-epoch arrivals.
            std::uint64_t best_epoch = 0, best_id = 0;
            bool found = false;
            for (std::uint32_t c = 0; c < num_classes; ++c) {
                if (buckets[c].empty()) continue;
                const Customer& head = buckets[c].front();
                if (!found || head.arrival_epoch < best_epoch ||
                    (head.arrival_epoch == best_epoch && head.id < best_id)) {
                    best_epoch = head.arrival_epoch;
                    best_id = head.id;
                    sel.cls = c;
                    found = true;
                }
            }
            if (!found) throw std::logic_error("work conservation violated: no customer found");
            sel.from_front = true;
            return sel;
        }
        case PolicyType::Lifo: {
            std::uint64_t best_epoch = 0, best_id = 0;
            bool found = false;
            for (std::uint32_t c = 0; c < num_classes; ++c) {
                if (buckets[c].empty()) continue;
                const Customer& tail = buckets[c].back();
                if (!found || tail.arrival_epoch > best_epoch ||
                    (tail.arrival_epoch == best_epoch && tail.id > best_id)) {
                    best_epoch = tail.arrival_epoch;
                    best_id = tail.id;
                    sel.cls = c;
                    found = true;
                }
            }
            if (!found) throw std::logic_error("work conservation violated: no customer found");
            sel.from_front = false;
            return sel;
        }
        case PolicyType::StaticPriority: {
            const auto* order = priority_order(policy, server);
            if (order != nullptr) {
                for (const std::uint32_t c : *order) {
                    if (c < num_classes && !buckets[c].empty()) {
                        sel.cls = c;
                        return sel;
                    }
                }
            }
            // Unlisted classes (or no order at all): class index order.
            for (std::uint32_t c = 0; c < num_classes; ++c) {
                if (!buckets[c].empty()) {
                    sel.cls = c;
                    return sel;
                }
            }
            throw std::logic_error("work conservation violated: no customer found");
        }
        case PolicyType::RandomOrder: {
            std::size_t present = 0;
            for (const auto& b : buckets) present += b.size();
            if (present == 0)
                throw std::logic_error("work conservation violated: no customer found");
            const double u = streams.policy(policy_draws++);
            std::size_t pick = std::min(present - 1,
                                        static_cast<std::size_t>(u * static_cast<double>(present)));
            for (std::uint32_t c = 0; c < num_classes; ++c) {
                if (pick < buckets[c].size()) {
                    sel.cls = c;
                    sel.is_random = true;
                    sel.random_pos = pick;
                    return sel;
                }
                pick -= buckets[c].size();
            }
            throw std::logic_error("random selection out of range");
        }
    }
    throw std::logic_error("unknown policy");
}

Customer pop_selected(NetworkState& state, std::uint32_t server, const Selection& sel) {
    auto& bucket = state.queues[server][sel.cls];
    Customer out;
    if (sel.is_random) {
        out = bucket[sel.random_pos];
        bucket.erase(bucket.begin() + static_cast<std::ptrdiff_t>(sel.random_pos));
    } else if (sel.from_front) {
        out = bucket.front();
        bucket.pop_front();
    } else {
        out = bucket.back();
        bucket.pop_back();
    }
    --state.counts.at(sel.cls, server);
    --state.total;
    return out;
}

void push_customer(NetworkState& state, std::uint32_t server, std::uint32_t cls, Customer c) {
    state.queues[server][cls].push_back(c);
    ++state.counts.at(cls, server);
    ++state.total;
}

// Destination of a routing decision: a server index or J for exit.
std::uint32_t route_destination(const NetworkSpec& spec, std::uint32_t server, double u) {
    double cum = 0.0;
    for (std::uint32_t k = 0; k < spec.num_servers; ++k) {
        cum += spec.routing(server, k);
        if (u < cum) return k;
    }
    return spec.num_servers;
}

std::pair<std::uint32_t, std::uint32_t> sample_assignment(const NetworkSpec& spec, double u) {
    double cum = 0.0;
    for (std::uint32_t a = 0; a < spec.num_classes; ++a) {
        for (std::uint32_t j = 0; j < spec.num_servers; ++j) {
            cum += spec.assign_prob(a, j);
            if (u < cum) return {a, j};
        }
    }
    // Total mass is 1 up to roundoff; land the sliver on the last cell.
    return {spec.num_classes - 1, spec.num_servers - 1};
}

}  // namespace

EventType step(NetworkState& state, const NetworkSpec& spec, const Policy& policy,
               const rng::Streams& streams, const StepConfig& config) {
    const double q = config.q > 0.0 ? config.q : spec.uniformization_rate();
    const double p_arr = spec.lambda / q;
    const double slot_width = (1.0 - p_arr) / static_cast<double>(spec.num_servers);

    const std::uint64_t epoch = state.epoch++;
    const double u_event = streams.arrival(epoch);
    if (u_event < p_arr) {
        const auto [cls, server] = sample_assignment(spec, streams.assign(state.arrival_count));
        ++state.arrival_count;
        push_customer(state, server, cls, Customer{state.next_customer_id++, epoch, 0});
        return EventType::Arrival;
    }

    const auto slot = std::min<std::uint32_t>(
        spec.num_servers - 1,
        static_cast<std::uint32_t>((u_event - p_arr) / slot_width));
    if (state.server_total(slot) == 0) return EventType::SelfLoop;

    const Selection sel = select_in_service(state, policy, slot, streams, state.policy_draws);
    const double mu = spec.service_rate(sel.cls, slot);
    const double u_service = streams.service(slot, epoch);
    if (u_service * slot_width >= mu / q) return EventType::SelfLoop;

    Customer customer = pop_selected(state, slot, sel);
    const std::uint64_t route_index = config.routing == RouteIndexing::DepartureCount
                                          ? state.departure_count[slot]
                                          : epoch;
    ++state.departure_count[slot];
    const std::uint32_t dest = route_destination(spec, slot, streams.route(slot, route_index));
    if (dest >= spec.num_servers) return EventType::Exit;
    customer.arrival_epoch = epoch;
    push_customer(state, dest, sel.cls, customer);
    return EventType::Move;
}

namespace {

void record(Trace& trace, const NetworkState& state, EventType event,
            const Matrix* visit_counts) {
    trace.epochs.push_back(state.epoch);
    trace.events.push_back(event);
    trace.totals.push_back(state.total);
    trace.counts.insert(trace.counts.end(), state.counts.counts.begin(),
                        state.counts.counts.end());
    if (visit_counts != nullptr) {
        for (std::uint32_t j = 0; j < state.counts.num_servers; ++j)
            trace.lyapunov.push_back(lyapunov_value(state.counts, *visit_counts, j));
    }
    if (!state.counts_consistent())
        throw std::logic_error("count bookkeeping diverged from queue contents");
}

}  // namespace

Trace run(const NetworkSpec& spec, const Policy& policy, std::uint64_t horizon,
          std::uint64_t seed, const RunOptions& options) {
    require_valid(spec);
    rng::Streams streams(seed, spec.num_servers);
    NetworkState state = options.initial_state != nullptr
                             ? NetworkState(*options.initial_state)
                             : NetworkState(spec.num_classes, spec.num_servers);

    Trace trace;
    trace.num_classes = spec.num_classes;
    trace.num_servers = spec.num_servers;
    trace.record_stride = std::max<std::uint64_t>(1, options.record_stride);
    trace.has_lyapunov = options.visit_counts != nullptr;

    for (std::uint64_t n = 0; n < horizon; ++n) {
        const EventType event = step(state, spec, policy, streams);
        if (state.epoch % trace.record_stride == 0)
            record(trace, state, event, options.visit_counts);
    }
    return trace;
}

CoupledResult coupled_run(const ReducedNetwork& red, const Policy& policy,
                          std::uint64_t horizon, std::uint64_t seed,
                          std::uint64_t record_stride) {
    const NetworkSpec& fast = red.base;      // S
    const NetworkSpec& slow = red.reduced_spec;  // S'
    require_valid(fast);
    require_valid(slow);

    rng::Streams streams(seed, fast.num_servers);
    NetworkState state_fast(fast.num_classes, fast.num_servers);
    NetworkState state_slow(slow.num_classes, slow.num_servers);
    const StepConfig conf_fast{red.q1, RouteIndexing::DepartureCount};
    const StepConfig conf_slow{red.q2, RouteIndexing::DepartureCount};

    CoupledResult out;
    for (Trace* t : {&out.trace_slow, &out.trace_fast}) {
        t->num_classes = fast.num_classes;
        t->num_servers = fast.num_servers;
        t->record_stride = std::max<std::uint64_t>(1, record_stride);
    }
    out.report.seed = seed;
    out.report.epochs = horizon;

    for (std::uint64_t n = 0; n < horizon; ++n) {
        // Shared streams; identical epoch cursors give identical draws.
        const EventType ev_fast = step(state_fast, fast, policy, streams, conf_fast);
        const EventType ev_slow = step(state_slow, slow, policy, streams, conf_slow);
        if (state_slow.total < state_fast.total) {
            out.report.dominance_ok = false;
            ++out.report.violation_count;
            if (!out.report.first_violation_epoch)
                out.report.first_violation_epoch = state_fast.epoch;
            throw CouplingBroken("total count of the slow network fell below the fast one at epoch " +
                                 std::to_string(state_fast.epoch));
        }
        if (state_fast.epoch % out.trace_fast.record_stride == 0) {
            record(out.trace_fast, state_fast, ev_fast, nullptr);
            record(out.trace_slow, state_slow, ev_slow, nullptr);
        }
    }
    return out;
}

DominanceReport monotone_coupled_run(const NetworkSpec& spec, const Policy& policy,
                                     const CountVector& x0, std::uint64_t horizon,
                                     std::uint64_t seed) {
    require_valid(spec);
    if (!spec.single_rate())
        throw NotSingleRate("monotone_coupled_run requires a single service rate");
    if (x0.num_classes != spec.num_classes || x0.num_servers != spec.num_servers)
        throw DimensionMismatch("x0 shape disagrees with spec");

    rng::Streams streams(seed, spec.num_servers);
    NetworkState big(x0);
    NetworkState small(spec.num_classes, spec.num_servers);
    const StepConfig conf{0.0, RouteIndexing::Opportunity};

    DominanceReport report;
    report.seed = seed;
    report.epochs = horizon;
    for (std::uint64_t n = 0; n < horizon; ++n) {
        step(big, spec, policy, streams, conf);
        step(small, spec, policy, streams, conf);
        for (std::uint32_t j = 0; j < spec.num_servers; ++j) {
            if (big.server_total(j) < small.server_total(j)) {
                report.dominance_ok = false;
                ++report.violation_count;
                if (!report.first_violation_epoch) report.first_violation_epoch = big.epoch;
                throw CouplingBroken("per-queue dominance failed at server " +
                                     std::to_string(j + 1) + ", epoch " +
                                     std::to_string(big.epoch));
            }
        }
    }
    return report;
}

}  // namespace qnet
