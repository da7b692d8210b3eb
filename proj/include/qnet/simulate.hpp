#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "qnet/lyapunov.hpp"
#include "qnet/model.hpp"
#include "qnet/reduction.hpp"
#include "qnet/rng.hpp"

namespace qnet {

struct Customer {
    std::uint64_t id = 0;            // monotone per-chain counter
    std::uint64_t arrival_epoch = 0; // arrival at the current server
    std::uint32_t route_pos = 0;     // leg index, demo scenarios only
};

enum class PolicyType { Fifo, Lifo, StaticPriority, RandomOrder };

// Work-conserving selection of the in-service customer. StaticPriority is
// preemptive-resume: the selection is re-evaluated at every service
// opportunity, which with exponential service leaves the count process law
// unchanged. Priority order may differ per server; FIFO breaks ties within
// a class, trailing unlisted classes rank last in index order.
struct Policy {
    PolicyType type = PolicyType::Fifo;
    std::vector<std::vector<std::uint32_t>> priority_by_server;  // empty, 1 (broadcast) or J rows

    static Policy fifo() { return {}; }
    static Policy lifo() { return {PolicyType::Lifo, {}}; }
    static Policy random_order() { return {PolicyType::RandomOrder, {}}; }
    static Policy priority(std::vector<std::uint32_t> order) {
        return {PolicyType::StaticPriority, {std::move(order)}};
    }
    static Policy priority_per_server(std::vector<std::vector<std::uint32_t>> orders) {
        return {PolicyType::StaticPriority, std::move(orders)};
    }
    const char* name() const;
};

enum class EventType : std::uint8_t { Arrival, Move, Exit, SelfLoop };
const char* event_name(EventType e);  // "E1".."E4"

// Variable-dimension chain state: per-server, per-class FIFO sequences plus
// derived counts and the stream cursors (epoch, arrival count, per-server
// departure counts) that make coupled chains line up on shared streams.
struct NetworkState {
    std::vector<std::vector<std::deque<Customer>>> queues;  // [server][class]
    CountVector counts;
    std::int64_t total = 0;
    std::uint64_t epoch = 0;
    std::uint64_t arrival_count = 0;
    std::uint64_t policy_draws = 0;
    std::uint64_t next_customer_id = 0;
    std::vector<std::uint64_t> departure_count;  // per server

    NetworkState() = default;
    NetworkState(std::uint32_t num_classes, std::uint32_t num_servers);
    explicit NetworkState(const CountVector& x0);

    std::int64_t server_total(std::uint32_t j) const { return counts.server_total(j); }
    // Recounts the queues and checks them against the incremental tallies.
    bool counts_consistent() const;
};

// How routing decisions are indexed on the shared `route[j]` streams.
//  - DepartureCount: the k-th departure from server j reads entry k. This is
//    the construction the slower-network coupling needs: both chains walk the
//    same per-server decision sequence, the slower chain lagging behind.
//  - Opportunity: decisions are keyed by the epoch of the service
//    opportunity, so chains that depart at the same epoch route identically.
//    The from-x0-versus-from-0 comparison needs this form: with
//    count-indexed decisions two chains can consume different entries at a
//    shared departure epoch and per-queue dominance genuinely fails.
enum class RouteIndexing { DepartureCount, Opportunity };

struct StepConfig {
    double q = 0.0;  // uniformization rate; 0 = lambda + J * max mu
    RouteIndexing routing = RouteIndexing::DepartureCount;
};

// One uniformized transition. A single uniform from the `arrival` stream is
// partitioned into the arrival interval [0, lambda/Q) followed by one
// fixed-width slot per server; a slot hit draws that server's `service`
// uniform and the in-service customer departs when it clears mu/(Q*width).
// At most one event fires per epoch and the event law is exactly the
// E1/E2/E3/E4 kernel.
EventType step(NetworkState& state, const NetworkSpec& spec, const Policy& policy,
               const rng::Streams& streams, const StepConfig& config = {});

struct Trace {
    std::uint32_t num_classes = 0;
    std::uint32_t num_servers = 0;
    std::uint64_t record_stride = 1;
    std::vector<std::uint64_t> epochs;
    std::vector<EventType> events;
    std::vector<std::int64_t> totals;
    std::vector<std::int64_t> counts;    // rows of num_classes * num_servers
    std::vector<double> lyapunov;        // rows of num_servers when recorded
    bool has_lyapunov = false;

    std::size_t rows() const { return epochs.size(); }
    std::int64_t count_at(std::size_t row, std::uint32_t cls, std::uint32_t server) const {
        return counts[row * num_classes * num_servers + cls * num_servers + server];
    }
};

struct RunOptions {
    std::uint64_t record_stride = 1;
    const CountVector* initial_state = nullptr;
    const Matrix* visit_counts = nullptr;  // record V_j per epoch when given
};

Trace run(const NetworkSpec& spec, const Policy& policy, std::uint64_t horizon,
          std::uint64_t seed, const RunOptions& options = {});

struct DominanceReport {
    bool dominance_ok = true;
    std::uint64_t violation_count = 0;
    std::optional<std::uint64_t> first_violation_epoch;
    std::uint64_t epochs = 0;
    std::uint64_t seed = 0;
};

struct CoupledResult {
    Trace trace_slow;  // S'
    Trace trace_fast;  // S
    DominanceReport report;
};

// Runs S and S' on shared streams (one arrival stream since
// lambda/Q1 == lambda'/Q2, shared per-server service uniforms with nested
// thresholds, shared departure-count-indexed routing decisions) and asserts
// total(S') >= total(S) at every epoch. Throws CouplingBroken on violation:
// under a verified reduction a violation is an implementation bug, not a
// statistical event.
CoupledResult coupled_run(const ReducedNetwork& red, const Policy& policy,
                          std::uint64_t horizon, std::uint64_t seed,
                          std::uint64_t record_stride = 1);

// Runs the same single-rate network from x0 and from empty on shared streams
// (opportunity-indexed routing) and asserts per-queue dominance
// y_j(from x0) >= y_j(from 0) at every epoch for every server.
DominanceReport monotone_coupled_run(const NetworkSpec& spec, const Policy& policy,
                                     const CountVector& x0, std::uint64_t horizon,
                                     std::uint64_t seed);

}  // namespace qnet
