#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnet/lyapunov.hpp"
#include "qnet/model.hpp"
#include "qnet/simulate.hpp"

namespace qnet {

// Monte-Carlo estimate of E[V_j(X^k) | X^0 = x] - V_j(x) for every server j.
// Replication r runs on its own substream derived from (seed, r); results are
// bit-reproducible for a fixed seed and independent of evaluation order.
std::vector<DriftEstimate> multi_step_drift(const NetworkSpec& spec,
                                            const TrafficSolution& sol, const Policy& policy,
                                            const CountVector& x, std::uint32_t k,
                                            std::uint32_t replications, std::uint64_t seed);

struct UubRow {
    std::uint32_t server = 0;
    std::size_t state_id = 0;
    std::uint32_t k = 0;
    double estimate = 0.0;  // k-step drift divided by k
    double stderr_ = 0.0;
    double analytic = 0.0;  // one-step closed form when k == 1 and single rate, else NaN
};

struct UubReport {
    std::vector<UubRow> rows;
    // estimate(x) <= estimate(0) + 3 * pooled stderr, per (server, k, state).
    bool comparison_ok = true;
    std::vector<std::string> comparison_violations;
    // Long-run drift slope per server from the two largest k at the zero
    // state: (Delta^{k2} V - Delta^{k1} V) / (k2 - k1). Reported only.
    std::vector<double> cstar;
};

// Table of k-step drift averages over the given start states, with the
// empirical companion check of the drift-monotonicity consequence. The zero
// state is prepended when missing. Replications share substreams across
// states (common random numbers), so the x-versus-0 comparison rides the
// same coupling the theory uses.
UubReport uub_estimate(const NetworkSpec& spec, const TrafficSolution& sol,
                       const Policy& policy, const std::vector<CountVector>& states,
                       const std::vector<std::uint32_t>& ks, std::uint32_t replications,
                       std::uint64_t seed);

}  // namespace qnet
