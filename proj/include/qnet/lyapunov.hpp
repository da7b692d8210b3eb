#pragma once

#include <cstdint>
#include <vector>

#include "qnet/model.hpp"

namespace qnet {

// Number of class-a customers at server j. The analytic drift machinery only
// needs counts; ordered queue contents live in the simulator.
struct CountVector {
    std::uint32_t num_classes = 0;
    std::uint32_t num_servers = 0;
    std::vector<std::int64_t> counts;  // row-major, class-major

    CountVector() = default;
    CountVector(std::uint32_t classes, std::uint32_t servers)
        : num_classes(classes), num_servers(servers),
          counts(static_cast<std::size_t>(classes) * servers, 0) {}

    std::int64_t& at(std::uint32_t cls, std::uint32_t server) {
        return counts[static_cast<std::size_t>(cls) * num_servers + server];
    }
    std::int64_t at(std::uint32_t cls, std::uint32_t server) const {
        return counts[static_cast<std::size_t>(cls) * num_servers + server];
    }
    std::int64_t server_total(std::uint32_t server) const;
    std::int64_t total() const;
};

// Theorem-style per-server drift profile for single-rate networks:
// eta bounds the drift everywhere, epsilon is the guaranteed decrease off
// the empty set, cstar the estimated long-run drift slope (NaN when no
// estimate has been attached).
struct DriftProfile {
    std::vector<double> eta;
    std::vector<double> epsilon;
    std::vector<double> cstar;
};

struct DriftEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
};

// Virtual work load destined for server j: sum_a sum_k x(a,k) Gamma(k,j).
double lyapunov_value(const CountVector& x, const Matrix& visit_counts, std::uint32_t server);

// Closed-form one-step drift of V_j for single-rate specs,
// (sum_a Lambda(a,j) - mu * [x_j > 0]) / Q with Q = lambda + J*mu.
// Throws NotSingleRate when service rates differ.
double analytic_drift(const NetworkSpec& spec, const TrafficSolution& sol,
                      const CountVector& x, std::uint32_t server);

// Expected one-step drift of V_j by explicit enumeration of the uniformized
// event kernel (arrivals, departures that move, departures that exit, the
// self-loop). Works for general rates; for single-rate specs it equals
// analytic_drift to roundoff and is independent of which customer class is
// taken to be in service (asserted internally).
double brute_force_drift(const NetworkSpec& spec, const TrafficSolution& sol,
                         const CountVector& x, std::uint32_t server);

// eta/epsilon in closed form (single-rate only); cstar filled with NaN.
DriftProfile drift_profile(const NetworkSpec& spec, const TrafficSolution& sol);

}  // namespace qnet
