#pragma once

#include <string>
#include <vector>

#include "qnet/model.hpp"

namespace qnet {

// Companion single-service-rate network S' for a general network S, together
// with the uniformization rates of the pair. Every inequality the coupled
// simulation relies on is an invariant here and re-checked by
// verify_reduction.
struct ReducedNetwork {
    NetworkSpec base;          // S
    NetworkSpec reduced_spec;  // S': same q and R, arrival rate lambda', all rates mu
    double lambda_prime = 0.0;
    double mu = 0.0;
    double scale = 1.0;  // s = lambda' / lambda
    Matrix eta_slack;    // per-(class, server) load headroom, > 0
    double q1 = 0.0;     // uniformization rate of S
    double q2 = 0.0;     // uniformization rate of S'
};

struct ReductionCheck {
    std::string name;
    bool ok = false;
    double margin = 0.0;  // smallest slack of the inequality family
    std::string detail;
};

struct ReductionReport {
    std::vector<ReductionCheck> checks;
    bool all_ok() const;
};

// Builds S' from S. `eta` may be empty (a feasible default is derived),
// a 1x1 scalar broadcast, or a full A x J matrix. Throws Infeasible when
// max_j sum_a Lambda(a,j) >= min mu (no single rate can both dominate the
// summed flow and stay below every original rate), BadSlack when
// rho + eta >= 1 somewhere.
ReducedNetwork build_reduction(const NetworkSpec& spec, const TrafficSolution& sol,
                               const Matrix& eta = Matrix());

// Re-derives Lambda' by solving the traffic equations on the reduced spec and
// re-checks every invariant independently of how `red` was produced.
ReductionReport verify_reduction(const ReducedNetwork& red);

}  // namespace qnet
