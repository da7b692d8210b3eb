#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnet/linalg.hpp"

namespace qnet {

// Open multiclass Markovian network with class-independent routing.
//
// A customer of class `a` arrives at server `j` at rate lambda*assign_prob(a,j),
// is served at exponential rate service_rate(a,j), and after service moves to
// server k with probability routing(j,k) (identical for every class); the
// deficit of the routing row is the exit probability.
struct NetworkSpec {
    std::uint32_t num_servers = 0;  // J
    std::uint32_t num_classes = 0;  // A
    double lambda = 0.0;            // total exogenous Poisson rate
    Matrix assign_prob;             // A x J, sums to 1
    Matrix service_rate;            // A x J, strictly positive
    Matrix routing;                 // J x J, row sums <= 1

    double arrival_rate(std::uint32_t cls, std::uint32_t server) const {
        return lambda * assign_prob(cls, server);
    }
    double max_service_rate() const;
    double min_service_rate() const;
    bool single_rate() const;
    // Uniformization rate lambda + J * max service rate.
    double uniformization_rate() const;
};

struct ValidationIssue {
    std::string check;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> failures;
    std::vector<ValidationIssue> warnings;
    bool valid() const { return failures.empty(); }
};

// Equilibrium flows of a valid spec.
struct TrafficSolution {
    Matrix arrival_rate;       // Lambda, A x J
    Matrix load;               // rho(a,j) = Lambda(a,j) / mu(a,j)
    std::vector<double> server_load;  // sum over classes of load
    Matrix visit_counts;       // Gamma, J x J: expected visits to k from j
    // Residual of the flow-conservation identity with the equilibrium-rate
    // reading (sum_a sum_k lambda q(a,k) Gamma(k,j) == sum_a Lambda(a,j)).
    std::vector<double> conservation_residual;
    // Residual of the same left side against the exogenous-rate reading
    // (sum_a lambda q(a,j)); reported, not asserted.
    std::vector<double> conservation_residual_exogenous;

    double total_arrival_rate(std::uint32_t server) const;
};

// Checks every structural invariant of the spec; failures carry offending
// indices. Downstream operations require report.valid().
ValidationReport validate_network(const NetworkSpec& spec);

// Throws ConfigError when the spec fails validation.
void require_valid(const NetworkSpec& spec);

// Solves the per-class traffic equations (I - R^T) Lambda_a = lambda q_a by
// dense elimination with partial pivoting, fills loads and visit counts, and
// evaluates the conservation residuals.
TrafficSolution solve_traffic(const NetworkSpec& spec);

// Visit-count matrix Gamma = (I - R)^{-1}; Gamma(j,k) is the expected number
// of visits to server k by a customer currently at server j.
Matrix compute_visit_counts(const Matrix& routing);

// Per-server |sum_a sum_k lambda q(a,k) Gamma(k,j) - sum_a Lambda(a,j)|.
std::vector<double> check_conservation(const NetworkSpec& spec, const TrafficSolution& sol);

}  // namespace qnet
