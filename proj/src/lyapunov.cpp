#include "qnet/lyapunov.hpp"

#include <cmath>
#include <limits>

#include "qnet/errors.hpp"

namespace qnet {

std::int64_t CountVector::server_total(std::uint32_t server) const {
    std::int64_t t = 0;
    for (std::uint32_t a = 0; a < num_classes; ++a) t += at(a, server);
    return t;
}

std::int64_t CountVector::total() const {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

double lyapunov_value(const CountVector& x, const Matrix& visit_counts, std::uint32_t server) {
    if (x.num_servers != visit_counts.rows() || server >= x.num_servers)
        throw DimensionMismatch("lyapunov_value: state/visit-count shapes disagree");
    double v = 0.0;
    for (std::uint32_t a = 0; a < x.num_classes; ++a)
        for (std::uint32_t k = 0; k < x.num_servers; ++k)
            v += static_cast<double>(x.at(a, k)) * visit_counts(k, server);
    return v;
}

double analytic_drift(const NetworkSpec& spec, const TrafficSolution& sol,
                      const CountVector& x, std::uint32_t server) {
    if (!spec.single_rate())
        throw NotSingleRate("analytic_drift requires a single service rate");
    const double mu = spec.service_rate(0, 0);
    const double q = spec.lambda + static_cast<double>(spec.num_servers) * mu;
    const double busy = x.server_total(server) > 0 ? 1.0 : 0.0;
    return (sol.total_arrival_rate(server) - mu * busy) / q;
}

namespace {

// Drift contribution of the departure events at busy server m when a class-c
// customer is in service: mu(c,m) * (sum_n r(m,n) Gamma(n,j) - Gamma(m,j)).
double departure_term(const NetworkSpec& spec, const Matrix& gamma, std::uint32_t m,
                      std::uint32_t c, std::uint32_t j) {
    const double mu = spec.service_rate(c, m);
    double acc = 0.0;
    double route_mass = 0.0;
    for (std::uint32_t n = 0; n < spec.num_servers; ++n) {
        const double r = spec.routing(m, n);
        route_mass += r;
        acc += (gamma(n, j) - gamma(m, j)) * mu * r;  // E2: move m -> n
    }
    acc += -gamma(m, j) * mu * (1.0 - route_mass);  // E3: exit
    return acc;
}

}  // namespace

double brute_force_drift(const NetworkSpec& spec, const TrafficSolution& sol,
                         const CountVector& x, std::uint32_t server) {
    if (x.num_classes != spec.num_classes || x.num_servers != spec.num_servers)
        throw DimensionMismatch("brute_force_drift: state shape disagrees with spec");
    const Matrix& gamma = sol.visit_counts;
    const double q = spec.uniformization_rate();

    double acc = 0.0;
    // E1: exogenous arrival of class a at server k, probability lambda q(a,k)/Q.
    for (std::uint32_t a = 0; a < spec.num_classes; ++a)
        for (std::uint32_t k = 0; k < spec.num_servers; ++k)
            acc += spec.arrival_rate(a, k) * gamma(k, server);

    // E2/E3 per busy server, with the in-service class chosen canonically as
    // the lowest-indexed class present. For single-rate specs the choice is
    // immaterial; assert that while we are here.
    const bool single = spec.single_rate();
    for (std::uint32_t m = 0; m < spec.num_servers; ++m) {
        if (x.server_total(m) == 0) continue;
        double term = std::numeric_limits<double>::quiet_NaN();
        for (std::uint32_t c = 0; c < spec.num_classes; ++c) {
            if (x.at(c, m) == 0) continue;
            const double cand = departure_term(spec, gamma, m, c, server);
            if (std::isnan(term)) {
                term = cand;
            } else if (single && std::fabs(cand - term) > 1e-12) {
                throw std::logic_error("single-rate drift depends on the in-service class");
            }
        }
        acc += term;
    }
    // E4 self-loop contributes zero drift.
    return acc / q;
}

DriftProfile drift_profile(const NetworkSpec& spec, const TrafficSolution& sol) {
    if (!spec.single_rate())
        throw NotSingleRate("drift_profile requires a single service rate");
    const double mu = spec.service_rate(0, 0);
    const double q = spec.lambda + static_cast<double>(spec.num_servers) * mu;
    DriftProfile profile;
    profile.eta.resize(spec.num_servers);
    profile.epsilon.resize(spec.num_servers);
    profile.cstar.assign(spec.num_servers, std::numeric_limits<double>::quiet_NaN());
    for (std::uint32_t j = 0; j < spec.num_servers; ++j) {
        const double lam_j = sol.total_arrival_rate(j);
        profile.eta[j] = lam_j / q;
        profile.epsilon[j] = (mu - lam_j) / q;
    }
    return profile;
}

}  // namespace qnet
