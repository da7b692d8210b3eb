#include "qnet/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnet/errors.hpp"

namespace qnet {

bool ReductionReport::all_ok() const {
    for (const auto& c : checks)
        if (!c.ok) return false;
    return true;
}

namespace {

Matrix broadcast_eta(const NetworkSpec& spec, const TrafficSolution& sol, const Matrix& eta) {
    const std::uint32_t A = spec.num_classes;
    const std::uint32_t J = spec.num_servers;
    if (eta.rows() == A && eta.cols() == J) return eta;
    if (eta.rows() == 1 && eta.cols() == 1) {
        Matrix full(A, J, eta(0, 0));
        return full;
    }
    if (eta.rows() != 0) throw ConfigError("eta must be scalar or num_classes x num_servers");

    // Default slack: aim per-entry at rho + eta = (Lambda/mu_min + 1)/2, which
    // keeps Lambda/(rho+eta) strictly below min mu whenever the reduction is
    // structurally feasible, and rho + eta strictly below 1.
    const double mu_min = spec.min_service_rate();
    Matrix full(A, J);
    for (std::uint32_t a = 0; a < A; ++a) {
        for (std::uint32_t j = 0; j < J; ++j) {
            const double target = 0.5 * (sol.arrival_rate(a, j) / mu_min + 1.0);
            full(a, j) = target - sol.load(a, j);
        }
    }
    return full;
}

}  // namespace

ReducedNetwork build_reduction(const NetworkSpec& spec, const TrafficSolution& sol,
                               const Matrix& eta_in) {
    require_valid(spec);
    const std::uint32_t A = spec.num_classes;
    const std::uint32_t J = spec.num_servers;

    for (std::uint32_t j = 0; j < J; ++j) {
        if (!(sol.server_load[j] < 1.0))
            throw Infeasible("server load >= 1 at server " + std::to_string(j + 1));
    }

    const Matrix eta = broadcast_eta(spec, sol, eta_in);
    for (std::uint32_t a = 0; a < A; ++a) {
        for (std::uint32_t j = 0; j < J; ++j) {
            if (!(eta(a, j) > 0.0))
                throw BadSlack("eta must be > 0 at (" + std::to_string(a + 1) + "," +
                               std::to_string(j + 1) + ")");
            if (!(sol.load(a, j) + eta(a, j) < 1.0))
                throw BadSlack("rho + eta >= 1 at (" + std::to_string(a + 1) + "," +
                               std::to_string(j + 1) + ")");
        }
    }

    const double mu_min = spec.min_service_rate();
    const double mu_max = spec.max_service_rate();
    double max_flow = 0.0;  // max_j sum_a Lambda(a,j)
    for (std::uint32_t j = 0; j < J; ++j)
        max_flow = std::max(max_flow, sol.total_arrival_rate(j));
    if (max_flow >= mu_min)
        throw Infeasible("max_j sum_a Lambda(a,j) = " + std::to_string(max_flow) +
                         " >= min service rate " + std::to_string(mu_min) +
                         "; no single rate can dominate the summed flow");

    double eta_bound = 0.0;  // max Lambda/(rho+eta)
    for (std::uint32_t a = 0; a < A; ++a)
        for (std::uint32_t j = 0; j < J; ++j)
            eta_bound = std::max(eta_bound,
                                 sol.arrival_rate(a, j) / (sol.load(a, j) + eta(a, j)));

    // Scale search: with Lambda' = s * Lambda the candidate window is
    // ( s * max(max_flow, eta_bound), s * mu_min ), every bound scaling
    // linearly in s. Each scale is checked in full anyway; the halving loop
    // terminates immediately when the window is nonempty and otherwise proves
    // the eta slacks too tight at every scale.
    double mu = 0.0;
    double scale = 1.0;
    bool found = false;
    for (int iter = 0; iter < 60; ++iter) {
        const double lo = scale * std::max(max_flow, eta_bound);
        const double hi = scale * mu_min;
        if (lo < hi) {
            mu = 0.5 * (lo + hi);
            found = true;
            break;
        }
        scale *= 0.5;
    }
    if (!found)
        throw Infeasible("no feasible service rate window at any scale; eta slacks too tight");

    ReducedNetwork red;
    red.base = spec;
    red.lambda_prime = scale * spec.lambda;
    red.mu = mu;
    red.scale = scale;
    red.eta_slack = eta;
    red.q1 = 2.0 * (spec.lambda + static_cast<double>(J) * mu_max);
    red.q2 = red.q1 * scale;  // keeps lambda/Q1 == lambda'/Q2 exactly

    red.reduced_spec = spec;
    red.reduced_spec.lambda = red.lambda_prime;
    red.reduced_spec.service_rate = Matrix(A, J, mu);
    return red;
}

namespace {

void add_check(ReductionReport& rep, std::string name, bool ok, double margin,
               std::string detail = {}) {
    rep.checks.push_back({std::move(name), ok, margin, std::move(detail)});
}

}  // namespace

ReductionReport verify_reduction(const ReducedNetwork& red) {
    ReductionReport rep;
    const NetworkSpec& base = red.base;
    const std::uint32_t A = base.num_classes;
    const std::uint32_t J = base.num_servers;

    const TrafficSolution sol = solve_traffic(base);
    const TrafficSolution sol_prime = solve_traffic(red.reduced_spec);

    // Traffic-equation linearity: Lambda' == s * Lambda.
    double lin_err = 0.0;
    for (std::uint32_t a = 0; a < A; ++a)
        for (std::uint32_t j = 0; j < J; ++j) {
            const double want = red.scale * sol.arrival_rate(a, j);
            const double got = sol_prime.arrival_rate(a, j);
            const double denom = std::max(std::fabs(want), 1e-300);
            lin_err = std::max(lin_err, std::fabs(got - want) / denom);
        }
    add_check(rep, "lambda_prime_linearity", lin_err < 1e-12, 1e-12 - lin_err,
              "max relative deviation " + std::to_string(lin_err));

    // Sandwich rho < Lambda'/mu < rho + eta < 1 per class and server.
    double m_low = std::numeric_limits<double>::infinity();
    double m_high = m_low, m_one = m_low;
    bool ok_low = true, ok_high = true, ok_one = true;
    for (std::uint32_t a = 0; a < A; ++a) {
        for (std::uint32_t j = 0; j < J; ++j) {
            const double rho = sol.load(a, j);
            const double rho_prime = sol_prime.arrival_rate(a, j) / red.mu;
            const double cap = rho + red.eta_slack(a, j);
            ok_low &= rho_prime > rho;
            ok_high &= rho_prime < cap;
            ok_one &= cap < 1.0;
            m_low = std::min(m_low, rho_prime - rho);
            m_high = std::min(m_high, cap - rho_prime);
            m_one = std::min(m_one, 1.0 - cap);
        }
    }
    add_check(rep, "load_sandwich_lower (rho' > rho)", ok_low, m_low);
    add_check(rep, "load_sandwich_upper (rho' < rho + eta)", ok_high, m_high);
    add_check(rep, "slack_below_one (rho + eta < 1)", ok_one, m_one);

    // Summed loads below one in S'.
    double m_sum = std::numeric_limits<double>::infinity();
    bool ok_sum = true;
    for (std::uint32_t j = 0; j < J; ++j) {
        double s = 0.0;
        for (std::uint32_t a = 0; a < A; ++a) s += sol_prime.arrival_rate(a, j);
        s /= red.mu;
        ok_sum &= s < 1.0;
        m_sum = std::min(m_sum, 1.0 - s);
    }
    add_check(rep, "summed_load_below_one", ok_sum, m_sum);

    // Uniformization rates.
    const double q1_floor = base.lambda + static_cast<double>(J) * base.max_service_rate();
    const double q2_floor = red.lambda_prime + static_cast<double>(J) * red.mu;
    add_check(rep, "q1_above_floor", red.q1 > q1_floor, red.q1 - q1_floor);
    add_check(rep, "q2_above_floor", red.q2 > q2_floor, red.q2 - q2_floor);

    const double p1 = base.lambda / red.q1;
    const double p2 = red.lambda_prime / red.q2;
    add_check(rep, "arrival_probability_match (lambda/Q1 == lambda'/Q2)", p1 == p2,
              -std::fabs(p1 - p2),
              p1 == p2 ? "exact" : "mismatch " + std::to_string(p1 - p2));

    // Per-epoch slowness: mu/Q2 <= mu(a,j)/Q1 for every class and server.
    double m_slow = std::numeric_limits<double>::infinity();
    bool ok_slow = true;
    const double prime_prob = red.mu / red.q2;
    for (std::uint32_t a = 0; a < A; ++a)
        for (std::uint32_t j = 0; j < J; ++j) {
            const double gap = base.service_rate(a, j) / red.q1 - prime_prob;
            ok_slow &= gap >= 0.0;
            m_slow = std::min(m_slow, gap);
        }
    add_check(rep, "per_epoch_slowness (mu/Q2 <= mu_aj/Q1)", ok_slow, m_slow);

    return rep;
}

}  // namespace qnet
