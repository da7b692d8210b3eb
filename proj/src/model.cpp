#include "qnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

constexpr double kProbTol = 1e-12;

std::string at(std::uint32_t a, std::uint32_t j) {
    return "(" + std::to_string(a + 1) + "," + std::to_string(j + 1) + ")";
}

}  // namespace

double NetworkSpec::max_service_rate() const {
    double m = 0.0;
    for (std::uint32_t a = 0; a < num_classes; ++a)
        for (std::uint32_t j = 0; j < num_servers; ++j) m = std::max(m, service_rate(a, j));
    return m;
}

double NetworkSpec::min_service_rate() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::uint32_t a = 0; a < num_classes; ++a)
        for (std::uint32_t j = 0; j < num_servers; ++j) m = std::min(m, service_rate(a, j));
    return m;
}

bool NetworkSpec::single_rate() const {
    const double first = service_rate(0, 0);
    for (std::uint32_t a = 0; a < num_classes; ++a)
        for (std::uint32_t j = 0; j < num_servers; ++j)
            if (service_rate(a, j) != first) return false;
    return true;
}

double NetworkSpec::uniformization_rate() const {
    return lambda + static_cast<double>(num_servers) * max_service_rate();
}

double TrafficSolution::total_arrival_rate(std::uint32_t server) const {
    double s = 0.0;
    for (std::size_t a = 0; a < arrival_rate.rows(); ++a) s += arrival_rate(a, server);
    return s;
}

ValidationReport validate_network(const NetworkSpec& spec) {
    ValidationReport report;
    auto fail = [&](std::string check, std::string detail) {
        report.failures.push_back({std::move(check), std::move(detail)});
    };

    const std::uint32_t J = spec.num_servers;
    const std::uint32_t A = spec.num_classes;
    if (J == 0) fail("num_servers", "must be positive");
    if (A == 0) fail("num_classes", "must be positive");
    if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda))
        fail("lambda", "must be positive and finite");
    if (spec.assign_prob.rows() != A || spec.assign_prob.cols() != J)
        fail("assign_prob", "shape must be num_classes x num_servers");
    if (spec.service_rate.rows() != A || spec.service_rate.cols() != J)
        fail("service_rate", "shape must be num_classes x num_servers");
    if (spec.routing.rows() != J || spec.routing.cols() != J)
        fail("routing", "shape must be num_servers x num_servers");
    if (!report.valid()) return report;  // shape errors make the rest unreadable

    double q_total = 0.0;
    for (std::uint32_t a = 0; a < A; ++a) {
        double class_mass = 0.0;
        for (std::uint32_t j = 0; j < J; ++j) {
            const double q = spec.assign_prob(a, j);
            if (q < 0.0 || q > 1.0 + kProbTol || !std::isfinite(q))
                fail("assign_prob", "entry " + at(a, j) + " outside [0,1]");
            const double mu = spec.service_rate(a, j);
            if (!(mu > 0.0) || !std::isfinite(mu))
                fail("service_rate", "entry " + at(a, j) + " must be > 0");
            q_total += q;
            class_mass += q;
        }
        if (class_mass == 0.0)
            report.warnings.push_back(
                {"assign_prob", "class " + std::to_string(a + 1) + " never enters the network"});
    }
    if (std::fabs(q_total - 1.0) > kProbTol)
        fail("assign_prob", "entries must sum to 1 (got " + std::to_string(q_total) + ")");

    for (std::uint32_t j = 0; j < J; ++j) {
        double row_sum = 0.0;
        for (std::uint32_t k = 0; k < J; ++k) {
            const double r = spec.routing(j, k);
            if (r < 0.0 || r > 1.0 + kProbTol || !std::isfinite(r))
                fail("routing", "entry " + at(j, k) + " outside [0,1]");
            row_sum += r;
        }
        if (row_sum > 1.0 + kProbTol)
            fail("routing", "routing row sum exceeds 1 at server " + std::to_string(j + 1));
    }
    if (!report.valid()) return report;

    // Openness certificate: eliminate (I - R^T); a vanishing pivot means some
    // customers never leave. Solved rates must also come out finite and
    // nonnegative.
    Matrix system(J, J);
    for (std::uint32_t j = 0; j < J; ++j)
        for (std::uint32_t k = 0; k < J; ++k)
            system(j, k) = (j == k ? 1.0 : 0.0) - spec.routing(k, j);
    try {
        std::vector<double> rhs(J, 0.0);
        for (std::uint32_t a = 0; a < A; ++a)
            for (std::uint32_t j = 0; j < J; ++j) rhs[j] += spec.arrival_rate(a, j);
        const auto flows = solve_linear(system, rhs);
        for (std::uint32_t j = 0; j < J; ++j) {
            if (!std::isfinite(flows[j]) || flows[j] < -1e-9) {
                fail("openness", "equilibrium rate at server " + std::to_string(j + 1) +
                                     " not finite/nonnegative");
                break;
            }
        }
    } catch (const SingularSystem&) {
        fail("openness", "network not open: (I - R^T) singular");
    }
    return report;
}

void require_valid(const NetworkSpec& spec) {
    const auto report = validate_network(spec);
    if (!report.valid()) {
        std::string msg = "invalid network spec:";
        for (const auto& f : report.failures) msg += " [" + f.check + "] " + f.detail + ";";
        throw ConfigError(msg);
    }
}

Matrix compute_visit_counts(const Matrix& routing) {
    const std::size_t J = routing.rows();
    Matrix system = Matrix::identity(J) - routing;
    return invert(system);
}

TrafficSolution solve_traffic(const NetworkSpec& spec) {
    const std::uint32_t J = spec.num_servers;
    const std::uint32_t A = spec.num_classes;

    Matrix system(J, J);
    for (std::uint32_t j = 0; j < J; ++j)
        for (std::uint32_t k = 0; k < J; ++k)
            system(j, k) = (j == k ? 1.0 : 0.0) - spec.routing(k, j);

    TrafficSolution sol;
    sol.arrival_rate = Matrix(A, J);
    sol.load = Matrix(A, J);
    sol.server_load.assign(J, 0.0);

    // One class per right-hand side; a single factorization handles all.
    Matrix rhs(J, A);
    for (std::uint32_t a = 0; a < A; ++a)
        for (std::uint32_t j = 0; j < J; ++j) rhs(j, a) = spec.arrival_rate(a, j);
    const Matrix lam = solve_linear_multi(system, rhs);
    for (std::uint32_t a = 0; a < A; ++a) {
        for (std::uint32_t j = 0; j < J; ++j) {
            sol.arrival_rate(a, j) = lam(j, a);
            sol.load(a, j) = lam(j, a) / spec.service_rate(a, j);
            sol.server_load[j] += sol.load(a, j);
        }
    }

    sol.visit_counts = compute_visit_counts(spec.routing);
    sol.conservation_residual = check_conservation(spec, sol);
    sol.conservation_residual_exogenous.assign(J, 0.0);
    for (std::uint32_t j = 0; j < J; ++j) {
        double lhs = 0.0;
        double exo = 0.0;
        for (std::uint32_t a = 0; a < A; ++a) {
            for (std::uint32_t k = 0; k < J; ++k)
                lhs += spec.arrival_rate(a, k) * sol.visit_counts(k, j);
            exo += spec.arrival_rate(a, j);
        }
        sol.conservation_residual_exogenous[j] = std::fabs(lhs - exo);
    }
    return sol;
}

std::vector<double> check_conservation(const NetworkSpec& spec, const TrafficSolution& sol) {
    const std::uint32_t J = spec.num_servers;
    const std::uint32_t A = spec.num_classes;
    std::vector<double> residual(J, 0.0);
    for (std::uint32_t j = 0; j < J; ++j) {
        double lhs = 0.0;
        for (std::uint32_t a = 0; a < A; ++a)
            for (std::uint32_t k = 0; k < J; ++k)
                lhs += spec.arrival_rate(a, k) * sol.visit_counts(k, j);
        residual[j] = std::fabs(lhs - sol.total_arrival_rate(j));
    }
    return residual;
}

}  // namespace qnet
