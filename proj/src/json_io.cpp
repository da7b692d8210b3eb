#include "qnet/json_io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

Matrix matrix_from_json(const nlohmann::json& j, const std::string& name) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ConfigError(name + " must be a 2-d array");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ConfigError(name + " must be rectangular");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw ConfigError(name + " entries must be numbers");
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

template <typename T>
T require_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing field: ") + key);
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("field has wrong type: ") + key);
    }
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

NetworkSpec spec_from_json(const nlohmann::json& j) {
    NetworkSpec spec;
    spec.num_servers = require_field<std::uint32_t>(j, "num_servers");
    spec.num_classes = require_field<std::uint32_t>(j, "num_classes");
    spec.lambda = require_field<double>(j, "lambda");
    if (!j.contains("assign_prob") || !j.contains("service_rate") || !j.contains("routing"))
        throw ConfigError("spec requires assign_prob, service_rate and routing");
    spec.assign_prob = matrix_from_json(j.at("assign_prob"), "assign_prob");
    spec.service_rate = matrix_from_json(j.at("service_rate"), "service_rate");
    spec.routing = matrix_from_json(j.at("routing"), "routing");
    return spec;
}

nlohmann::json spec_to_json(const NetworkSpec& spec) {
    nlohmann::json j;
    j["num_servers"] = spec.num_servers;
    j["num_classes"] = spec.num_classes;
    j["lambda"] = spec.lambda;
    j["assign_prob"] = matrix_to_json(spec.assign_prob);
    j["service_rate"] = matrix_to_json(spec.service_rate);
    j["routing"] = matrix_to_json(spec.routing);
    return j;
}

NetworkSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spec file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return spec_from_json(j);
}

RoutedScenario scenario_from_json(const nlohmann::json& j) {
    RoutedScenario sc;
    if (!j.contains("routes")) throw ConfigError("scenario requires routes");
    for (const auto& route : j.at("routes")) {
        std::vector<std::uint32_t> r;
        for (const auto& server : route) {
            const auto s = server.get<std::uint32_t>();
            if (s == 0) throw ConfigError("scenario routes are 1-based server indices");
            r.push_back(s - 1);
        }
        sc.routes.push_back(std::move(r));
    }
    if (j.contains("num_servers")) {
        sc.num_servers = j.at("num_servers").get<std::uint32_t>();
    } else {
        for (const auto& route : sc.routes)
            for (const auto s : route) sc.num_servers = std::max(sc.num_servers, s + 1);
    }
    for (const auto& legs : require_field<nlohmann::json>(j, "mean_service")) {
        std::vector<double> m;
        for (const auto& v : legs) m.push_back(v.get<double>());
        sc.mean_service.push_back(std::move(m));
    }
    sc.arrival_rate = require_field<std::vector<double>>(j, "arrival_rate");
    const auto policy = require_field<std::string>(j, "policy");
    if (policy == "fifo") {
        sc.policy = ScenarioPolicy::Fifo;
    } else if (policy == "later_leg_priority") {
        sc.policy = ScenarioPolicy::LaterLegPriority;
    } else {
        throw ConfigError("scenario policy must be fifo or later_leg_priority");
    }
    sc.validate();
    return sc;
}

RoutedScenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

nlohmann::json reduction_to_json(const ReducedNetwork& red) {
    nlohmann::json j;
    j["lambda_prime"] = red.lambda_prime;
    j["mu"] = red.mu;
    j["scale"] = red.scale;
    j["q1"] = red.q1;
    j["q2"] = red.q2;
    j["eta_slack"] = matrix_to_json(red.eta_slack);
    j["base"] = spec_to_json(red.base);
    j["reduced_spec"] = spec_to_json(red.reduced_spec);
    return j;
}

nlohmann::json reduction_report_to_json(const ReductionReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["ok"] = c.ok;
        jc["margin"] = c.margin;
        if (!c.detail.empty()) jc["detail"] = c.detail;
        checks.push_back(std::move(jc));
    }
    nlohmann::json j;
    j["all_ok"] = report.all_ok();
    j["checks"] = std::move(checks);
    return j;
}

nlohmann::json dominance_to_json(const DominanceReport& report) {
    nlohmann::json j;
    j["dominance_ok"] = report.dominance_ok;
    j["violation_count"] = report.violation_count;
    if (report.first_violation_epoch)
        j["first_violation_epoch"] = *report.first_violation_epoch;
    else
        j["first_violation_epoch"] = nullptr;
    j["epochs"] = report.epochs;
    j["seed"] = report.seed;
    return j;
}

nlohmann::json stability_to_json(const StabilityReport& report) {
    nlohmann::json j;
    j["verdict"] = verdict_name(report.verdict);
    j["slope"] = report.slope;
    j["slope_ci_low"] = report.slope_ci_low;
    j["slope_ci_high"] = report.slope_ci_high;
    j["r_squared_mean"] = report.r_squared_mean;
    j["r_squared_min"] = report.r_squared_min;
    j["max_nested_gap"] = report.max_nested_gap;
    j["avg_quarter"] = report.avg_quarter;
    j["avg_half"] = report.avg_half;
    j["avg_full"] = report.avg_full;
    j["num_seeds"] = report.num_seeds;
    j["horizon"] = report.horizon;
    return j;
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path,
                     bool timestamp_header) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    if (timestamp_header) {
        const auto now = std::chrono::system_clock::now();
        out << "# generated_at: "
            << std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()
            << "\n";
    }
    out << "epoch,event,total";
    for (std::uint32_t a = 0; a < trace.num_classes; ++a)
        for (std::uint32_t j = 0; j < trace.num_servers; ++j)
            out << ",x_" << (a + 1) << "_" << (j + 1);
    if (trace.has_lyapunov)
        for (std::uint32_t j = 0; j < trace.num_servers; ++j) out << ",v_" << (j + 1);
    out << "\n";
    const std::size_t width = static_cast<std::size_t>(trace.num_classes) * trace.num_servers;
    for (std::size_t i = 0; i < trace.rows(); ++i) {
        out << trace.epochs[i] << ',' << event_name(trace.events[i]) << ',' << trace.totals[i];
        for (std::size_t c = 0; c < width; ++c) out << ',' << trace.counts[i * width + c];
        if (trace.has_lyapunov)
            for (std::uint32_t j = 0; j < trace.num_servers; ++j)
                out << ',' << format_double(trace.lyapunov[i * trace.num_servers + j]);
        out << "\n";
    }
}

}  // namespace qnet
