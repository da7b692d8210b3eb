#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "qnet/model.hpp"
#include "qnet/reduction.hpp"
#include "qnet/scenario.hpp"
#include "qnet/simulate.hpp"
#include "qnet/stability.hpp"

namespace qnet {

// Spec file schema: {num_servers, num_classes, lambda, assign_prob (A x J),
// service_rate (A x J), routing (J x J)}; all numbers decimal.
NetworkSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const NetworkSpec& spec);
NetworkSpec load_spec(const std::filesystem::path& path);

// Scenario file schema: {num_servers?, routes (per-class 1-based server
// lists), mean_service (per class per leg), arrival_rate (per class),
// policy ("fifo" | "later_leg_priority")}.
RoutedScenario scenario_from_json(const nlohmann::json& j);
RoutedScenario load_scenario(const std::filesystem::path& path);

nlohmann::json reduction_to_json(const ReducedNetwork& red);
nlohmann::json reduction_report_to_json(const ReductionReport& report);
nlohmann::json dominance_to_json(const DominanceReport& report);
nlohmann::json stability_to_json(const StabilityReport& report);

// Trace CSV: "epoch,event,total,x_<class>_<server>..." (1-based names).
void write_trace_csv(const Trace& trace, const std::filesystem::path& path,
                     bool timestamp_header = true);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace qnet
