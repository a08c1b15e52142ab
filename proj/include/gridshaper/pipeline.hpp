#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "gridshaper/coordinator.hpp"
#include "gridshaper/scenario.hpp"
#include "gridshaper/settlement.hpp"

namespace gridshaper {

// Missing upstream artifact or malformed configuration.
class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kArtifactSchemaVersion = 1;

struct ScenarioConfig {
    TimeGrid grid;
    FleetConfig fleet;
    std::filesystem::path da_price_csv;
    std::filesystem::path rt_price_csv;
    TargetMode target_mode = TargetMode::ValleyFill;
    std::filesystem::path da_purchased_csv;  // used when target_mode == ExternalCsv
    ConvergencePolicy policy;
    AlterTriggerRule trigger;
    double lambda = 0.5;
    double t0_weight_scale_kwh = kDefaultT0WeightScaleKwh;
    std::filesystem::path output_dir = "run";

    void validate() const;
};

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> t0;
    std::optional<double> lambda;
    std::optional<std::filesystem::path> output_dir;
};

// JSON config; relative paths resolve against the config file's directory.
ScenarioConfig load_scenario_config(const std::filesystem::path& path, const CliOverrides& overrides = {});

MarketDay load_market(const ScenarioConfig& config, const std::vector<double>& da_purchased_kwh);

void cmd_gen(const ScenarioConfig& config);
void cmd_shape(const ScenarioConfig& config);
void cmd_alter(const ScenarioConfig& config);
CostChainReport cmd_settle(const ScenarioConfig& config);
void cmd_report(const ScenarioConfig& config);

// Artifact names inside the run directory.
namespace artifacts {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kFleet = "fleet.csv";
inline constexpr const char* kHousehold = "household.csv";
inline constexpr const char* kTarget = "target.csv";
inline constexpr const char* kAggregateUncoordinated = "aggregate_uncoordinated.csv";
inline constexpr const char* kSchedulesShaped = "schedules_shaped.csv";
inline constexpr const char* kAggregateShaped = "aggregate_shaped.csv";
inline constexpr const char* kMseShaping = "mse_shaping.csv";
inline constexpr const char* kShapeLog = "shape_log.jsonl";
inline constexpr const char* kSchedulesAltered = "schedules_altered.csv";
inline constexpr const char* kAggregateAltered = "aggregate_altered.csv";
inline constexpr const char* kMseAltering = "mse_altering.csv";
inline constexpr const char* kAlterLog = "alter_log.jsonl";
inline constexpr const char* kAlterMeta = "alter.json";
inline constexpr const char* kCostChainText = "cost_chain.txt";
inline constexpr const char* kCostChainCsv = "cost_chain.csv";
inline constexpr const char* kReportDir = "report";
inline constexpr const char* kReportAggregate = "aggregate_series.csv";
inline constexpr const char* kReportAvailability = "availability.csv";
inline constexpr const char* kReportMse = "mse_trace.csv";
inline constexpr const char* kReportSlotCosts = "slot_costs.csv";
}  // namespace artifacts

// Verbosity from GRIDSHAPER_LOG (error, warn, info, debug); default warn.
enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };
LogLevel log_level_from_env();
void log_message(LogLevel level, const std::string& message);

}  // namespace gridshaper
