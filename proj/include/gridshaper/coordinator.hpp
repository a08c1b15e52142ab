#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gridshaper/grid_core.hpp"
#include "gridshaper/user_lp.hpp"

namespace gridshaper {

enum class StoppingMode { FixedIterations, MseThreshold, WhicheverFirst };

struct ConvergencePolicy {
    std::size_t max_iterations = 5;
    double mse_tolerance = 1e-4;  // kWh^2
    StoppingMode mode = StoppingMode::WhicheverFirst;

    void validate() const;
};

// Sweep cap applied in MseThreshold mode, where max_iterations is ignored.
inline constexpr std::size_t kMseModeSweepCap = 1000;

enum class Initializer { UncoordinatedGreedy, ZerosThenRepair };

enum class Phase { Shaping, Altering };

struct UpdateEvent {
    Phase phase;
    UserId user_id;
    std::size_t sweep;  // 1-based
    double objective_before;
    double objective_after;
};

using EventSink = std::function<void(const UpdateEvent&)>;

// One JSON object per line.
void write_event_jsonl(std::ostream& out, const UpdateEvent& event);

struct ShapedOutcome {
    FleetState fleet;
    std::vector<double> target_kwh;
    std::size_t iterations_run = 0;
    std::vector<double> mse_trace;
};

enum class TriggerMode { Ratio, Spread, Manual };

struct AlterTriggerRule {
    TriggerMode mode = TriggerMode::Ratio;
    double ratio_threshold = 3.0;
    double spread_threshold_per_mwh = 100.0;
    std::optional<std::size_t> manual_t0;

    void validate() const;
};

struct AlteringOptions {
    double lambda = 0.5;
    double t0_weight_scale_kwh = kDefaultT0WeightScaleKwh;
};

// Σ over users other than `user` of (PEV schedule + household load).
std::vector<double> others_aggregate(const FleetState& fleet, UserId user);

// Initial schedules used before the first sweep.
std::map<UserId, ScheduleVector> initial_schedules(std::span<const UserProfile> users, const TimeGrid& grid,
                                                   Initializer initializer);

ShapedOutcome run_shaping(std::span<const UserProfile> users, std::span<const double> target_kwh,
                          const TimeGrid& grid, const ConvergencePolicy& policy,
                          Initializer initializer = Initializer::UncoordinatedGreedy,
                          const EventSink& sink = {});

std::optional<std::size_t> detect_t0(const MarketDay& market, std::size_t revealed_upto,
                                     const AlterTriggerRule& rule);

ShapedOutcome run_altering(const ShapedOutcome& shaped, std::size_t t0, const AlteringOptions& options,
                           const ConvergencePolicy& policy, const EventSink& sink = {});

// True when the vehicle has a permissible slot in [t0, H).
bool connected_from(const PevSpec& pev, std::size_t t0);

}  // namespace gridshaper
