#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gridshaper/coordinator.hpp"
#include "gridshaper/grid_core.hpp"

namespace gridshaper {

// Two-settlement procurement cost. Loads in kWh, prices in $/MWh.
struct Settlement {
    double da_cost_usd = 0.0;
    double rt_cost_usd = 0.0;
    double total_usd = 0.0;
    std::vector<double> imbalance_kwh;
    std::vector<double> da_cost_per_slot_usd;
    std::vector<double> rt_cost_per_slot_usd;
};

// Imbalance is settled symmetrically at the RT price: surplus earns revenue.
Settlement settle(std::span<const double> aggregate_kwh, const MarketDay& market);

// Plug-and-charge: full power from the start of the connection window until
// the energy need is met. The window starts at the first connected slot whose
// (cyclic) predecessor is disconnected, so overnight windows start in the evening.
ScheduleVector plug_in_schedule(const PevSpec& pev, const TimeGrid& grid);

FleetState uncoordinated_baseline(std::span<const UserProfile> users, const TimeGrid& grid);

struct CostChainReport {
    Settlement uncoordinated;
    Settlement after_shaping;
    Settlement after_altering;
    std::optional<std::size_t> t0;
    double lambda = 0.5;

    double cost_uncoordinated() const { return uncoordinated.total_usd; }
    double cost_after_p1() const { return after_shaping.total_usd; }
    double cost_after_p2() const { return after_altering.total_usd; }
    // Percent reduction relative to the previous stage.
    double shaping_savings_pct() const;
    double altering_savings_pct() const;
    double overall_savings_pct() const;
};

struct CostChainRun {
    CostChainReport report;
    FleetState baseline;
    ShapedOutcome shaped;
    ShapedOutcome altered;
};

CostChainRun cost_chain(std::span<const UserProfile> users, const TimeGrid& grid, const MarketDay& market,
                        const ConvergencePolicy& policy, const AlterTriggerRule& trigger,
                        const AlteringOptions& altering, const EventSink& sink = {});

CostChainReport make_cost_chain_report(std::span<const double> uncoordinated_kwh,
                                       std::span<const double> shaped_kwh, std::span<const double> altered_kwh,
                                       const MarketDay& market, std::optional<std::size_t> t0, double lambda);

// `key=value` lines.
void write_key_value(std::ostream& out, const CostChainReport& report);
// CSV: stage,da_cost_usd,rt_cost_usd,total_usd,savings_vs_previous_pct
void write_cost_table(std::ostream& out, const CostChainReport& report);

}  // namespace gridshaper
