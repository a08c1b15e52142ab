#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridshaper {

using UserId = std::uint32_t;

// Tolerances shared by the feasibility checker and the solvers.
inline constexpr double kEnergyTolerance = 1e-6;      // kWh, energy equality
inline constexpr double kInequalitySlack = 1e-9;      // kWh, box/SOC constraints
inline constexpr double kAggregateTolerance = 1e-9;   // kWh per slot

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TimeGrid {
    std::size_t horizon_slots = 24;
    double slot_hours = 1.0;

    TimeGrid() = default;
    TimeGrid(std::size_t slots, double hours);

    std::size_t size() const noexcept { return horizon_slots; }
    void require_length(std::span<const double> v, const char* what) const;
};

using Mask = std::vector<bool>;

struct PevSpec {
    UserId user_id = 0;
    Mask permissible_slots;
    double required_energy_kwh = 0.0;
    double max_power_kw = 1.8;
    double capacity_kwh = 24.0;
    double soc_arrival_kwh = 24.0;
    bool v2g_enabled = false;
    double min_soc_fraction = 0.2;

    std::size_t connected_slot_count() const;
    // Largest per-slot energy magnitude on this grid.
    double slot_energy_limit(const TimeGrid& grid) const { return max_power_kw * grid.slot_hours; }
    // SOC floor the schedule must respect. Equals min_soc_fraction * capacity,
    // lowered to the arrival SOC if the vehicle arrives below it.
    double effective_soc_floor() const;
    // Throws std::invalid_argument naming the violated invariant.
    void validate(const TimeGrid& grid) const;
};

struct ScheduleVector {
    std::vector<double> values;

    ScheduleVector() = default;
    explicit ScheduleVector(std::size_t n) : values(n, 0.0) {}
    explicit ScheduleVector(std::vector<double> v) : values(std::move(v)) {}

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t t) const { return values[t]; }
    double& operator[](std::size_t t) { return values[t]; }
    double total() const;
    bool operator==(const ScheduleVector&) const = default;
};

struct UserProfile {
    PevSpec pev;
    std::vector<double> household_load_kwh;

    UserId id() const noexcept { return pev.user_id; }
    void validate(const TimeGrid& grid) const;
};

struct MarketDay {
    std::vector<double> da_price_per_mwh;
    std::vector<double> rt_price_per_mwh;
    std::vector<double> da_purchased_kwh;

    void validate(const TimeGrid& grid) const;
};

// Snapshot of a fleet: users (sorted by id), their schedules and the cached
// aggregate Σ(household + PEV). Built once, read-only afterwards.
class FleetState {
public:
    FleetState() = default;
    FleetState(TimeGrid grid, std::vector<UserProfile> users,
               std::map<UserId, ScheduleVector> schedules);

    const TimeGrid& grid() const noexcept { return grid_; }
    const std::vector<UserProfile>& users() const noexcept { return users_; }
    const std::map<UserId, ScheduleVector>& schedules() const noexcept { return schedules_; }
    const std::vector<double>& aggregate_kwh() const noexcept { return aggregate_; }

    const UserProfile& user(UserId id) const;
    const ScheduleVector& schedule(UserId id) const;

private:
    TimeGrid grid_;
    std::vector<UserProfile> users_;
    std::map<UserId, ScheduleVector> schedules_;
    std::vector<double> aggregate_;
};

enum class ViolationKind {
    OutsideWindow,
    PowerBound,
    NegativeWithoutV2g,
    SocFloor,
    SocCeiling,
    EnergyEquality,
};

struct Violation {
    ViolationKind kind;
    std::optional<std::size_t> slot;
    double magnitude;
    std::string message;
};

struct FeasibilityReport {
    std::vector<Violation> violations;

    bool feasible() const noexcept { return violations.empty(); }
    bool has(ViolationKind kind) const;
    std::string summary() const;
};

FeasibilityReport check_feasibility(const PevSpec& pev, const ScheduleVector& schedule,
                                    const TimeGrid& grid);

// SOC after each slot, walking the schedule in horizon order from soc_arrival.
std::vector<double> soc_trajectory(const PevSpec& pev, const ScheduleVector& schedule);

std::vector<double> aggregate(std::span<const UserProfile> users,
                              const std::map<UserId, ScheduleVector>& schedules,
                              const TimeGrid& grid);

double mse(std::span<const double> a, std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace gridshaper
