#include "gridshaper/grid_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace gridshaper {

namespace {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

TimeGrid::TimeGrid(std::size_t slots, double hours) : horizon_slots(slots), slot_hours(hours) {
    if (slots < 1) throw std::invalid_argument("TimeGrid: horizon_slots must be >= 1");
    if (!(hours > 0.0)) throw std::invalid_argument("TimeGrid: slot_hours must be > 0");
}

void TimeGrid::require_length(std::span<const double> v, const char* what) const {
    if (v.size() != horizon_slots) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(horizon_slots) +
                             ", got " + std::to_string(v.size()));
    }
}

std::size_t PevSpec::connected_slot_count() const {
    return static_cast<std::size_t>(std::count(permissible_slots.begin(), permissible_slots.end(), true));
}

double PevSpec::effective_soc_floor() const {
    return std::min(min_soc_fraction * capacity_kwh, soc_arrival_kwh);
}

void PevSpec::validate(const TimeGrid& grid) const {
    const std::string who = "user " + std::to_string(user_id) + ": ";
    if (permissible_slots.size() != grid.size())
        throw DimensionError(who + "permissible_slots length " + std::to_string(permissible_slots.size()) +
                             " != horizon " + std::to_string(grid.size()));
    if (!(required_energy_kwh >= 0.0)) throw std::invalid_argument(who + "required_energy_kwh < 0");
    if (!(max_power_kw > 0.0)) throw std::invalid_argument(who + "max_power_kw must be > 0");
    if (!(capacity_kwh > 0.0)) throw std::invalid_argument(who + "capacity_kwh must be > 0");
    if (!(soc_arrival_kwh >= 0.0)) throw std::invalid_argument(who + "soc_arrival_kwh < 0");
    if (!(min_soc_fraction >= 0.0 && min_soc_fraction <= 1.0))
        throw std::invalid_argument(who + "min_soc_fraction outside [0,1]");
    if (soc_arrival_kwh > capacity_kwh + kInequalitySlack)
        throw std::invalid_argument(who + "soc_arrival_kwh exceeds capacity_kwh");
    if (required_energy_kwh > capacity_kwh - soc_arrival_kwh + kEnergyTolerance)
        throw InfeasibleError(who + "capacity: required energy exceeds capacity - soc_arrival");
    const double window = slot_energy_limit(grid) * static_cast<double>(connected_slot_count());
    if (required_energy_kwh > window + kEnergyTolerance)
        throw InfeasibleError(who + "power window: required energy " + format_number(required_energy_kwh) +
                              " kWh exceeds deliverable " + format_number(window) + " kWh");
}

double ScheduleVector::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

void UserProfile::validate(const TimeGrid& grid) const {
    pev.validate(grid);
    grid.require_length(household_load_kwh, "household_load_kwh");
    for (double v : household_load_kwh) {
        if (!(v >= 0.0))
            throw std::invalid_argument("user " + std::to_string(pev.user_id) + ": negative household load");
    }
}

void MarketDay::validate(const TimeGrid& grid) const {
    grid.require_length(da_price_per_mwh, "da_price_per_mwh");
    grid.require_length(rt_price_per_mwh, "rt_price_per_mwh");
    grid.require_length(da_purchased_kwh, "da_purchased_kwh");
    for (double v : da_purchased_kwh) {
        if (!(v >= 0.0)) throw std::invalid_argument("da_purchased_kwh must be nonnegative");
    }
}

FleetState::FleetState(TimeGrid grid, std::vector<UserProfile> users,
                       std::map<UserId, ScheduleVector> schedules)
    : grid_(grid), users_(std::move(users)), schedules_(std::move(schedules)) {
    std::sort(users_.begin(), users_.end(),
              [](const UserProfile& a, const UserProfile& b) { return a.id() < b.id(); });
    for (std::size_t i = 1; i < users_.size(); ++i) {
        if (users_[i].id() == users_[i - 1].id())
            throw std::invalid_argument("FleetState: duplicate user_id " + std::to_string(users_[i].id()));
    }
    aggregate_ = aggregate(users_, schedules_, grid_);
}

const UserProfile& FleetState::user(UserId id) const {
    auto it = std::lower_bound(users_.begin(), users_.end(), id,
                               [](const UserProfile& u, UserId v) { return u.id() < v; });
    if (it == users_.end() || it->id() != id) throw LookupError("unknown user " + std::to_string(id));
    return *it;
}

const ScheduleVector& FleetState::schedule(UserId id) const {
    auto it = schedules_.find(id);
    if (it == schedules_.end()) throw LookupError("no schedule for user " + std::to_string(id));
    return it->second;
}

bool FeasibilityReport::has(ViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [kind](const Violation& v) { return v.kind == kind; });
}

std::string FeasibilityReport::summary() const {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v.message;
    }
    return out;
}

std::vector<double> soc_trajectory(const PevSpec& pev, const ScheduleVector& schedule) {
    std::vector<double> soc(schedule.size());
    double level = pev.soc_arrival_kwh;
    for (std::size_t t = 0; t < schedule.size(); ++t) {
        level += schedule[t];
        soc[t] = level;
    }
    return soc;
}

FeasibilityReport check_feasibility(const PevSpec& pev, const ScheduleVector& schedule,
                                    const TimeGrid& grid) {
    grid.require_length(schedule.values, "schedule");
    if (pev.permissible_slots.size() != grid.size())
        throw DimensionError("check_feasibility: mask length " + std::to_string(pev.permissible_slots.size()) +
                             " != horizon " + std::to_string(grid.size()));

    FeasibilityReport report;
    auto add = [&](ViolationKind kind, std::optional<std::size_t> slot, double magnitude, std::string what) {
        std::string msg = std::move(what);
        if (slot) msg += " at slot " + std::to_string(*slot);
        msg += " by " + format_number(magnitude);
        report.violations.push_back({kind, slot, magnitude, std::move(msg)});
    };

    const double limit = pev.slot_energy_limit(grid);
    const double floor = pev.effective_soc_floor();
    double level = pev.soc_arrival_kwh;
    for (std::size_t t = 0; t < grid.size(); ++t) {
        const double x = schedule[t];
        if (!pev.permissible_slots[t]) {
            if (x != 0.0) add(ViolationKind::OutsideWindow, t, std::abs(x), "nonzero outside window");
            continue;
        }
        if (std::abs(x) > limit + kInequalitySlack)
            add(ViolationKind::PowerBound, t, std::abs(x) - limit, "power bound");
        if (!pev.v2g_enabled && x < -kInequalitySlack)
            add(ViolationKind::NegativeWithoutV2g, t, -x, "discharge without V2G");
        level += x;
        if (level < floor - kInequalitySlack) add(ViolationKind::SocFloor, t, floor - level, "SOC floor");
        if (level > pev.capacity_kwh + kInequalitySlack)
            add(ViolationKind::SocCeiling, t, level - pev.capacity_kwh, "SOC ceiling");
    }
    const double gap = schedule.total() - pev.required_energy_kwh;
    if (std::abs(gap) > kEnergyTolerance) add(ViolationKind::EnergyEquality, std::nullopt, std::abs(gap), "energy equality");
    return report;
}

std::vector<double> aggregate(std::span<const UserProfile> users,
                              const std::map<UserId, ScheduleVector>& schedules,
                              const TimeGrid& grid) {
    std::vector<double> total(grid.size(), 0.0);
    for (const auto& u : users) {
        auto it = schedules.find(u.id());
        if (it == schedules.end()) throw LookupError("aggregate: no schedule for user " + std::to_string(u.id()));
        grid.require_length(u.household_load_kwh, "household_load_kwh");
        grid.require_length(it->second.values, "schedule");
        for (std::size_t t = 0; t < total.size(); ++t) total[t] += u.household_load_kwh[t] + it->second[t];
    }
    return total;
}

double mse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionError("mse: length mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    if (a.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionError("dot: length mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace gridshaper
