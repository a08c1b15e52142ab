#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gridshaper/grid_core.hpp"

namespace gridshaper {

// The altering objective adds (1 - lambda) * scale * l'[t0] to the shape term.
// Loads are kept in kWh; a scale of 1000 reproduces the weighting obtained
// when both terms are written in MWh.
inline constexpr double kDefaultT0WeightScaleKwh = 1000.0;

struct ShapingInstance {
    PevSpec pev;
    std::vector<double> household_load_kwh;
    std::vector<double> others_aggregate_kwh;
    std::vector<double> target_kwh;
    TimeGrid grid;

    // c_t = household[t] + others[t] - target[t]
    std::vector<double> cost_vector() const;
    void validate() const;
};

struct AlteringInstance {
    PevSpec pev;
    std::vector<double> household_load_kwh;
    std::vector<double> others_aggregate_kwh;
    std::vector<double> target_kwh;
    TimeGrid grid;
    std::vector<double> frozen_prefix_kwh;  // length t0
    std::size_t t0 = 0;
    double lambda = 0.5;
    double t0_weight_scale_kwh = kDefaultT0WeightScaleKwh;

    std::vector<double> cost_vector() const;
    double t0_weight() const { return (1.0 - lambda) * t0_weight_scale_kwh; }
    void validate() const;
};

// Exact minimiser of <x, c> over the feasible set of `pev`, restricted to
// slots >= first_slot. Slots before first_slot are fixed to `prefix` and seed
// the SOC. Among optimal schedules the one with the least battery throughput
// sum |x_t| wins, then the one that puts energy earliest.
ScheduleVector solve_linear_schedule(const PevSpec& pev, const TimeGrid& grid,
                                     std::span<const double> cost,
                                     std::span<const double> prefix = {});

ScheduleVector solve_p1(const ShapingInstance& instance);
ScheduleVector solve_p2(const AlteringInstance& instance);

double p1_objective(const ShapingInstance& instance, const ScheduleVector& schedule);
// lambda * <x, c> + (1 - lambda) * scale * x[t0], over slots >= t0.
double p2_objective(const AlteringInstance& instance, const ScheduleVector& schedule);
// p2_objective plus the constant (1 - lambda) * scale * (others[t0] + household[t0]).
double p2_reported_objective(const AlteringInstance& instance, const ScheduleVector& schedule);

}  // namespace gridshaper
