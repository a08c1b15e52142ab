#include "gridshaper/testing/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridshaper::testing {

std::optional<BruteForceResult> brute_force_schedule(const PevSpec& pev, const TimeGrid& grid,
                                                     std::span<const double> cost, double t0_weight,
                                                     int grid_levels, std::span<const double> prefix) {
    if (grid.size() > kMaxOracleSlots)
        throw OracleRefusal("brute_force_schedule: horizon exceeds " + std::to_string(kMaxOracleSlots));
    if (grid_levels < 2 || grid_levels > kMaxOracleLevels)
        throw OracleRefusal("brute_force_schedule: grid_levels must be in [2, " + std::to_string(kMaxOracleLevels) +
                            "]");
    grid.require_length(cost, "cost vector");
    const std::size_t t0 = prefix.size();
    if (t0 >= grid.size()) throw OracleRefusal("brute_force_schedule: prefix covers the horizon");

    const double limit = pev.slot_energy_limit(grid);
    const double step = 2.0 * limit / static_cast<double>(grid_levels - 1);
    std::vector<double> levels;
    for (int k = 0; k < grid_levels; ++k) {
        double v = -limit + step * k;
        if (std::abs(v) < 1e-12) v = 0.0;
        if (!pev.v2g_enabled && v < 0.0) continue;
        levels.push_back(v);
    }

    std::vector<double> effective(cost.begin(), cost.end());
    effective[t0] += t0_weight;

    double prefix_sum = 0.0;
    for (double v : prefix) prefix_sum += v;
    const double remaining = pev.required_energy_kwh - prefix_sum;

    std::vector<std::size_t> free_slots;
    for (std::size_t t = t0; t < grid.size(); ++t)
        if (pev.permissible_slots[t]) free_slots.push_back(t);

    std::optional<BruteForceResult> best;
    ScheduleVector candidate(grid.size());
    for (std::size_t t = 0; t < t0; ++t) candidate[t] = prefix[t];

    auto evaluate = [&](ScheduleVector x) {
        double free_sum = 0.0;
        for (std::size_t t : free_slots) free_sum += x[t];
        if (std::abs(free_sum - remaining) > step / 2.0 + 1e-12) return;
        if (free_sum != 0.0) {
            const double scale = remaining / free_sum;
            for (std::size_t t : free_slots) x[t] *= scale;
        } else if (std::abs(remaining) > 1e-12) {
            return;
        }
        if (!check_feasibility(pev, x, grid).feasible()) return;
        double objective = 0.0;
        for (std::size_t t = t0; t < grid.size(); ++t) objective += effective[t] * x[t];
        if (!best || objective < best->objective) best = BruteForceResult{std::move(x), objective, step, 0.0};
    };

    std::vector<std::size_t> index(free_slots.size(), 0);
    while (true) {
        for (std::size_t i = 0; i < free_slots.size(); ++i) candidate[free_slots[i]] = levels[index[i]];
        evaluate(candidate);
        std::size_t i = 0;
        while (i < index.size() && ++index[i] == levels.size()) index[i++] = 0;
        if (i == index.size()) break;
    }

    if (best) {
        double max_cost = 0.0;
        for (std::size_t t = t0; t < grid.size(); ++t) max_cost = std::max(max_cost, std::abs(effective[t]));
        best->delta = static_cast<double>(grid.size()) * step * max_cost;
    }
    return best;
}

ScheduleVector greedy_knapsack_schedule(const PevSpec& pev, const TimeGrid& grid, std::span<const double> cost) {
    std::vector<std::size_t> order;
    for (std::size_t t = 0; t < grid.size(); ++t)
        if (pev.permissible_slots[t]) order.push_back(t);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cost[a] < cost[b]; });
    ScheduleVector out(grid.size());
    double left = pev.required_energy_kwh;
    for (std::size_t t : order) {
        const double x = std::min(left, pev.slot_energy_limit(grid));
        out[t] = x;
        left -= x;
        if (left <= 0.0) break;
    }
    return out;
}

}  // namespace gridshaper::testing
