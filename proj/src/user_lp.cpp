#include "gridshaper/user_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gridshaper {

namespace {

// Path costs are compared lexicographically: the objective, then battery
// throughput sum |x_t| (no cycling for nothing), then slot position (earliest
// slot wins).
struct PathCost {
    double primary = 0.0;
    double throughput = 0.0;
    double position = 0.0;
};

constexpr double kTieEps = 1e-9;
constexpr double kFlowEps = 1e-12;

bool cheaper(const PathCost& a, const PathCost& b) {
    if (a.primary < b.primary - kTieEps) return true;
    if (a.primary > b.primary + kTieEps) return false;
    if (a.throughput < b.throughput - kTieEps) return true;
    if (a.throughput > b.throughput + kTieEps) return false;
    return a.position < b.position;
}

PathCost operator+(PathCost a, const PathCost& b) {
    return {a.primary + b.primary, a.throughput + b.throughput, a.position + b.position};
}

PathCost operator-(const PathCost& a) { return {-a.primary, -a.throughput, -a.position}; }

// Successive-shortest-path min-cost flow on the small graph
//   source -> slot_k (shifted energy y_k, cost c_k) ; slot_k -> slot_{k+1}
//   (slack above the cumulative lower bound) ; slot_k -> sink (increments of
//   the cumulative lower bound).
class SlotFlowNetwork {
public:
    explicit SlotFlowNetwork(std::size_t nodes) : adjacency_(nodes) {}

    std::size_t add_edge(std::size_t from, std::size_t to, double capacity, PathCost cost) {
        adjacency_[from].push_back({to, adjacency_[to].size(), capacity, cost});
        adjacency_[to].push_back({from, adjacency_[from].size() - 1, 0.0, -cost});
        return adjacency_[from].size() - 1;
    }

    double flow_on(std::size_t from, std::size_t edge_index) const {
        const Edge& e = adjacency_[from][edge_index];
        return adjacency_[e.to][e.reverse].capacity;
    }

    // Pushes up to `amount` from source to sink; returns the amount delivered.
    double push(std::size_t source, std::size_t sink, double amount) {
        const std::size_t n = adjacency_.size();
        double delivered = 0.0;
        const double eps = kFlowEps * std::max(1.0, amount);
        while (amount - delivered > eps) {
            std::vector<PathCost> dist(n);
            std::vector<bool> reached(n, false);
            std::vector<std::pair<std::size_t, std::size_t>> pred(n, {n, 0});
            reached[source] = true;
            for (std::size_t pass = 0; pass < n; ++pass) {
                bool changed = false;
                for (std::size_t u = 0; u < n; ++u) {
                    if (!reached[u]) continue;
                    for (std::size_t i = 0; i < adjacency_[u].size(); ++i) {
                        const Edge& e = adjacency_[u][i];
                        if (e.capacity <= eps) continue;
                        const PathCost candidate = dist[u] + e.cost;
                        if (!reached[e.to] || cheaper(candidate, dist[e.to])) {
                            if (e.to == source) continue;
                            dist[e.to] = candidate;
                            reached[e.to] = true;
                            pred[e.to] = {u, i};
                            changed = true;
                        }
                    }
                }
                if (!changed) break;
            }
            if (!reached[sink]) break;

            double bottleneck = amount - delivered;
            std::size_t v = sink;
            for (std::size_t steps = 0; v != source; ++steps) {
                if (steps > n) throw std::logic_error("SlotFlowNetwork: cyclic predecessor chain");
                const auto [u, i] = pred[v];
                bottleneck = std::min(bottleneck, adjacency_[u][i].capacity);
                v = u;
            }
            for (v = sink; v != source;) {
                const auto [u, i] = pred[v];
                Edge& e = adjacency_[u][i];
                e.capacity -= bottleneck;
                adjacency_[e.to][e.reverse].capacity += bottleneck;
                v = u;
            }
            delivered += bottleneck;
        }
        return delivered;
    }

private:
    struct Edge {
        std::size_t to;
        std::size_t reverse;
        double capacity;
        PathCost cost;
    };
    std::vector<std::vector<Edge>> adjacency_;
};

std::string user_tag(const PevSpec& pev) { return "user " + std::to_string(pev.user_id) + ": "; }

[[noreturn]] void throw_infeasible(const PevSpec& pev, std::size_t slots, double limit, double soc_start,
                                   double energy) {
    const std::string who = user_tag(pev);
    const double tol = kEnergyTolerance;
    if (!pev.v2g_enabled && energy < -tol)
        throw InfeasibleError(who + "discharge required but V2G disabled (remaining energy " +
                              std::to_string(energy) + " kWh)");
    if (std::abs(energy) > limit * static_cast<double>(slots) + tol)
        throw InfeasibleError(who + "power window: remaining energy " + std::to_string(energy) +
                              " kWh exceeds " + std::to_string(slots) + " slots x " + std::to_string(limit) +
                              " kWh");
    if (soc_start + energy > pev.capacity_kwh + tol)
        throw InfeasibleError(who + "capacity: final SOC would exceed capacity");
    if (soc_start + energy < pev.effective_soc_floor() - tol)
        throw InfeasibleError(who + "SOC floor: final SOC would fall below the floor");
    throw InfeasibleError(who + "SOC bounds: no schedule keeps SOC within [floor, capacity]");
}

}  // namespace

ScheduleVector solve_linear_schedule(const PevSpec& pev, const TimeGrid& grid, std::span<const double> cost,
                                     std::span<const double> prefix) {
    grid.require_length(cost, "cost vector");
    if (pev.permissible_slots.size() != grid.size())
        throw DimensionError(user_tag(pev) + "mask length does not match horizon");
    const std::size_t first_slot = prefix.size();
    if (first_slot >= grid.size() && first_slot != 0)
        throw DimensionError(user_tag(pev) + "frozen prefix covers the whole horizon");

    ScheduleVector out(grid.size());
    double soc_start = pev.soc_arrival_kwh;
    double energy = pev.required_energy_kwh;
    for (std::size_t t = 0; t < first_slot; ++t) {
        out[t] = prefix[t];
        if (pev.permissible_slots[t]) soc_start += prefix[t];
        energy -= prefix[t];
    }

    std::vector<std::size_t> slots;
    for (std::size_t t = first_slot; t < grid.size(); ++t) {
        if (pev.permissible_slots[t]) slots.push_back(t);
    }
    const std::size_t m = slots.size();
    const double limit = pev.slot_energy_limit(grid);
    const double tol = kEnergyTolerance;

    if (m == 0) {
        if (std::abs(energy) > tol) throw_infeasible(pev, m, limit, soc_start, energy);
        return out;
    }

    // Shift x_k = y_k + lower so that y_k in [0, span] and Y_k = sum_{j<=k} y_j
    // must satisfy lower_cum[k] <= Y_k <= upper_cum[k], Y_m = demand.
    const double lower = pev.v2g_enabled ? -limit : 0.0;
    const double span_per_slot = limit - lower;
    const double floor = pev.effective_soc_floor();
    const double demand = energy - static_cast<double>(m) * lower;

    std::vector<double> lower_cum(m + 1, 0.0), upper_cum(m + 1, demand);
    for (std::size_t k = 1; k <= m; ++k) {
        const double shift = static_cast<double>(k) * lower;
        lower_cum[k] = std::max(lower_cum[k - 1], floor - soc_start - shift);
    }
    double running_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = m; k >= 1; --k) {
        const double shift = static_cast<double>(k) * lower;
        running_min = std::min(running_min, pev.capacity_kwh - soc_start - shift);
        upper_cum[k] = std::min(running_min, demand);
    }
    if (lower_cum[m] > demand + tol || upper_cum[m] < demand - tol || demand < -tol)
        throw_infeasible(pev, m, limit, soc_start, energy);
    lower_cum[m] = demand;
    for (std::size_t k = 1; k < m; ++k) {
        if (lower_cum[k] > upper_cum[k] + kInequalitySlack) throw_infeasible(pev, m, limit, soc_start, energy);
    }

    const std::size_t source = 0;
    const std::size_t sink = m + 1;
    SlotFlowNetwork net(m + 2);
    // With V2G, y_k in [0, L] is the discharge range (|x| shrinks as y grows)
    // and y_k in [L, 2L] the charge range; the two arcs make |x| convex in y.
    std::vector<std::vector<std::size_t>> charge_edges(m);
    for (std::size_t k = 1; k <= m; ++k) {
        const std::size_t slot = slots[k - 1];
        const double position = static_cast<double>(slot);
        if (pev.v2g_enabled) {
            charge_edges[k - 1].push_back(net.add_edge(source, k, limit, {cost[slot], -1.0, position}));
            charge_edges[k - 1].push_back(net.add_edge(source, k, limit, {cost[slot], 1.0, position}));
        } else {
            charge_edges[k - 1].push_back(net.add_edge(source, k, span_per_slot, {cost[slot], 1.0, position}));
        }
        if (k < m) net.add_edge(k, k + 1, std::max(0.0, upper_cum[k] - lower_cum[k]), {});
        const double increment = lower_cum[k] - lower_cum[k - 1];
        if (increment > 0.0) net.add_edge(k, sink, increment, {});
    }

    const double delivered = net.push(source, sink, demand);
    if (delivered < demand - tol) throw_infeasible(pev, m, limit, soc_start, energy);

    for (std::size_t k = 0; k < m; ++k) {
        double y = 0.0;
        for (std::size_t e : charge_edges[k]) y += net.flow_on(source, e);
        y = std::clamp(y, 0.0, span_per_slot);
        double x = y + lower;
        // Residual bookkeeping leaves ulp-level noise; snap to the box and zero.
        if (std::abs(x) < kFlowEps) x = 0.0;
        else if (std::abs(x - limit) < kFlowEps) x = limit;
        else if (std::abs(x + limit) < kFlowEps) x = -limit;
        out[slots[k]] = x;
    }
    return out;
}

std::vector<double> ShapingInstance::cost_vector() const {
    std::vector<double> c(grid.size());
    for (std::size_t t = 0; t < c.size(); ++t) c[t] = household_load_kwh[t] + others_aggregate_kwh[t] - target_kwh[t];
    return c;
}

void ShapingInstance::validate() const {
    grid.require_length(household_load_kwh, "household_load_kwh");
    grid.require_length(others_aggregate_kwh, "others_aggregate_kwh");
    grid.require_length(target_kwh, "target_kwh");
    pev.validate(grid);
}

std::vector<double> AlteringInstance::cost_vector() const {
    std::vector<double> c(grid.size());
    for (std::size_t t = 0; t < c.size(); ++t)
        c[t] = lambda * (household_load_kwh[t] + others_aggregate_kwh[t] - target_kwh[t]);
    c[t0] += t0_weight();
    return c;
}

void AlteringInstance::validate() const {
    grid.require_length(household_load_kwh, "household_load_kwh");
    grid.require_length(others_aggregate_kwh, "others_aggregate_kwh");
    grid.require_length(target_kwh, "target_kwh");
    if (t0 >= grid.size())
        throw DimensionError("altering: t0 " + std::to_string(t0) + " outside horizon " + std::to_string(grid.size()));
    if (frozen_prefix_kwh.size() != t0)
        throw DimensionError("altering: frozen prefix length " + std::to_string(frozen_prefix_kwh.size()) +
                             " != t0 " + std::to_string(t0));
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("altering: lambda outside [0,1]");
    pev.validate(grid);
}

ScheduleVector solve_p1(const ShapingInstance& instance) {
    instance.validate();
    const auto c = instance.cost_vector();
    return solve_linear_schedule(instance.pev, instance.grid, c);
}

ScheduleVector solve_p2(const AlteringInstance& instance) {
    instance.validate();
    const auto c = instance.cost_vector();
    return solve_linear_schedule(instance.pev, instance.grid, c, instance.frozen_prefix_kwh);
}

double p1_objective(const ShapingInstance& instance, const ScheduleVector& schedule) {
    return dot(schedule.values, instance.cost_vector());
}

double p2_objective(const AlteringInstance& instance, const ScheduleVector& schedule) {
    const auto c = instance.cost_vector();
    double acc = 0.0;
    for (std::size_t t = instance.t0; t < c.size(); ++t) acc += c[t] * schedule[t];
    return acc;
}

double p2_reported_objective(const AlteringInstance& instance, const ScheduleVector& schedule) {
    const std::size_t t0 = instance.t0;
    return p2_objective(instance, schedule) +
           instance.t0_weight() * (instance.others_aggregate_kwh[t0] + instance.household_load_kwh[t0]);
}

}  // namespace gridshaper
