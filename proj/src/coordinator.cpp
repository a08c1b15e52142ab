#include "gridshaper/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "gridshaper/format.hpp"
#include "gridshaper/settlement.hpp"

namespace gridshaper {

namespace {

// Slack allowed on the per-update descent assertion; the solver resolves
// near-ties at 1e-9 per unit of flow.
constexpr double kDescentSlack = 1e-6;

std::vector<UserProfile> sorted_users(std::span<const UserProfile> users) {
    std::vector<UserProfile> out(users.begin(), users.end());
    std::sort(out.begin(), out.end(), [](const UserProfile& a, const UserProfile& b) { return a.id() < b.id(); });
    return out;
}

bool should_stop(const ConvergencePolicy& policy, std::size_t sweeps, double last_mse) {
    switch (policy.mode) {
        case StoppingMode::FixedIterations:
            return sweeps >= policy.max_iterations;
        case StoppingMode::MseThreshold:
            return last_mse <= policy.mse_tolerance || sweeps >= kMseModeSweepCap;
        case StoppingMode::WhicheverFirst:
            return last_mse <= policy.mse_tolerance || sweeps >= policy.max_iterations;
    }
    return true;
}

void check_descent(const UpdateEvent& e) {
    if (e.objective_after > e.objective_before + kDescentSlack * (1.0 + std::abs(e.objective_before))) {
        throw std::logic_error("best-response update increased the objective for user " +
                               std::to_string(e.user_id) + ": " + format_double(e.objective_before) + " -> " +
                               format_double(e.objective_after));
    }
}

// Shared sweep driver. `update` returns the new schedule for one user given
// the aggregate of everyone else and records the event.
template <typename Update>
ShapedOutcome run_sweeps(const TimeGrid& grid, std::vector<UserProfile> users,
                         std::map<UserId, ScheduleVector> schedules, std::vector<double> target,
                         const ConvergencePolicy& policy, Update&& update) {
    std::vector<double> agg = aggregate(users, schedules, grid);
    std::vector<double> previous = agg;
    std::vector<double> others(grid.size());
    ShapedOutcome outcome;
    outcome.target_kwh = std::move(target);

    std::size_t sweep = 0;
    while (true) {
        ++sweep;
        for (const auto& user : users) {
            ScheduleVector& current = schedules.at(user.id());
            for (std::size_t t = 0; t < grid.size(); ++t)
                others[t] = agg[t] - (user.household_load_kwh[t] + current[t]);
            std::optional<ScheduleVector> next = update(user, current, others, sweep);
            if (!next) continue;
            for (std::size_t t = 0; t < grid.size(); ++t) agg[t] += (*next)[t] - current[t];
            current = std::move(*next);
        }
        agg = aggregate(users, schedules, grid);
        const double change = mse(agg, previous);
        outcome.mse_trace.push_back(change);
        previous = agg;
        if (should_stop(policy, sweep, change)) break;
    }
    outcome.iterations_run = sweep;
    outcome.fleet = FleetState(grid, std::move(users), std::move(schedules));
    return outcome;
}

}  // namespace

void ConvergencePolicy::validate() const {
    if (mode != StoppingMode::MseThreshold && max_iterations < 1)
        throw std::invalid_argument("ConvergencePolicy: max_iterations must be >= 1");
    if (!(mse_tolerance >= 0.0)) throw std::invalid_argument("ConvergencePolicy: mse_tolerance must be >= 0");
}

void AlterTriggerRule::validate() const {
    if (mode == TriggerMode::Ratio && !(ratio_threshold > 1.0))
        throw std::invalid_argument("AlterTriggerRule: ratio_threshold must be > 1");
    if (mode == TriggerMode::Manual && !manual_t0)
        throw std::invalid_argument("AlterTriggerRule: manual mode requires manual_t0");
}

void write_event_jsonl(std::ostream& out, const UpdateEvent& e) {
    out << "{\"phase\":\"" << (e.phase == Phase::Shaping ? "shaping" : "altering") << "\",\"user_id\":" << e.user_id
        << ",\"sweep\":" << e.sweep << ",\"objective_before\":" << format_double(e.objective_before)
        << ",\"objective_after\":" << format_double(e.objective_after) << "}\n";
}

bool connected_from(const PevSpec& pev, std::size_t t0) {
    for (std::size_t t = t0; t < pev.permissible_slots.size(); ++t)
        if (pev.permissible_slots[t]) return true;
    return false;
}

std::vector<double> others_aggregate(const FleetState& fleet, UserId user) {
    const UserProfile& profile = fleet.user(user);
    const ScheduleVector& own = fleet.schedule(user);
    std::vector<double> out = fleet.aggregate_kwh();
    for (std::size_t t = 0; t < out.size(); ++t) out[t] -= profile.household_load_kwh[t] + own[t];
    return out;
}

std::map<UserId, ScheduleVector> initial_schedules(std::span<const UserProfile> users, const TimeGrid& grid,
                                                   Initializer initializer) {
    std::map<UserId, ScheduleVector> out;
    for (const auto& u : users) {
        u.validate(grid);
        if (initializer == Initializer::UncoordinatedGreedy)
            out.emplace(u.id(), plug_in_schedule(u.pev, grid));
        else
            out.emplace(u.id(), ScheduleVector(grid.size()));
    }
    return out;
}

ShapedOutcome run_shaping(std::span<const UserProfile> users, std::span<const double> target_kwh,
                          const TimeGrid& grid, const ConvergencePolicy& policy, Initializer initializer,
                          const EventSink& sink) {
    policy.validate();
    grid.require_length(target_kwh, "target_kwh");
    auto ordered = sorted_users(users);
    auto schedules = initial_schedules(ordered, grid, initializer);
    std::vector<double> target(target_kwh.begin(), target_kwh.end());

    auto update = [&](const UserProfile& user, const ScheduleVector& current, const std::vector<double>& others,
                      std::size_t sweep) -> std::optional<ScheduleVector> {
        ShapingInstance inst{user.pev, user.household_load_kwh, others, target, grid};
        ScheduleVector next = solve_p1(inst);
        UpdateEvent e{Phase::Shaping, user.id(), sweep, p1_objective(inst, current), p1_objective(inst, next)};
        if (check_feasibility(user.pev, current, grid).feasible()) check_descent(e);
        if (sink) sink(e);
        return next;
    };
    return run_sweeps(grid, std::move(ordered), std::move(schedules), target, policy, update);
}

std::optional<std::size_t> detect_t0(const MarketDay& market, std::size_t revealed_upto,
                                     const AlterTriggerRule& rule) {
    const std::size_t horizon = market.rt_price_per_mwh.size();
    if (revealed_upto > horizon)
        throw DimensionError("detect_t0: revealed_upto " + std::to_string(revealed_upto) + " > horizon " +
                             std::to_string(horizon));
    if (rule.mode == TriggerMode::Manual) {
        if (rule.manual_t0 && *rule.manual_t0 < horizon) return rule.manual_t0;
        return std::nullopt;
    }
    for (std::size_t t = 0; t < revealed_upto; ++t) {
        const double da = market.da_price_per_mwh[t];
        const double rt = market.rt_price_per_mwh[t];
        if (rule.mode == TriggerMode::Ratio) {
            if (da > 0.0 && rt >= rule.ratio_threshold * da) return t;
        } else if (rt - da >= rule.spread_threshold_per_mwh) {
            return t;
        }
    }
    return std::nullopt;
}

ShapedOutcome run_altering(const ShapedOutcome& shaped, std::size_t t0, const AlteringOptions& options,
                           const ConvergencePolicy& policy, const EventSink& sink) {
    policy.validate();
    const TimeGrid& grid = shaped.fleet.grid();
    if (t0 >= grid.size())
        throw DimensionError("run_altering: t0 " + std::to_string(t0) + " outside horizon " +
                             std::to_string(grid.size()));
    if (!(options.lambda >= 0.0 && options.lambda <= 1.0))
        throw std::invalid_argument("run_altering: lambda outside [0,1]");

    std::vector<UserProfile> users = shaped.fleet.users();
    std::map<UserId, ScheduleVector> schedules = shaped.fleet.schedules();
    for (const auto& u : users) {
        u.validate(grid);
        const auto report = check_feasibility(u.pev, schedules.at(u.id()), grid);
        if (!report.feasible())
            throw InfeasibleError("user " + std::to_string(u.id()) + ": shaped schedule infeasible: " +
                                  report.summary());
    }

    const std::vector<double>& target = shaped.target_kwh;
    auto update = [&](const UserProfile& user, const ScheduleVector& current, const std::vector<double>& others,
                      std::size_t sweep) -> std::optional<ScheduleVector> {
        if (!connected_from(user.pev, t0)) return std::nullopt;
        AlteringInstance inst{user.pev,
                              user.household_load_kwh,
                              others,
                              target,
                              grid,
                              std::vector<double>(current.values.begin(), current.values.begin() + t0),
                              t0,
                              options.lambda,
                              options.t0_weight_scale_kwh};
        ScheduleVector next = solve_p2(inst);
        UpdateEvent e{Phase::Altering, user.id(), sweep, p2_reported_objective(inst, current),
                      p2_reported_objective(inst, next)};
        check_descent(e);
        if (sink) sink(e);
        return next;
    };
    return run_sweeps(grid, std::move(users), std::move(schedules), target, policy, update);
}

}  // namespace gridshaper
