#include "gridshaper/settlement.hpp"

#include <algorithm>

#include "gridshaper/format.hpp"

namespace gridshaper {

namespace {

constexpr double kKwhPerMwh = 1000.0;

double savings_pct(double before, double after) {
    if (before == 0.0) return 0.0;
    return 100.0 * (before - after) / before;
}

}  // namespace

Settlement settle(std::span<const double> aggregate_kwh, const MarketDay& market) {
    const std::size_t h = market.da_purchased_kwh.size();
    if (aggregate_kwh.size() != h || market.da_price_per_mwh.size() != h || market.rt_price_per_mwh.size() != h)
        throw DimensionError("settle: aggregate and market vectors must share one length");

    Settlement s;
    s.imbalance_kwh.resize(h);
    s.da_cost_per_slot_usd.resize(h);
    s.rt_cost_per_slot_usd.resize(h);
    for (std::size_t t = 0; t < h; ++t) {
        s.imbalance_kwh[t] = aggregate_kwh[t] - market.da_purchased_kwh[t];
        s.da_cost_per_slot_usd[t] = market.da_purchased_kwh[t] * market.da_price_per_mwh[t] / kKwhPerMwh;
        s.rt_cost_per_slot_usd[t] = s.imbalance_kwh[t] * market.rt_price_per_mwh[t] / kKwhPerMwh;
    }
    s.da_cost_usd = dot(market.da_purchased_kwh, market.da_price_per_mwh) / kKwhPerMwh;
    s.rt_cost_usd = dot(s.imbalance_kwh, market.rt_price_per_mwh) / kKwhPerMwh;
    s.total_usd = s.da_cost_usd + s.rt_cost_usd;
    return s;
}

ScheduleVector plug_in_schedule(const PevSpec& pev, const TimeGrid& grid) {
    pev.validate(grid);
    const std::size_t h = grid.size();
    const auto& mask = pev.permissible_slots;
    std::size_t start = 0;
    for (std::size_t t = 0; t < h; ++t) {
        if (mask[t] && !mask[(t + h - 1) % h]) {
            start = t;
            break;
        }
    }
    ScheduleVector out(h);
    double left = pev.required_energy_kwh;
    const double limit = pev.slot_energy_limit(grid);
    for (std::size_t k = 0; k < h && left > 0.0; ++k) {
        const std::size_t t = (start + k) % h;
        if (!mask[t]) continue;
        const double x = std::min(left, limit);
        out[t] = x;
        left -= x;
    }
    return out;
}

FleetState uncoordinated_baseline(std::span<const UserProfile> users, const TimeGrid& grid) {
    std::map<UserId, ScheduleVector> schedules;
    for (const auto& u : users) {
        u.validate(grid);
        schedules.emplace(u.id(), plug_in_schedule(u.pev, grid));
    }
    return FleetState(grid, std::vector<UserProfile>(users.begin(), users.end()), std::move(schedules));
}

double CostChainReport::shaping_savings_pct() const { return savings_pct(cost_uncoordinated(), cost_after_p1()); }
double CostChainReport::altering_savings_pct() const { return savings_pct(cost_after_p1(), cost_after_p2()); }
double CostChainReport::overall_savings_pct() const { return savings_pct(cost_uncoordinated(), cost_after_p2()); }

CostChainReport make_cost_chain_report(std::span<const double> uncoordinated_kwh,
                                       std::span<const double> shaped_kwh, std::span<const double> altered_kwh,
                                       const MarketDay& market, std::optional<std::size_t> t0, double lambda) {
    return CostChainReport{settle(uncoordinated_kwh, market), settle(shaped_kwh, market),
                           settle(altered_kwh, market), t0, lambda};
}

CostChainRun cost_chain(std::span<const UserProfile> users, const TimeGrid& grid, const MarketDay& market,
                        const ConvergencePolicy& policy, const AlterTriggerRule& trigger,
                        const AlteringOptions& altering, const EventSink& sink) {
    market.validate(grid);
    trigger.validate();
    FleetState baseline = uncoordinated_baseline(users, grid);
    ShapedOutcome shaped =
        run_shaping(users, market.da_purchased_kwh, grid, policy, Initializer::UncoordinatedGreedy, sink);
    const auto t0 = detect_t0(market, grid.size(), trigger);
    ShapedOutcome altered = t0 ? run_altering(shaped, *t0, altering, policy, sink) : shaped;
    CostChainReport report =
        make_cost_chain_report(baseline.aggregate_kwh(), shaped.fleet.aggregate_kwh(),
                               altered.fleet.aggregate_kwh(), market, t0, altering.lambda);
    return CostChainRun{std::move(report), std::move(baseline), std::move(shaped), std::move(altered)};
}

void write_key_value(std::ostream& out, const CostChainReport& r) {
    out << "baseline=plug_in_greedy\n";
    out << "cost_uncoordinated_usd=" << format_double(r.cost_uncoordinated()) << '\n';
    out << "cost_after_p1_usd=" << format_double(r.cost_after_p1()) << '\n';
    out << "cost_after_p2_usd=" << format_double(r.cost_after_p2()) << '\n';
    out << "da_cost_usd=" << format_double(r.after_shaping.da_cost_usd) << '\n';
    out << "rt_cost_uncoordinated_usd=" << format_double(r.uncoordinated.rt_cost_usd) << '\n';
    out << "rt_cost_after_p1_usd=" << format_double(r.after_shaping.rt_cost_usd) << '\n';
    out << "rt_cost_after_p2_usd=" << format_double(r.after_altering.rt_cost_usd) << '\n';
    out << "shaping_savings_pct=" << format_double(r.shaping_savings_pct()) << '\n';
    out << "altering_savings_pct=" << format_double(r.altering_savings_pct()) << '\n';
    out << "overall_savings_pct=" << format_double(r.overall_savings_pct()) << '\n';
    out << "t0=" << (r.t0 ? std::to_string(*r.t0) : std::string("none")) << '\n';
    out << "lambda=" << format_double(r.lambda) << '\n';
}

void write_cost_table(std::ostream& out, const CostChainReport& r) {
    out << "stage,da_cost_usd,rt_cost_usd,total_usd,savings_vs_previous_pct\n";
    auto row = [&](const char* stage, const Settlement& s, double pct) {
        out << stage << ',' << format_double(s.da_cost_usd) << ',' << format_double(s.rt_cost_usd) << ','
            << format_double(s.total_usd) << ',' << format_double(pct) << '\n';
    };
    row("uncoordinated", r.uncoordinated, 0.0);
    row("after_p1", r.after_shaping, r.shaping_savings_pct());
    row("after_p2", r.after_altering, r.altering_savings_pct());
}

}  // namespace gridshaper
