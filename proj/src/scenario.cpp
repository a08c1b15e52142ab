#include "gridshaper/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gridshaper/io.hpp"

namespace gridshaper {

void DiscreteDistribution::validate(const char* what) const {
    const std::string name(what);
    if (values.empty()) throw std::invalid_argument(name + ": empty distribution");
    if (values.size() != probabilities.size())
        throw std::invalid_argument(name + ": values/probabilities length mismatch");
    double sum = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0)) throw std::invalid_argument(name + ": negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument(name + ": probabilities sum to " + std::to_string(sum) + ", expected 1");
}

double DiscreteDistribution::quantile(double u) const {
    double cumulative = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        cumulative += probabilities[i];
        if (u < cumulative) return values[i];
    }
    // u lands in the rounding gap above the last cumulative sum
    for (std::size_t i = values.size(); i-- > 0;)
        if (probabilities[i] > 0.0) return values[i];
    return values.back();
}

void FleetConfig::validate() const {
    if (n_users < 1) throw std::invalid_argument("FleetConfig: n_users must be >= 1");
    if (!(charge_rate_kw > 0.0)) throw std::invalid_argument("FleetConfig: charge_rate_kw must be > 0");
    if (!(capacity_kwh > 0.0)) throw std::invalid_argument("FleetConfig: capacity_kwh must be > 0");
    if (!(v2g_fraction >= 0.0 && v2g_fraction <= 1.0))
        throw std::invalid_argument("FleetConfig: v2g_fraction outside [0,1]");
    if (!(min_soc_fraction >= 0.0 && min_soc_fraction <= 1.0))
        throw std::invalid_argument("FleetConfig: min_soc_fraction outside [0,1]");
    if (!(household_scale_spread >= 0.0 && household_scale_spread < 1.0))
        throw std::invalid_argument("FleetConfig: household_scale_spread outside [0,1)");
    arrival_dist.validate("arrival distribution");
    departure_dist.validate("departure distribution");
    charging_hours_dist.validate("charging hours distribution");
    grid.require_length(household_base_kwh, "household base profile");
    for (const auto* dist : {&arrival_dist, &departure_dist}) {
        for (double v : dist->values) {
            if (v < 0.0 || v >= static_cast<double>(grid.size()) || v != std::floor(v))
                throw std::invalid_argument("FleetConfig: slot value " + std::to_string(v) + " outside horizon");
        }
    }
    for (double v : charging_hours_dist.values)
        if (!(v >= 0.0)) throw std::invalid_argument("FleetConfig: negative charging hours");
}

Mask connection_mask(std::size_t arrival, std::size_t departure, std::size_t horizon) {
    Mask mask(horizon, false);
    if (arrival == departure) return mask;
    for (std::size_t t = arrival; t != departure; t = (t + 1) % horizon) mask[t] = true;
    return mask;
}

std::vector<UserProfile> sample_fleet(const FleetConfig& config) {
    config.validate();
    const std::size_t h = config.grid.size();
    FleetRng rng(config.seed);
    std::vector<UserProfile> users;
    users.reserve(config.n_users);

    for (std::size_t n = 0; n < config.n_users; ++n) {
        UserProfile user;
        PevSpec& pev = user.pev;
        pev.user_id = static_cast<UserId>(n);
        pev.max_power_kw = config.charge_rate_kw;
        pev.capacity_kwh = config.capacity_kwh;
        pev.min_soc_fraction = config.min_soc_fraction;
        pev.v2g_enabled = rng.uniform() < config.v2g_fraction;
        const double scale = 1.0 + config.household_scale_spread * (2.0 * rng.uniform() - 1.0);
        user.household_load_kwh.resize(h);
        for (std::size_t t = 0; t < h; ++t) user.household_load_kwh[t] = config.household_base_kwh[t] * scale;

        bool accepted = false;
        for (int attempt = 0; attempt < kMaxRejectionAttempts && !accepted; ++attempt) {
            const auto arrival = static_cast<std::size_t>(config.arrival_dist.quantile(rng.uniform()));
            const auto departure = static_cast<std::size_t>(config.departure_dist.quantile(rng.uniform()));
            const double hours = config.charging_hours_dist.quantile(rng.uniform());

            pev.permissible_slots = connection_mask(arrival, departure, h);
            pev.required_energy_kwh = config.charge_rate_kw * hours;
            pev.soc_arrival_kwh = config.capacity_kwh - pev.required_energy_kwh;

            const double window =
                pev.slot_energy_limit(config.grid) * static_cast<double>(pev.connected_slot_count());
            accepted = pev.connected_slot_count() > 0 && pev.required_energy_kwh <= window &&
                       pev.soc_arrival_kwh >= config.min_soc_fraction * config.capacity_kwh;
        }
        if (!accepted)
            throw std::runtime_error("sample_fleet: user " + std::to_string(n) + " rejected " +
                                     std::to_string(kMaxRejectionAttempts) + " draws");
        user.validate(config.grid);
        users.push_back(std::move(user));
    }
    return users;
}

std::vector<std::size_t> availability_histogram(std::span<const UserProfile> users, std::size_t horizon) {
    std::vector<std::size_t> counts(horizon, 0);
    for (const auto& u : users) {
        for (std::size_t t = 0; t < horizon && t < u.pev.permissible_slots.size(); ++t)
            if (u.pev.permissible_slots[t]) ++counts[t];
    }
    return counts;
}

std::vector<double> household_total(std::span<const UserProfile> users, std::size_t horizon) {
    std::vector<double> total(horizon, 0.0);
    for (const auto& u : users) {
        if (u.household_load_kwh.size() != horizon) throw DimensionError("household_total: length mismatch");
        for (std::size_t t = 0; t < horizon; ++t) total[t] += u.household_load_kwh[t];
    }
    return total;
}

double total_required_energy(std::span<const UserProfile> users) {
    double sum = 0.0;
    for (const auto& u : users) sum += u.pev.required_energy_kwh;
    return sum;
}

std::vector<double> valley_fill_target(std::span<const double> household_kwh, double energy_kwh) {
    if (household_kwh.empty()) throw DimensionError("valley_fill_target: empty household profile");
    if (!(energy_kwh >= 0.0)) throw std::invalid_argument("valley_fill_target: energy must be >= 0");
    auto filled = [&](double level) {
        double acc = 0.0;
        for (double h : household_kwh) acc += std::max(0.0, level - h);
        return acc;
    };
    double lo = *std::min_element(household_kwh.begin(), household_kwh.end());
    double hi = *std::max_element(household_kwh.begin(), household_kwh.end()) +
                energy_kwh / static_cast<double>(household_kwh.size());
    if (filled(hi) < energy_kwh - 1e-9) throw std::runtime_error("valley_fill_target: bracket does not contain level");
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (filled(mid) < energy_kwh) lo = mid;
        else hi = mid;
        if (std::abs(filled(hi) - energy_kwh) <= 1e-9 || hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
            converged = true;
            break;
        }
    }
    if (!converged || std::abs(filled(hi) - energy_kwh) > 1e-6)
        throw std::runtime_error("valley_fill_target: bisection did not converge");
    std::vector<double> target(household_kwh.begin(), household_kwh.end());
    for (double& v : target) v = std::max(v, hi);
    return target;
}

std::vector<double> scaled_household_target(std::span<const double> household_kwh, double energy_kwh) {
    const double base = std::accumulate(household_kwh.begin(), household_kwh.end(), 0.0);
    if (!(base > 0.0)) throw std::invalid_argument("scaled_household_target: household total must be > 0");
    const double factor = (base + energy_kwh) / base;
    std::vector<double> target(household_kwh.begin(), household_kwh.end());
    for (double& v : target) v *= factor;
    return target;
}

std::vector<double> make_target(TargetMode mode, const TargetInputs& inputs) {
    switch (mode) {
        case TargetMode::ExternalCsv: {
            if (inputs.external_csv.empty()) throw std::invalid_argument("make_target: external_csv path missing");
            auto target = load_profile_csv(inputs.external_csv);
            inputs.grid.require_length(target, "external target profile");
            return target;
        }
        case TargetMode::ValleyFill:
            inputs.grid.require_length(inputs.household_kwh, "household profile");
            return valley_fill_target(inputs.household_kwh, inputs.pev_energy_kwh);
        case TargetMode::ScaledHousehold:
            inputs.grid.require_length(inputs.household_kwh, "household profile");
            return scaled_household_target(inputs.household_kwh, inputs.pev_energy_kwh);
    }
    throw std::invalid_argument("make_target: unknown mode");
}

}  // namespace gridshaper
