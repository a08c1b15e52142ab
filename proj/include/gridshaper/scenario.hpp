#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "gridshaper/grid_core.hpp"

namespace gridshaper {

// Tabulated discrete distribution (value -> probability).
struct DiscreteDistribution {
    std::vector<double> values;
    std::vector<double> probabilities;

    void validate(const char* what) const;
    // Inverse CDF at u in [0, 1).
    double quantile(double u) const;
};

// mt19937_64 (fully specified by the C++ standard) with a hand-written
// 53-bit uniform mapping, so draws are identical across platforms.
class FleetRng {
public:
    explicit FleetRng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

struct FleetConfig {
    std::size_t n_users = 100;
    double charge_rate_kw = 1.8;
    double capacity_kwh = 24.0;
    double v2g_fraction = 0.0;
    double min_soc_fraction = 0.2;
    DiscreteDistribution arrival_dist;         // slot index
    DiscreteDistribution departure_dist;       // slot index (exclusive end)
    DiscreteDistribution charging_hours_dist;  // hours
    std::vector<double> household_base_kwh;    // length H
    // Per-user household scale is drawn uniformly in [1 - spread, 1 + spread].
    double household_scale_spread = 0.0;
    std::uint64_t seed = 0;
    TimeGrid grid;

    void validate() const;
};

inline constexpr int kMaxRejectionAttempts = 1000;

// Connection mask for [arrival, departure) taken cyclically over the horizon.
Mask connection_mask(std::size_t arrival, std::size_t departure, std::size_t horizon);

std::vector<UserProfile> sample_fleet(const FleetConfig& config);

std::vector<std::size_t> availability_histogram(std::span<const UserProfile> users, std::size_t horizon);

// Slot-wise sum of household loads.
std::vector<double> household_total(std::span<const UserProfile> users, std::size_t horizon);

double total_required_energy(std::span<const UserProfile> users);

enum class TargetMode { ExternalCsv, ValleyFill, ScaledHousehold };

struct TargetInputs {
    std::vector<double> household_kwh;
    double pev_energy_kwh = 0.0;
    std::filesystem::path external_csv;
    TimeGrid grid;
};

// Water-filling level L with Σ max(0, L - household_t) = energy; target = max(household, L).
std::vector<double> valley_fill_target(std::span<const double> household_kwh, double energy_kwh);
std::vector<double> scaled_household_target(std::span<const double> household_kwh, double energy_kwh);
std::vector<double> make_target(TargetMode mode, const TargetInputs& inputs);

}  // namespace gridshaper
