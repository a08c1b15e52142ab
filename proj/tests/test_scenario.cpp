#include "doctest.h"
#include "gridshaper/io.hpp"
#include "gridshaper/scenario.hpp"
#include "oracles.hpp"

using namespace gridshaper;

namespace {

FleetConfig point_config(double arrival, double departure, double hours) {
    FleetConfig c;
    c.n_users = 5;
    c.arrival_dist = {{arrival}, {1.0}};
    c.departure_dist = {{departure}, {1.0}};
    c.charging_hours_dist = {{hours}, {1.0}};
    c.household_base_kwh.assign(24, 0.5);
    c.seed = 1;
    return c;
}

FleetConfig fixture_config() {
    const std::filesystem::path dir = GRIDSHAPER_FIXTURE_DIR;
    FleetConfig c;
    c.n_users = 100;
    c.v2g_fraction = 0.5;
    c.arrival_dist = load_distribution_csv(dir / "arrival.csv");
    c.departure_dist = load_distribution_csv(dir / "departure.csv");
    c.charging_hours_dist = load_distribution_csv(dir / "charging_hours.csv");
    c.household_base_kwh = load_profile_csv(dir / "household.csv", 24);
    c.household_scale_spread = 0.25;
    c.seed = 42;
    return c;
}

}  // namespace

TEST_CASE("energy need and arrival SOC follow from the charging hours") {
    const auto users = sample_fleet(point_config(18, 7, 4));
    for (const auto& u : users) {
        CHECK(u.pev.required_energy_kwh == doctest::Approx(7.2));
        CHECK(u.pev.soc_arrival_kwh == doctest::Approx(16.8));
        CHECK(u.pev.connected_slot_count() == 13);
        CHECK(u.pev.permissible_slots[23]);
        CHECK(u.pev.permissible_slots[0]);
        CHECK_FALSE(u.pev.permissible_slots[7]);
    }
    const auto idle = sample_fleet(point_config(18, 7, 0));
    CHECK(idle[0].pev.required_energy_kwh == 0.0);
    CHECK(idle[0].pev.soc_arrival_kwh == 24.0);
}

TEST_CASE("same seed gives the same fleet, field for field") {
    const auto a = sample_fleet(fixture_config());
    const auto b = sample_fleet(fixture_config());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pev.user_id == b[i].pev.user_id);
        CHECK(a[i].pev.permissible_slots == b[i].pev.permissible_slots);
        CHECK(a[i].pev.required_energy_kwh == b[i].pev.required_energy_kwh);
        CHECK(a[i].pev.soc_arrival_kwh == b[i].pev.soc_arrival_kwh);
        CHECK(a[i].pev.v2g_enabled == b[i].pev.v2g_enabled);
        CHECK(a[i].household_load_kwh == b[i].household_load_kwh);
    }
    auto other = fixture_config();
    other.seed = 43;
    const auto c = sample_fleet(other);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].pev.permissible_slots != c[i].pev.permissible_slots;
    CHECK(differs);
}

TEST_CASE("sampled users satisfy vehicle invariants") {
    const auto cfg = fixture_config();
    for (const auto& u : sample_fleet(cfg)) {
        CHECK_NOTHROW(u.validate(cfg.grid));
        CHECK(u.pev.soc_arrival_kwh >= 0.2 * u.pev.capacity_kwh);
    }
}

TEST_CASE("impossible draws exhaust the rejection limit") {
    CHECK_THROWS(sample_fleet(point_config(10, 12, 6)));
    auto bad = point_config(10, 12, 1);
    bad.charging_hours_dist = {{1.0, 2.0}, {0.5, 0.6}};
    CHECK_THROWS(sample_fleet(bad));
}

TEST_CASE("inverse CDF") {
    const DiscreteDistribution d{{1.0, 2.0, 3.0}, {0.25, 0.5, 0.25}};
    CHECK(d.quantile(0.0) == 1.0);
    CHECK(d.quantile(0.2499) == 1.0);
    CHECK(d.quantile(0.25) == 2.0);
    CHECK(d.quantile(0.9999999) == 3.0);
}

TEST_CASE("availability histogram") {
    CHECK(availability_histogram(std::span<const UserProfile>{}, 24) == std::vector<std::size_t>(24, 0));

    std::vector<UserProfile> always(7);
    for (auto& u : always) u.pev.permissible_slots.assign(24, true);
    CHECK(availability_histogram(always, 24) == std::vector<std::size_t>(24, 7));

    const auto fleet = sample_fleet(fixture_config());
    const auto hist = availability_histogram(fleet, 24);
    for (auto n : hist) CHECK(n <= fleet.size());
    CHECK(hist[2] > hist[13]);
    CHECK(hist[23] > hist[13]);
}

TEST_CASE("valley filling") {
    const auto flat = valley_fill_target(std::vector<double>(4, 3.0), 2.0);
    for (double v : flat) CHECK(v == doctest::Approx(3.5));
    const auto t = valley_fill_target(std::vector<double>{2, 1, 1, 2}, 2.0);
    for (double v : t) CHECK(v == doctest::Approx(2.0).epsilon(1e-9));

    const auto fleet = sample_fleet(fixture_config());
    const auto house = household_total(fleet, 24);
    const double energy = total_required_energy(fleet);
    const auto target = make_target(TargetMode::ValleyFill, {house, energy, {}, TimeGrid{}});
    double added = 0.0;
    for (std::size_t i = 0; i < 24; ++i) added += target[i] - house[i];
    CHECK(std::abs(added - energy) <= 1e-3);
}

TEST_CASE("scaled household and external targets") {
    const auto s = scaled_household_target(std::vector<double>{1, 3}, 4.0);
    CHECK(s == std::vector<double>{2.0, 6.0});
    const auto dir = oracle::scratch_dir("target");
    std::vector<double> profile(24);
    for (std::size_t t = 0; t < 24; ++t) profile[t] = 100.0 + 0.1 * static_cast<double>(t);
    write_profile_csv(dir / "target.csv", profile);
    CHECK(make_target(TargetMode::ExternalCsv, {{}, 0.0, dir / "target.csv", TimeGrid{}}) == profile);
    CHECK_THROWS(make_target(TargetMode::ExternalCsv, {{}, 0.0, dir / "target.csv", TimeGrid(12, 1.0)}));
}
