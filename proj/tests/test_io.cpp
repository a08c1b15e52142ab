#include <bit>
#include <fstream>
#include <functional>
#include <random>

#include "doctest.h"
#include "gridshaper/io.hpp"
#include "oracles.hpp"

using namespace gridshaper;

namespace {

std::filesystem::path write_prices(const std::filesystem::path& dir, const std::string& name,
                                   const std::string& body) {
    const auto p = dir / name;
    std::ofstream(p) << body;
    return p;
}

std::string hours_except(int skip, int dup = -1) {
    std::string body = "hour,price_usd_per_mwh\n";
    for (int h = 0; h < 24; ++h) {
        if (h == skip) continue;
        body += std::to_string(h) + "," + std::to_string(30 + h) + "\n";
        if (h == dup) body += std::to_string(h) + ",1\n";
    }
    return body;
}

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("price files") {
    const auto dir = oracle::scratch_dir("prices");
    const auto good = load_prices_csv(write_prices(dir, "good.csv", hours_except(-1)), 24);
    REQUIRE(good.size() == 24);
    CHECK(good[13] == 43.0);

    const auto fixture = load_prices_csv(std::filesystem::path(GRIDSHAPER_FIXTURE_DIR) / "rt_price.csv", 24);
    CHECK(fixture.size() == 24);

    const auto missing = write_prices(dir, "missing.csv", hours_except(13));
    CHECK(error_of([&] { load_prices_csv(missing, 24); }).find("missing hour 13") != std::string::npos);
    const auto dup = write_prices(dir, "dup.csv", hours_except(-1, 5));
    CHECK(error_of([&] { load_prices_csv(dup, 24); }).find("duplicate hour 5") != std::string::npos);
    const auto bad = write_prices(dir, "bad.csv", "hour,price_usd_per_mwh\n0,abc\n");
    CHECK_THROWS_AS(load_prices_csv(bad, 1), CsvError);
    const auto extra = write_prices(dir, "extra.csv", "hour,price_usd_per_mwh,note\n0,1,x\n");
    CHECK_THROWS_AS(load_prices_csv(extra, 1), CsvError);
    CHECK_THROWS_AS(load_prices_csv(write_prices(dir, "long.csv", hours_except(-1)), 12), CsvError);
    CHECK_THROWS_AS(load_prices_csv(dir / "absent.csv"), CsvError);
}

TEST_CASE("profiles round-trip bit-exactly") {
    const auto dir = oracle::scratch_dir("profile");
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::vector<double> v(24);
    for (auto& x : v) x = u(rng);
    v[0] = 0.1;
    v[1] = 1e-300;
    v[2] = -0.0;
    write_profile_csv(dir / "p.csv", v);
    const auto back = load_profile_csv(dir / "p.csv", 24);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::bit_cast<std::uint64_t>(back[i]) == std::bit_cast<std::uint64_t>(v[i]));
}

TEST_CASE("fleet and schedule files round-trip") {
    const auto dir = oracle::scratch_dir("fleet");
    const TimeGrid grid(4, 1.0);
    std::vector<UserProfile> users(2);
    users[0].pev = {3, {true, false, true, true}, 2.7, 1.8, 24.0, 20.1, true, 0.2};
    users[0].household_load_kwh = {0.1, 0.2, 0.3, 0.4};
    users[1].pev = {8, {false, true, true, false}, 0.9, 3.3, 60.0, 30.0, false, 0.25};
    users[1].household_load_kwh = {1.0 / 3.0, 0.0, 2.5, 1.25};
    write_fleet(dir / "fleet.csv", dir / "household.csv", users);
    const auto back = read_fleet(dir / "fleet.csv", dir / "household.csv", grid);
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].pev.user_id == users[i].pev.user_id);
        CHECK(back[i].pev.permissible_slots == users[i].pev.permissible_slots);
        CHECK(back[i].pev.required_energy_kwh == users[i].pev.required_energy_kwh);
        CHECK(back[i].pev.max_power_kw == users[i].pev.max_power_kw);
        CHECK(back[i].pev.capacity_kwh == users[i].pev.capacity_kwh);
        CHECK(back[i].pev.soc_arrival_kwh == users[i].pev.soc_arrival_kwh);
        CHECK(back[i].pev.v2g_enabled == users[i].pev.v2g_enabled);
        CHECK(back[i].pev.min_soc_fraction == users[i].pev.min_soc_fraction);
        CHECK(back[i].household_load_kwh == users[i].household_load_kwh);
    }

    std::map<UserId, ScheduleVector> s{{3, ScheduleVector({1.8, 0.0, -0.7, 1.6})}, {8, ScheduleVector({0, 0.45, 0.45, 0})}};
    write_schedules(dir / "s.csv", s);
    CHECK(read_schedules(dir / "s.csv", grid) == s);
}

TEST_CASE("distribution files") {
    const auto dir = oracle::scratch_dir("dist");
    std::ofstream(dir / "ok.csv") << "value,probability\n1,0.5\n2,0.5\n";
    const auto d = load_distribution_csv(dir / "ok.csv");
    CHECK(d.values == std::vector<double>{1.0, 2.0});
    std::ofstream(dir / "bad.csv") << "value,probability\n1,0.5\n2,0.6\n";
    CHECK_THROWS_AS(load_distribution_csv(dir / "bad.csv"), CsvError);
}
