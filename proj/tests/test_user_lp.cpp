#include <cmath>
#include <string>

#include "doctest.h"
#include "gridshaper/testing/brute_force.hpp"
#include "gridshaper/user_lp.hpp"
#include "oracles.hpp"

using namespace gridshaper;

namespace {

PevSpec all_day(std::size_t h, double energy, bool v2g, double soc_arrival = 10.0) {
    PevSpec p;
    p.permissible_slots.assign(h, true);
    p.required_energy_kwh = energy;
    p.capacity_kwh = 24.0;
    p.soc_arrival_kwh = soc_arrival;
    p.v2g_enabled = v2g;
    return p;
}

// Instance whose cost vector is exactly `c` (household and target zero).
ShapingInstance with_cost(const PevSpec& pev, std::vector<double> c) {
    const std::size_t h = c.size();
    return ShapingInstance{pev, std::vector<double>(h, 0.0), std::move(c), std::vector<double>(h, 0.0),
                           TimeGrid(h, 1.0)};
}

}  // namespace

TEST_CASE("charge-only vehicle takes the cheapest slot") {
    const auto x = solve_p1(with_cost(all_day(3, 1.8, false), {5, 1, 3}));
    CHECK(x.values == std::vector<double>{0.0, 1.8, 0.0});
}

TEST_CASE("V2G vehicle charges in cheap slots and discharges in the expensive one") {
    const PevSpec pev = all_day(3, 1.8, true, 0.2 * 24.0 + 3.6);
    const auto inst = with_cost(pev, {-4, -4, 10});
    const auto x = solve_p1(inst);
    CHECK(x.values == std::vector<double>{1.8, 1.8, -1.8});

    const auto bf = testing::brute_force_schedule(pev, inst.grid, inst.cost_vector(), 0.0, 9);
    REQUIRE(bf);
    CHECK(bf->step == doctest::Approx(0.45));
    CHECK(p1_objective(inst, x) <= bf->objective + bf->delta);
    CHECK(p1_objective(inst, x) == doctest::Approx(-32.4));
}

TEST_CASE("equal costs resolve to the earliest allocation, deterministically") {
    const auto inst = with_cost(all_day(3, 2.7, false), {2, 2, 2});
    const auto a = solve_p1(inst);
    const auto b = solve_p1(inst);
    CHECK(a == b);
    CHECK(a[0] == 1.8);
    CHECK(a[1] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(a[2] == 0.0);
    // No pointless cycling for a V2G vehicle either.
    auto v2g = inst;
    v2g.pev.v2g_enabled = true;
    const auto c = solve_p1(v2g);
    CHECK(c[0] == 1.8);
    CHECK(c[1] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(c[2] == 0.0);
}

TEST_CASE("zero demand without profitable arbitrage stays idle") {
    CHECK(solve_p1(with_cost(all_day(4, 0.0, false), {3, 1, 2, 5})).values == std::vector<double>(4, 0.0));
    CHECK(solve_p1(with_cost(all_day(4, 0.0, true), {1, 1, 1, 1})).values == std::vector<double>(4, 0.0));
    const auto arb = solve_p1(with_cost(all_day(4, 0.0, true), {1, 5, 1, 1}));
    CHECK(arb.values == std::vector<double>{1.8, -1.8, 0.0, 0.0});
}

TEST_CASE("solve_p1 output always passes the checker and the slot walker") {
    oracle::RandomPev gen(101);
    for (int i = 0; i < 300; ++i) {
        const std::size_t h = static_cast<std::size_t>(gen.integer(1, 24));
        const PevSpec pev = gen.make(h, gen.integer(0, 1) == 1);
        ShapingInstance inst{pev, gen.vec(h, 0, 2), gen.vec(h, 0, 50), gen.vec(h, 0, 60), TimeGrid(h, 1.0)};
        const auto x = solve_p1(inst);
        CHECK(check_feasibility(pev, x, inst.grid).feasible());
        CHECK(oracle::walk_valid(pev, x.values, 1.0));
    }
}

TEST_CASE("argmin is invariant to shifting target and others together") {
    oracle::RandomPev gen(5);
    for (int i = 0; i < 50; ++i) {
        const std::size_t h = 12;
        const PevSpec pev = gen.make(h, i % 2 == 0);
        // Quarter-kWh values keep every sum exact.
        auto q = [&](double lo, double hi) {
            auto v = gen.vec(h, lo, hi);
            for (auto& x : v) x = std::round(x * 4.0) / 4.0;
            return v;
        };
        ShapingInstance a{pev, q(0, 2), q(0, 40), q(0, 40), TimeGrid(h, 1.0)};
        ShapingInstance b = a;
        const double shift = std::round(gen.uniform(-20, 20)) / 4.0;
        for (std::size_t t = 0; t < h; ++t) {
            b.others_aggregate_kwh[t] += shift;
            b.target_kwh[t] += shift;
        }
        REQUIRE(a.cost_vector() == b.cost_vector());
        CHECK(solve_p1(a) == solve_p1(b));
    }
}

TEST_CASE("infeasible instances name the binding constraint") {
    auto inst = with_cost(all_day(2, 4.0, false), {1, 2});
    try {
        solve_p1(inst);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("power window") != std::string::npos);
    }
    inst = with_cost(all_day(2, 3.0, false, 22.0), {1, 2});
    try {
        solve_p1(inst);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("capacity") != std::string::npos);
    }
}

TEST_CASE("altering with lambda = 1 is restricted shaping") {
    const TimeGrid grid(4, 1.0);
    const PevSpec pev = all_day(4, 3.6, true);
    AlteringInstance inst{pev, {0, 0, 0, 0}, {3, 1, 2, 0}, {0, 0, 0, 0}, grid, {1.8}, 1, 1.0};
    const auto x = solve_p2(inst);
    CHECK(x[0] == 1.8);
    const auto restricted = solve_linear_schedule(pev, grid, std::vector<double>{3, 1, 2, 0}, std::vector<double>{1.8});
    CHECK(x == restricted);
}

TEST_CASE("altering at t0 = 0 with lambda = 1 is plain shaping") {
    oracle::RandomPev gen(9);
    for (int i = 0; i < 40; ++i) {
        const std::size_t h = 10;
        const PevSpec pev = gen.make(h, i % 2 == 1);
        ShapingInstance s{pev, gen.vec(h, 0, 2), gen.vec(h, 0, 50), gen.vec(h, 0, 60), TimeGrid(h, 1.0)};
        AlteringInstance a{pev, s.household_load_kwh, s.others_aggregate_kwh, s.target_kwh, s.grid, {}, 0, 1.0};
        CHECK(solve_p2(a) == solve_p1(s));
    }
}

TEST_CASE("altering with lambda = 0 discharges at full rate at t0") {
    const TimeGrid grid(4, 1.0);
    const PevSpec pev = all_day(4, 1.8, true, 10.0);
    AlteringInstance inst{pev, {0, 0, 0, 0}, {0, 5, 1, 1}, {0, 0, 0, 0}, grid, {0.0}, 1, 0.0};
    const auto x = solve_p2(inst);
    CHECK(x[1] == -1.8);
    CHECK(x.total() == doctest::Approx(1.8));
    CHECK(check_feasibility(pev, x, grid).feasible());

    // Floor binding: only 0.7 kWh above the floor at t0.
    PevSpec low = pev;
    low.soc_arrival_kwh = 4.8;
    inst.pev = low;
    inst.frozen_prefix_kwh = {0.7};
    inst.pev.required_energy_kwh = 1.8;
    const auto y = solve_p2(inst);
    CHECK(y[1] == doctest::Approx(-0.7));
}

TEST_CASE("altering on a three-slot instance agrees with the lattice oracle") {
    const TimeGrid grid(3, 1.0);
    PevSpec pev = all_day(3, 1.8, true, 12.0);
    AlteringInstance inst{pev, {0, 0, 0}, {7, 2, 1}, {0, 0, 0}, grid, {0.0}, 1, 0.5, 1.0};
    const auto x = solve_p2(inst);
    const auto bf = testing::brute_force_schedule(pev, grid, inst.cost_vector(), 0.0, 9, inst.frozen_prefix_kwh);
    REQUIRE(bf);
    CHECK(p2_objective(inst, x) <= bf->objective + bf->delta);
    CHECK(x[0] == 0.0);
    CHECK(x.values == std::vector<double>{0.0, 0.0, 1.8});
}

TEST_CASE("altering keeps the frozen prefix bit-exact") {
    oracle::RandomPev gen(21);
    for (int i = 0; i < 50; ++i) {
        const std::size_t h = 8;
        const PevSpec pev = gen.make(h, true);
        ShapingInstance s{pev, gen.vec(h, 0, 2), gen.vec(h, 0, 50), gen.vec(h, 0, 60), TimeGrid(h, 1.0)};
        const auto shaped = solve_p1(s);
        const std::size_t t0 = static_cast<std::size_t>(gen.integer(1, 7));
        AlteringInstance a{pev, s.household_load_kwh, s.others_aggregate_kwh, s.target_kwh, s.grid,
                           std::vector<double>(shaped.values.begin(), shaped.values.begin() + t0), t0,
                           gen.uniform(0, 1)};
        const auto x = solve_p2(a);
        for (std::size_t t = 0; t < t0; ++t) CHECK(x[t] == shaped[t]);
        CHECK(check_feasibility(pev, x, s.grid).feasible());
    }
}

TEST_CASE("altering argument errors") {
    const TimeGrid grid(3, 1.0);
    AlteringInstance inst{all_day(3, 1.8, true), {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, grid, {0, 0, 0}, 3, 0.5};
    CHECK_THROWS_AS(solve_p2(inst), DimensionError);
    inst.t0 = 1;
    CHECK_THROWS_AS(solve_p2(inst), DimensionError);
    inst.frozen_prefix_kwh = {0.0};
    inst.lambda = 1.5;
    CHECK_THROWS(solve_p2(inst));
}

TEST_CASE("reported altering objective re-adds the dropped constant") {
    const TimeGrid grid(3, 1.0);
    AlteringInstance inst{all_day(3, 1.8, true), {0.5, 0.5, 0.5}, {2, 3, 4}, {1, 1, 1}, grid, {0.0}, 1, 0.5};
    const auto x = solve_p2(inst);
    const double expected = p2_objective(inst, x) + inst.t0_weight() * (3.0 + 0.5);
    CHECK(p2_reported_objective(inst, x) == doctest::Approx(expected));
}
