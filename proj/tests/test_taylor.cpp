#include <doctest.h>

#include <random>

#include "intersep/taylor.hpp"
#include "oracles.hpp"

using namespace intersep;
using fields::ScalarExpr;
using fields::Vec2;
using fields::VectorField;
using fields::parse_expression;
using model::DimensionlessScenario;

TEST_CASE("first-order rate of the canonical family is (C4 x2, 2 C1 - K C3)") {
    DimensionlessScenario ds = oracles::canonical_scenario(100.0);
    VectorField rate = taylor::initial_rate(ds);
    CHECK(rate.c1.eval({0.0, 0.5}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rate.c1.eval({3.0, -2.0}) == doctest::Approx(-2.0).epsilon(1e-14));
    double c = 0.0;
    REQUIRE(rate.c2.is_constant(&c));
    CHECK(c == doctest::Approx(-98.0).epsilon(1e-14));

    DimensionlessScenario ds2 = oracles::canonical_scenario(20.0, 1.0, 1.0, 1.0, 2.0);
    VectorField rate2 = taylor::initial_rate(ds2);
    CHECK(rate2.c1.eval({0.0, 1.0}) == doctest::Approx(2.0).epsilon(1e-14));
    REQUIRE(rate2.c2.is_constant(&c));
    CHECK(c == doctest::Approx(-18.0).epsilon(1e-14));
}

TEST_CASE("rest state and shear flow have zero first-order rate") {
    DimensionlessScenario rest;
    rest.initial_velocity = {ScalarExpr(0.0), ScalarExpr(0.0)};
    rest.initial_temperature = ScalarExpr(4.0);
    rest.initial_force = {ScalarExpr(0.0), ScalarExpr(0.0)};
    rest.heat_source = ScalarExpr(0.0);
    rest.thermal_forcing = 100.0;
    rest.inverse_prandtl = 1.0;
    rest.window = {-2.0, 2.0, -2.0, 2.0};
    VectorField r = taylor::initial_rate(rest);
    for (double x : {-1.0, 0.0, 2.0}) {
        CHECK(r.c1.eval({x, x}) == 0.0);
        CHECK(r.c2.eval({x, x}) == 0.0);
    }

    DimensionlessScenario shear = rest;
    shear.initial_velocity = {parse_expression("x2"), ScalarExpr(0.0)};
    shear.thermal_forcing = 7.0;
    VectorField r2 = taylor::initial_rate(shear);
    for (double x : {-1.0, 0.5, 2.0}) {
        CHECK(r2.c1.eval({x, -x}) == 0.0);
        CHECK(r2.c2.eval({x, -x}) == 0.0);
    }
}

TEST_CASE("dimensional rate applies viscosity and expansion weights") {
    model::Scenario s;
    s.initial_velocity = {ScalarExpr(0.0), parse_expression("x1^2")};
    s.initial_temperature = parse_expression("x2");
    s.initial_force = {ScalarExpr(1.0), ScalarExpr(0.0)};
    s.heat_source = ScalarExpr(0.0);
    s.viscosity = 2.0;
    s.diffusivity = 1.0;
    s.expansion = 3.0;
    s.offset = 0.0;
    s.length_scale = 1.0;
    s.temperature_scale = 1.0;
    s.window = {-2.0, 2.0, -2.0, 2.0};
    VectorField r = taylor::initial_rate_dimensional(s);
    // mu*lap(psi) = (0,4); advection vanishes; beta*grad T = (0,3); F = (1,0)
    CHECK(r.c1.eval({0.7, -0.3}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.c2.eval({0.7, -0.3}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("short-time field is linear in t and matches the closed form at the origin") {
    DimensionlessScenario ds = oracles::canonical_scenario(100.0);
    taylor::FirstOrderField fof = taylor::first_order_field(ds);

    Vec2 v = fof.eval({0.0, 0.0}, 0.01);
    CHECK(v.x1 == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v.x2 == doctest::Approx(1.0 + 0.01 * (-98.0)).epsilon(1e-14));

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> pt(-2.0, 2.0), tt(0.001, 0.2);
    for (int i = 0; i < 50; ++i) {
        Vec2 x{pt(rng), pt(rng)};
        double t = tt(rng);
        Vec2 a = fof.eval(x, 2 * t);
        Vec2 b = fof.eval(x, t);
        Vec2 u1{fof.rate.c1.eval(x), fof.rate.c2.eval(x)};
        CHECK(oracles::close(a.x1 - b.x1, t * u1.x1, 1e-13));
        CHECK(oracles::close(a.x2 - b.x2, t * u1.x2, 1e-13));
    }

    // the frozen-time view agrees with direct evaluation
    VectorField vt = fof.at_time(0.03);
    for (int i = 0; i < 10; ++i) {
        Vec2 x{pt(rng), pt(rng)};
        Vec2 direct = fof.eval(x, 0.03);
        CHECK(oracles::close(vt.c1.eval(x), direct.x1, 1e-14));
        CHECK(oracles::close(vt.c2.eval(x), direct.x2, 1e-14));
    }
}

TEST_CASE("temperature rate combines diffusion, advection, and sources") {
    // canonical family: lap T0 = 0, advection = C3 (1 + C1 x1^2), Q = 0
    DimensionlessScenario ds = oracles::canonical_scenario(100.0);
    ScalarExpr t1 = taylor::temperature_rate(ds);
    CHECK(t1.eval({0.0, 0.0}) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(t1.eval({1.0, 5.0}) == doctest::Approx(-2.0).epsilon(1e-14));

    // pure diffusion: psi = 0, T0 = x2^2, invPr = 2 -> rate = 4
    DimensionlessScenario diff = ds;
    diff.initial_velocity = {ScalarExpr(0.0), ScalarExpr(0.0)};
    diff.initial_temperature = parse_expression("x2^2");
    diff.inverse_prandtl = 2.0;
    ScalarExpr t2 = taylor::temperature_rate(diff);
    CHECK(t2.eval({0.3, -1.0}) == doctest::Approx(4.0).epsilon(1e-14));

    // heat source shifts the rate uniformly
    DimensionlessScenario heated = diff;
    heated.heat_source = ScalarExpr(5.0);
    ScalarExpr t3 = taylor::temperature_rate(heated);
    CHECK(t3.eval({0.3, -1.0}) == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("residual diagnostics flag non-solenoidal data and pass the canonical family") {
    DimensionlessScenario ds = oracles::canonical_scenario(100.0);
    taylor::AssumptionResiduals res = taylor::assumption_residuals(ds);
    CHECK(res.max_abs_divergence <= 1e-12);
    CHECK(res.max_abs_compatibility <= 1e-12);
    CHECK(res.within(taylor::kResidualThreshold));

    DimensionlessScenario bad = ds;
    bad.initial_velocity = {parse_expression("x1"), ScalarExpr(0.0)};
    taylor::AssumptionResiduals res2 = taylor::assumption_residuals(bad);
    CHECK(res2.max_abs_divergence == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(res2.within(taylor::kResidualThreshold));

    DimensionlessScenario shear = ds;
    shear.initial_velocity = {parse_expression("x2"), ScalarExpr(0.0)};
    shear.initial_temperature = ScalarExpr(0.0);
    shear.initial_force = {ScalarExpr(0.0), ScalarExpr(0.0)};
    taylor::AssumptionResiduals res3 = taylor::assumption_residuals(shear);
    CHECK(res3.max_abs_compatibility <= 1e-13);
}

TEST_CASE("divergence of the short-time field is minus twice t times the compatibility residual") {
    DimensionlessScenario ds = oracles::canonical_scenario(100.0);
    CHECK(taylor::divergence_identity_gap(ds, 0.02) <= 1e-12);

    // constant compatibility residual c = K: div v = -2 t c
    DimensionlessScenario cc = ds;
    cc.initial_velocity = {ScalarExpr(0.0), parse_expression("x1^2")};
    cc.initial_temperature = parse_expression("x2^2");
    cc.initial_force = {ScalarExpr(0.0), ScalarExpr(0.0)};
    cc.thermal_forcing = 3.0;
    taylor::AssumptionResiduals res = taylor::assumption_residuals(cc);
    CHECK(res.max_abs_compatibility == doctest::Approx(3.0).epsilon(1e-12));
    taylor::FirstOrderField fof = taylor::first_order_field(cc);
    ScalarExpr div_v = fields::divergence(fof.at_time(0.1));
    CHECK(div_v.eval({0.4, -0.7}) == doctest::Approx(-0.2 * 3.0).epsilon(1e-12));
    CHECK(taylor::divergence_identity_gap(cc, 0.1) <= 1e-12);

    // random solenoidal scenarios satisfy the identity to rounding
    std::mt19937 rng(23);
    for (int i = 0; i < 5; ++i) {
        DimensionlessScenario r = oracles::random_solenoidal_scenario(rng);
        CHECK(taylor::divergence_identity_gap(r, 0.05) <= 1e-10);
    }
}

TEST_CASE("transversality is the rate component along the chosen direction") {
    DimensionlessScenario ds = oracles::canonical_scenario(100.0);
    taylor::FirstOrderField fof = taylor::first_order_field(ds);
    CHECK(taylor::transversality(fof, {0.0, 0.0}, {0.0, 1.0}) ==
          doctest::Approx(-98.0).epsilon(1e-14));
    CHECK(taylor::transversality(fof, {0.0, 0.0}, {1.0, 0.0}) ==
          doctest::Approx(0.0).epsilon(1e-14));

    DimensionlessScenario rest = ds;
    rest.initial_velocity = {ScalarExpr(0.0), ScalarExpr(0.0)};
    rest.initial_temperature = ScalarExpr(1.0);
    rest.initial_force = {ScalarExpr(0.0), ScalarExpr(0.0)};
    taylor::FirstOrderField still = taylor::first_order_field(rest);
    CHECK(taylor::transversality(still, {0.3, 0.3}, {0.0, 1.0}) == 0.0);
}

TEST_CASE("grid maximum of an expression magnitude") {
    fields::Window w{-2.0, 2.0, -2.0, 2.0};
    CHECK(taylor::max_abs_on_grid(parse_expression("x1*x2"), w) ==
          doctest::Approx(4.0).epsilon(1e-14));
    CHECK(taylor::max_abs_on_grid(ScalarExpr(0.0), w) == 0.0);
}
