#pragma once

// Independent numerical oracles shared by the unit and acceptance suites.
// Everything here is deliberately simple-minded (finite differences,
// brute-force angle sums, direct formula evaluation) so that it cannot
// share a bug with the library code it checks.

#include <cmath>
#include <random>
#include <vector>

#include "intersep/fields.hpp"
#include "intersep/model.hpp"

namespace oracles {

using intersep::fields::ScalarExpr;
using intersep::fields::Vec2;
using intersep::fields::VectorField;
using intersep::fields::Window;

inline double fd_partial(const ScalarExpr& e, intersep::fields::Axis axis, Vec2 p,
                         double h = 1e-5) {
    Vec2 lo = p, hi = p;
    if (axis == intersep::fields::Axis::X1) {
        lo.x1 -= h;
        hi.x1 += h;
    } else {
        lo.x2 -= h;
        hi.x2 += h;
    }
    return (e.eval(hi) - e.eval(lo)) / (2.0 * h);
}

/// Brute-force winding number: n equally spaced samples on the circle,
/// angle increment per segment from the cross/dot formula, summed and
/// divided by 2 pi. Returns the unrounded sum; callers round.
template <typename FieldFn>
double brute_winding(FieldFn&& field, Vec2 center, double radius, int n = 4096) {
    double total = 0.0;
    Vec2 prev = field(Vec2{center.x1 + radius, center.x2});
    for (int k = 1; k <= n; ++k) {
        double a = 2.0 * M_PI * k / n;
        Vec2 cur = field(Vec2{center.x1 + radius * std::cos(a),
                              center.x2 + radius * std::sin(a)});
        total += std::atan2(intersep::fields::cross(prev, cur),
                            intersep::fields::dot(prev, cur));
        prev = cur;
    }
    return total / (2.0 * M_PI);
}

/// Random polynomial of total degree <= deg with coefficients in [-1, 1].
inline ScalarExpr random_polynomial(std::mt19937& rng, int deg = 3) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    ScalarExpr p(0.0);
    for (int i = 0; i <= deg; ++i)
        for (int j = 0; i + j <= deg; ++j)
            p = p + ScalarExpr(coef(rng)) *
                        pow_i(intersep::fields::var_x1(), i) *
                        pow_i(intersep::fields::var_x2(), j);
    return p;
}

/// Random scenario whose initial velocity is divergence-free by
/// construction (a rotated gradient of a random stream function), with
/// arbitrary polynomial temperature and force fields.
inline intersep::model::DimensionlessScenario random_solenoidal_scenario(
    std::mt19937& rng, const Window& w = {-2.0, 2.0, -2.0, 2.0}) {
    using intersep::fields::Axis;
    std::uniform_real_distribution<double> kdist(0.5, 10.0);
    ScalarExpr stream = random_polynomial(rng);
    intersep::model::DimensionlessScenario ds;
    ds.initial_velocity = {-stream.partial(Axis::X2), stream.partial(Axis::X1)};
    ds.initial_temperature = random_polynomial(rng);
    ds.initial_force = {random_polynomial(rng, 2), random_polynomial(rng, 2)};
    ds.heat_source = random_polynomial(rng, 2);
    ds.thermal_forcing = kdist(rng);
    ds.inverse_prandtl = 1.0;
    ds.window = w;
    return ds;
}

/// The canonical separation family in scale-free form:
///   psi = (0, 1 + C1 x1^2), T0 = C2 + C3 x2, F0 = (C4 x2, 0).
inline intersep::model::DimensionlessScenario canonical_scenario(
    double K, double C1 = 1.0, double C2 = 1.0, double C3 = 1.0, double C4 = 1.0) {
    using intersep::fields::var_x1;
    using intersep::fields::var_x2;
    intersep::model::DimensionlessScenario ds;
    ds.initial_velocity = {ScalarExpr(0.0),
                           ScalarExpr(1.0) + ScalarExpr(C1) * pow_i(var_x1(), 2)};
    ds.initial_temperature = ScalarExpr(C2) + ScalarExpr(C3) * var_x2();
    ds.initial_force = {ScalarExpr(C4) * var_x2(), ScalarExpr(0.0)};
    ds.heat_source = ScalarExpr(0.0);
    ds.thermal_forcing = K;
    ds.inverse_prandtl = 1.0;
    ds.window = {-2.0, 2.0, -2.0, 2.0};
    return ds;
}

/// Mixed absolute/relative comparison used for round-trip checks.
inline bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * (1.0 + std::abs(a));
}

}  // namespace oracles
