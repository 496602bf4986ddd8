#pragma once

#include "intersep/fields.hpp"
#include "intersep/model.hpp"

namespace intersep::taylor {

inline constexpr double kResidualThreshold = 1e-8;
inline constexpr int kResidualGrid = 101;  // samples per axis for field maxima

/// Short-time velocity model v(x,t) = base(x) + t * rate(x): the initial
/// velocity plus t times its initial time derivative.
struct FirstOrderField {
    fields::VectorField base;  // velocity at t = 0
    fields::VectorField rate;  // time derivative of velocity at t = 0

    fields::Vec2 eval(fields::Vec2 x, double t) const {
        fields::Vec2 b = base.eval(x);
        fields::Vec2 r = rate.eval(x);
        return {b.x1 + t * r.x1, b.x2 + t * r.x2};
    }

    /// The same field with t frozen, as a closed form over (x1, x2).
    fields::VectorField at_time(double t) const {
        return {base.c1 + fields::ScalarExpr(t) * rate.c1,
                base.c2 + fields::ScalarExpr(t) * rate.c2};
    }
};

/// Initial velocity time-derivative in scale-free variables:
///   lap(psi) - (psi . grad) psi - K grad(T0) + F0.
fields::VectorField initial_rate(const model::DimensionlessScenario& ds);

/// Same quantity in physical units:
///   mu lap(psi) - (psi . grad) psi - beta grad(T0) + F0.
fields::VectorField initial_rate_dimensional(const model::Scenario& s);

FirstOrderField first_order_field(const model::DimensionlessScenario& ds);

/// Initial-temperature time derivative used for boundary forcing:
///   (kappa/mu) lap(T0) - (psi . grad) T0 + Q.
fields::ScalarExpr temperature_rate(const model::DimensionlessScenario& ds);

/// Structural residuals of the short-time model.
///
/// divergence:    div psi  (incompressibility of the initial velocity)
/// compatibility: d(psi1)/dx2 * d(psi2)/dx1 + (d(psi1)/dx1)^2
///                  + (K/2) lap(T0) - (1/2) div(F0),
/// whose vanishing keeps the first-order field divergence-free for all t.
struct AssumptionResiduals {
    fields::ScalarExpr divergence;
    fields::ScalarExpr compatibility;
    double max_abs_divergence = 0.0;    // max over the window sample grid
    double max_abs_compatibility = 0.0;

    bool within(double threshold = kResidualThreshold) const {
        return max_abs_divergence <= threshold && max_abs_compatibility <= threshold;
    }
};

AssumptionResiduals assumption_residuals(const model::DimensionlessScenario& ds);

/// Max over the window sample grid of |div v(.,t) + 2 t compatibility|.
/// Zero up to rounding whenever div psi vanishes: the divergence of the
/// first-order field is exactly -2 t times the compatibility residual.
double divergence_identity_gap(const model::DimensionlessScenario& ds, double t);

/// Rate at which the first-order field crosses the degenerate direction:
/// rate(x) . e2.
double transversality(const FirstOrderField& fof, fields::Vec2 x, fields::Vec2 e2);

/// Max of |e| over an n-by-n sample grid covering the window.
double max_abs_on_grid(const fields::ScalarExpr& e, const fields::Window& w,
                       int n = kResidualGrid);

}  // namespace intersep::taylor
