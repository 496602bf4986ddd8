#include "intersep/taylor.hpp"

#include <algorithm>
#include <cmath>

namespace intersep::taylor {

using fields::ScalarExpr;
using fields::Vec2;
using fields::VectorField;

VectorField initial_rate(const model::DimensionlessScenario& ds) {
    const VectorField& psi = ds.initial_velocity;
    VectorField adv = fields::advect(psi, psi);
    VectorField gT = fields::grad(ds.initial_temperature);
    ScalarExpr K(ds.thermal_forcing);
    return {fields::laplacian(psi.c1) - adv.c1 - K * gT.c1 + ds.initial_force.c1,
            fields::laplacian(psi.c2) - adv.c2 - K * gT.c2 + ds.initial_force.c2};
}

VectorField initial_rate_dimensional(const model::Scenario& s) {
    const VectorField& u = s.initial_velocity;
    VectorField adv = fields::advect(u, u);
    VectorField gT = fields::grad(s.initial_temperature);
    ScalarExpr mu(s.viscosity);
    ScalarExpr beta(s.expansion);
    return {mu * fields::laplacian(u.c1) - adv.c1 - beta * gT.c1 + s.initial_force.c1,
            mu * fields::laplacian(u.c2) - adv.c2 - beta * gT.c2 + s.initial_force.c2};
}

FirstOrderField first_order_field(const model::DimensionlessScenario& ds) {
    return {ds.initial_velocity, initial_rate(ds)};
}

ScalarExpr temperature_rate(const model::DimensionlessScenario& ds) {
    return ScalarExpr(ds.inverse_prandtl) * fields::laplacian(ds.initial_temperature) -
           fields::advect_scalar(ds.initial_velocity, ds.initial_temperature) +
           ds.heat_source;
}

namespace {

ScalarExpr compatibility_residual(const model::DimensionlessScenario& ds) {
    fields::JacobianExpr J = fields::jacobian(ds.initial_velocity);
    return J.d12 * J.d21 + J.d11 * J.d11 +
           ScalarExpr(ds.thermal_forcing / 2.0) * fields::laplacian(ds.initial_temperature) -
           ScalarExpr(0.5) * fields::divergence(ds.initial_force);
}

}  // namespace

AssumptionResiduals assumption_residuals(const model::DimensionlessScenario& ds) {
    AssumptionResiduals r;
    r.divergence = fields::divergence(ds.initial_velocity);
    r.compatibility = compatibility_residual(ds);
    r.max_abs_divergence = max_abs_on_grid(r.divergence, ds.window);
    r.max_abs_compatibility = max_abs_on_grid(r.compatibility, ds.window);
    return r;
}

double divergence_identity_gap(const model::DimensionlessScenario& ds, double t) {
    FirstOrderField fof = first_order_field(ds);
    ScalarExpr gap = fields::divergence(fof.at_time(t)) +
                     ScalarExpr(2.0 * t) * compatibility_residual(ds);
    return max_abs_on_grid(gap, ds.window);
}

double transversality(const FirstOrderField& fof, Vec2 x, Vec2 e2) {
    return fields::dot(fof.rate.eval(x), e2);
}

double max_abs_on_grid(const ScalarExpr& e, const fields::Window& w, int n) {
    if (n < 2) n = 2;
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
        double x2 = w.ymin + j * (w.height() / (n - 1));
        for (int i = 0; i < n; ++i) {
            double x1 = w.xmin + i * (w.width() / (n - 1));
            best = std::max(best, std::abs(e.eval({x1, x2})));
        }
    }
    return best;
}

}  // namespace intersep::taylor
