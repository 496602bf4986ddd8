#include "intersep/model.hpp"

#include <stdexcept>

namespace intersep::model {

using fields::ScalarExpr;
using fields::Vec2;
using fields::VectorField;

double pressure_from_state(double rho, double T, const FluidKind& fluid) {
    if (!(rho > 0.0)) {
        throw std::domain_error("pressure_from_state: density must be positive, got rho = " +
                                std::to_string(rho));
    }
    return rho * (fluid.beta * T + fluid.delta);
}

VectorField pressure_gradient_decomposition(const ScalarExpr& T, const ScalarExpr& phi,
                                            double beta, double delta) {
    VectorField gphi = fields::grad(phi);
    VectorField gT = fields::grad(T);
    ScalarExpr b(beta);
    ScalarExpr d(delta);
    return {ScalarExpr(0.0) - b * T * gphi.c1 - b * gT.c1 - d * gphi.c1,
            ScalarExpr(0.0) - b * T * gphi.c2 - b * gT.c2 - d * gphi.c2};
}

ScalarExpr phi_transport_residual(const VectorField& u, const ScalarExpr& phi,
                                  const ScalarExpr& phi_t) {
    return phi_t + fields::advect_scalar(u, phi) + fields::divergence(u);
}

void Scenario::validate() const {
    if (!(viscosity > 0.0)) {
        throw std::invalid_argument("scenario: viscosity (mu) must be positive, got " +
                                    std::to_string(viscosity));
    }
    if (!(length_scale > 0.0)) {
        throw std::invalid_argument("scenario: length_scale (L) must be positive, got " +
                                    std::to_string(length_scale));
    }
    if (!(temperature_scale > 0.0)) {
        throw std::invalid_argument("scenario: temperature_scale (theta) must be positive, got " +
                                    std::to_string(temperature_scale));
    }
    if (!(diffusivity >= 0.0)) {
        throw std::invalid_argument("scenario: diffusivity (kappa) must be nonnegative, got " +
                                    std::to_string(diffusivity));
    }
    if (!window.valid()) {
        throw std::invalid_argument("scenario: window is empty (xmin < xmax and ymin < ymax required)");
    }
}

double thermal_forcing_constant(double length_scale, double expansion,
                                double temperature_scale, double viscosity) {
    return length_scale * length_scale * expansion * temperature_scale /
           (viscosity * viscosity);
}

DimensionlessScenario nondimensionalize(const Scenario& s) {
    s.validate();
    const double L = s.length_scale;
    const double mu = s.viscosity;
    const double theta = s.temperature_scale;

    // x = L x': sample every field at L x', then strip its own unit scale.
    const double u_factor = L / mu;           // u' = (L/mu) u
    const double T_factor = 1.0 / theta;      // T' = T / theta
    const double f_factor = L * L * L / (mu * mu);   // F' = (L^3/mu^2) F
    const double q_factor = L * L / (mu * theta);    // Q' = (L^2/(mu theta)) Q

    DimensionlessScenario ds;
    ds.initial_velocity = {
        ScalarExpr(u_factor) * fields::scale_coordinates(s.initial_velocity.c1, L),
        ScalarExpr(u_factor) * fields::scale_coordinates(s.initial_velocity.c2, L)};
    ds.initial_temperature =
        ScalarExpr(T_factor) * fields::scale_coordinates(s.initial_temperature, L);
    ds.initial_force = {
        ScalarExpr(f_factor) * fields::scale_coordinates(s.initial_force.c1, L),
        ScalarExpr(f_factor) * fields::scale_coordinates(s.initial_force.c2, L)};
    ds.heat_source = ScalarExpr(q_factor) * fields::scale_coordinates(s.heat_source, L);
    ds.thermal_forcing = thermal_forcing_constant(L, s.expansion, theta, mu);
    ds.inverse_prandtl = s.diffusivity / mu;
    ds.window = s.window;  // the window is stated in scale-free coordinates
    return ds;
}

Scenario redimensionalize(const DimensionlessScenario& ds, double viscosity,
                          double diffusivity, double expansion, double offset,
                          double length_scale, double temperature_scale) {
    const double L = length_scale;
    const double mu = viscosity;
    const double theta = temperature_scale;
    const double inv_L = 1.0 / L;

    const double u_factor = mu / L;
    const double T_factor = theta;
    const double f_factor = mu * mu / (L * L * L);
    const double q_factor = mu * theta / (L * L);

    Scenario s;
    s.initial_velocity = {
        ScalarExpr(u_factor) * fields::scale_coordinates(ds.initial_velocity.c1, inv_L),
        ScalarExpr(u_factor) * fields::scale_coordinates(ds.initial_velocity.c2, inv_L)};
    s.initial_temperature =
        ScalarExpr(T_factor) * fields::scale_coordinates(ds.initial_temperature, inv_L);
    s.initial_force = {
        ScalarExpr(f_factor) * fields::scale_coordinates(ds.initial_force.c1, inv_L),
        ScalarExpr(f_factor) * fields::scale_coordinates(ds.initial_force.c2, inv_L)};
    s.heat_source = ScalarExpr(q_factor) * fields::scale_coordinates(ds.heat_source, inv_L);
    s.viscosity = mu;
    s.diffusivity = diffusivity;
    s.expansion = expansion;
    s.offset = offset;
    s.length_scale = L;
    s.temperature_scale = theta;
    s.window = ds.window;
    return s;
}

DimensionalEvent dimensional_event(double t0, Vec2 x0, const Scenario& s) {
    const double L = s.length_scale;
    DimensionalEvent de;
    de.time = (L * L / s.viscosity) * t0;
    de.location = {L * x0.x1, L * x0.x2};
    return de;
}

}  // namespace intersep::model
