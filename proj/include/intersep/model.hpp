#pragma once

#include <string>

#include "intersep/fields.hpp"

namespace intersep::model {

/// Linear state law p = rho * (beta * T + delta).
/// Gas: beta is the gas constant, delta = 0. Liquid: beta is the thermal
/// stiffness coefficient and delta the cold-state offset.
struct FluidKind {
    enum class Tag { gas, liquid };
    Tag tag = Tag::gas;
    double beta = 1.0;
    double delta = 0.0;

    static FluidKind gas(double gas_constant) {
        return {Tag::gas, gas_constant, 0.0};
    }
    static FluidKind liquid(double stiffness, double offset) {
        return {Tag::liquid, stiffness, offset};
    }
};

/// p = rho (beta T + delta). Throws std::domain_error for rho <= 0.
double pressure_from_state(double rho, double T, const FluidKind& fluid);

/// Gradient of the state-law pressure with log-density phi = log(rho):
///   -grad p / rho = -beta T grad(phi) - beta grad(T) - delta grad(phi).
/// Returned as the closed-form right-hand-side force per unit mass.
fields::VectorField pressure_gradient_decomposition(const fields::ScalarExpr& T,
                                                    const fields::ScalarExpr& phi,
                                                    double beta, double delta);

/// Mass-conservation residual in log-density form:
///   phi_t + (u . grad) phi + div u.
/// Identically zero exactly when mass is conserved.
fields::ScalarExpr phi_transport_residual(const fields::VectorField& u,
                                          const fields::ScalarExpr& phi,
                                          const fields::ScalarExpr& phi_t);

/// Dimensional problem description: initial fields plus physical constants.
struct Scenario {
    fields::VectorField initial_velocity;   // u at t = 0
    fields::ScalarExpr initial_temperature; // T at t = 0
    fields::VectorField initial_force;      // external body force at t = 0
    fields::ScalarExpr heat_source;         // volumetric heat source at t = 0
    double viscosity = 1.0;          // mu
    double diffusivity = 0.0;        // kappa
    double expansion = 1.0;          // beta in the state law
    double offset = 0.0;             // delta in the state law
    double length_scale = 1.0;       // L
    double temperature_scale = 1.0;  // theta
    fields::Window window;           // analysis window, nondimensional coords

    /// Throws std::invalid_argument when a constant or the window is
    /// unusable (mu <= 0, L <= 0, theta <= 0, kappa < 0, empty window).
    void validate() const;
};

/// Scale-free problem description produced by nondimensionalize().
struct DimensionlessScenario {
    fields::VectorField initial_velocity;
    fields::ScalarExpr initial_temperature;
    fields::VectorField initial_force;
    fields::ScalarExpr heat_source;
    double thermal_forcing = 0.0;   // K = L^2 beta theta / mu^2
    double inverse_prandtl = 0.0;   // kappa / mu
    fields::Window window;
};

/// K = L^2 beta theta / mu^2, written once so every caller agrees bit for bit.
double thermal_forcing_constant(double length_scale, double expansion,
                                double temperature_scale, double viscosity);

/// Rescales fields and constants to the scale-free form:
///   x = L x', t = (L^2/mu) t', u = (mu/L) u', T = theta T',
///   F = (mu^2/L^3) F', Q = (mu theta / L^2) Q'.
DimensionlessScenario nondimensionalize(const Scenario& s);

/// Inverse of nondimensionalize() given the original constants; used to
/// check that the two coordinate changes round-trip.
Scenario redimensionalize(const DimensionlessScenario& ds, double viscosity,
                          double diffusivity, double expansion, double offset,
                          double length_scale, double temperature_scale);

/// Maps a scale-free event time/location back to physical units:
///   t_bar = (L^2/mu) t0,  x_bar = L x0.
struct DimensionalEvent {
    double time = 0.0;
    fields::Vec2 location;
};
DimensionalEvent dimensional_event(double t0, fields::Vec2 x0, const Scenario& s);

}  // namespace intersep::model
