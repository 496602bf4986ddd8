#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "intersep/model.hpp"
#include "intersep/taylor.hpp"
#include "intersep/topology.hpp"

namespace intersep::solver {

/// Collocated uniform grid over the window, boundary nodes included.
struct Grid2 {
    int nx = 0;
    int ny = 0;
    fields::Window window;

    Grid2() = default;
    /// Throws std::invalid_argument for nx or ny below 16 or an empty window.
    Grid2(int nx_, int ny_, const fields::Window& w);

    double hx() const { return window.width() / (nx - 1); }
    double hy() const { return window.height() / (ny - 1); }
    double x1(int i) const { return window.xmin + i * hx(); }
    double x2(int j) const { return window.ymin + j * hy(); }
    fields::Vec2 node(int i, int j) const { return {x1(i), x2(j)}; }
    int idx(int i, int j) const { return j * nx + i; }
    int size() const { return nx * ny; }
};

/// One stored time level of the integration.
struct FieldSnapshot {
    double t = 0.0;
    Grid2 grid;
    std::vector<double> u1, u2, T;  // row-major, grid.idx addressing
    double max_interior_divergence = 0.0;

    /// Bilinear interpolation of the velocity; p must lie in the window.
    fields::Vec2 velocity_at(fields::Vec2 p) const;
    /// The velocity as a numerically evaluable field (finite-difference
    /// Jacobian), for root finding on solver output.
    topo::PointField velocity_field() const;
};

enum class Mode { literal, projected };

Mode mode_from_string(const std::string& s);  // throws std::invalid_argument
std::string to_string(Mode m);

/// Explicit-Euler configuration. The diffusive stability bound
/// dt <= 0.2 min(hx, hy)^2 is enforced at construction.
struct SolverConfig {
    Mode mode = Mode::literal;
    double dt = 0.0;
    double end_time = 0.0;
    int snapshot_stride = 1;

    SolverConfig() = default;
    SolverConfig(const Grid2& g, Mode mode_, double dt_, double end_time_,
                 int snapshot_stride_ = 1);

    static double stability_limit(const Grid2& g) {
        double h = std::min(g.hx(), g.hy());
        return 0.2 * h * h;
    }
};

struct RunResult {
    std::vector<FieldSnapshot> snapshots;
    bool blew_up = false;
    std::string error;  // names the failing step when blew_up
};

FieldSnapshot initial_snapshot(const model::DimensionlessScenario& ds, const Grid2& g);

/// One explicit-Euler step of the coupled momentum/temperature system with
/// centered second-order differences. Boundary values follow the
/// first-order short-time expansion (time-dependent Dirichlet):
///   u = psi + t * initial_rate,  T = T0 + t * temperature_rate.
/// In projected mode the interior velocity is made discretely
/// divergence-free after the update (pressure-correction solve by
/// conjugate-direction iteration, residual driven to 1e-8).
FieldSnapshot step(const FieldSnapshot& from, const model::DimensionlessScenario& ds,
                   const SolverConfig& cfg);

/// Integrates from t = 0 to end_time, storing every snapshot_stride-th
/// level plus the final one. Non-finite values stop the run; partial
/// results are retained with blew_up set.
RunResult run(const model::DimensionlessScenario& ds, const Grid2& g,
              const SolverConfig& cfg);

/// Number of interior stagnation points of the snapshot velocity within the
/// subwindow. Throws std::domain_error when the sampled velocity is
/// identically zero (no meaningful count).
int stagnation_count(const FieldSnapshot& snap, const fields::Window& subwindow,
                     int seed_density = 24, const topo::Tolerances& tol = {});

/// Consistency of the integration with the short-time model: for each
/// snapshot, max interior |u_num - (psi + t * rate)| / t^2. Pairs (t, ratio);
/// the ratio tends to half the second time-derivative's magnitude, so it
/// stays bounded as t -> 0. t = 0 contributes 0.
std::vector<std::pair<double, double>> taylor_consistency(
    const std::vector<FieldSnapshot>& snaps, const taylor::FirstOrderField& fof);

/// CSV "t,x1,x2,u1,u2,T", one row per node, row-major.
void write_snapshot_csv(const FieldSnapshot& snap, const std::string& path);

/// Index of a snapshot series: files, times, divergence diagnostics, and
/// the boundary-model note (first-order Dirichlet data is a small-time
/// approximation, so every simulation output carries the caveat).
nlohmann::ordered_json snapshot_index(const std::vector<std::string>& files,
                                      const std::vector<FieldSnapshot>& snaps,
                                      Mode mode);

inline constexpr const char* kBoundaryNote =
    "boundary data follows the first-order short-time expansion; "
    "trust degrades once t is no longer small";

}  // namespace intersep::solver
