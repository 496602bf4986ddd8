#include "intersep/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace intersep::solver {

using fields::Vec2;
using model::DimensionlessScenario;

Grid2::Grid2(int nx_, int ny_, const fields::Window& w) : nx(nx_), ny(ny_), window(w) {
    if (nx < 16 || ny < 16) {
        throw std::invalid_argument("grid: at least 16 nodes per axis required, got " +
                                    std::to_string(nx) + "x" + std::to_string(ny));
    }
    if (!w.valid()) {
        throw std::invalid_argument("grid: window is empty");
    }
}

Mode mode_from_string(const std::string& s) {
    if (s == "literal") return Mode::literal;
    if (s == "projected") return Mode::projected;
    throw std::invalid_argument("unknown solver mode '" + s + "' (expected literal or projected)");
}

std::string to_string(Mode m) { return m == Mode::literal ? "literal" : "projected"; }

SolverConfig::SolverConfig(const Grid2& g, Mode mode_, double dt_, double end_time_,
                           int snapshot_stride_)
    : mode(mode_), dt(dt_), end_time(end_time_), snapshot_stride(snapshot_stride_) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("solver: dt must be positive, got " + std::to_string(dt));
    }
    double limit = stability_limit(g);
    if (dt > limit * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "solver: dt = " << dt << " exceeds the diffusive stability bound 0.2 min(h)^2 = "
            << limit;
        throw std::invalid_argument(msg.str());
    }
    if (!(end_time >= 0.0)) {
        throw std::invalid_argument("solver: end_time must be nonnegative");
    }
    if (snapshot_stride < 1) {
        throw std::invalid_argument("solver: snapshot_stride must be at least 1");
    }
}

namespace {

class BlowUpError : public std::runtime_error {
public:
    explicit BlowUpError(const std::string& what) : std::runtime_error(what) {}
};

double interior_divergence(const Grid2& g, const std::vector<double>& u1,
                           const std::vector<double>& u2) {
    double worst = 0.0;
    const double ihx2 = 1.0 / (2.0 * g.hx());
    const double ihy2 = 1.0 / (2.0 * g.hy());
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 1; i + 1 < g.nx; ++i) {
            double d = (u1[g.idx(i + 1, j)] - u1[g.idx(i - 1, j)]) * ihx2 +
                       (u2[g.idx(i, j + 1)] - u2[g.idx(i, j - 1)]) * ihy2;
            worst = std::max(worst, std::abs(d));
        }
    }
    return worst;
}

/// Per-run cache: expression fields are sampled once, the time loop is pure
/// array arithmetic. Boundary data follows u = psi + t rate, T = T0 + t T1.
struct Stepper {
    Grid2 g;
    Mode mode;
    double K;
    double invPr;
    std::vector<double> f1, f2, q;              // frozen force and heat source
    std::vector<double> base1, base2, rate1, rate2;  // full-grid samples
    std::vector<double> T0s, T1s;

    // projection workspace (reused across steps; psol warm-starts the solve)
    mutable std::vector<double> psol, pb, pr, pz, pap, pgx, pgy, pnull;
    mutable double pnull_norm2 = 0.0;

    Stepper(const DimensionlessScenario& ds, const Grid2& grid, Mode mode_)
        : g(grid), mode(mode_), K(ds.thermal_forcing), invPr(ds.inverse_prandtl) {
        taylor::FirstOrderField fof = taylor::first_order_field(ds);
        fields::ScalarExpr trate = taylor::temperature_rate(ds);
        int n = g.size();
        f1.resize(n);
        f2.resize(n);
        q.resize(n);
        base1.resize(n);
        base2.resize(n);
        rate1.resize(n);
        rate2.resize(n);
        T0s.resize(n);
        T1s.resize(n);
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                Vec2 p = g.node(i, j);
                int k = g.idx(i, j);
                f1[k] = ds.initial_force.c1.eval(p);
                f2[k] = ds.initial_force.c2.eval(p);
                q[k] = ds.heat_source.eval(p);
                base1[k] = fof.base.c1.eval(p);
                base2[k] = fof.base.c2.eval(p);
                rate1[k] = fof.rate.c1.eval(p);
                rate2[k] = fof.rate.c2.eval(p);
                T0s[k] = ds.initial_temperature.eval(p);
                T1s[k] = trate.eval(p);
            }
        }
    }

    FieldSnapshot initial() const {
        FieldSnapshot s;
        s.t = 0.0;
        s.grid = g;
        s.u1 = base1;
        s.u2 = base2;
        s.T = T0s;
        s.max_interior_divergence = interior_divergence(g, s.u1, s.u2);
        return s;
    }

    void project(std::vector<double>& u1, std::vector<double>& u2) const;
    void correction_operator(const std::vector<double>& q, std::vector<double>& out) const;

    FieldSnapshot advance(const FieldSnapshot& from, double dt, int step_number) const {
        const int nx = g.nx;
        const int ny = g.ny;
        const double hx = g.hx();
        const double hy = g.hy();
        const double ihx2 = 1.0 / (2.0 * hx);
        const double ihy2 = 1.0 / (2.0 * hy);
        const double ihxx = 1.0 / (hx * hx);
        const double ihyy = 1.0 / (hy * hy);
        const double t_new = from.t + dt;

        FieldSnapshot next;
        next.t = t_new;
        next.grid = g;
        next.u1.resize(g.size());
        next.u2.resize(g.size());
        next.T.resize(g.size());

        const std::vector<double>& u1 = from.u1;
        const std::vector<double>& u2 = from.u2;
        const std::vector<double>& T = from.T;

        for (int j = 1; j + 1 < ny; ++j) {
            for (int i = 1; i + 1 < nx; ++i) {
                int k = g.idx(i, j);
                int ke = k + 1, kw = k - 1, kn = k + nx, ks = k - nx;

                double lap1 = (u1[ke] + u1[kw] - 2.0 * u1[k]) * ihxx +
                              (u1[kn] + u1[ks] - 2.0 * u1[k]) * ihyy;
                double lap2 = (u2[ke] + u2[kw] - 2.0 * u2[k]) * ihxx +
                              (u2[kn] + u2[ks] - 2.0 * u2[k]) * ihyy;
                double lapT = (T[ke] + T[kw] - 2.0 * T[k]) * ihxx +
                              (T[kn] + T[ks] - 2.0 * T[k]) * ihyy;

                double du1dx = (u1[ke] - u1[kw]) * ihx2;
                double du1dy = (u1[kn] - u1[ks]) * ihy2;
                double du2dx = (u2[ke] - u2[kw]) * ihx2;
                double du2dy = (u2[kn] - u2[ks]) * ihy2;
                double dTdx = (T[ke] - T[kw]) * ihx2;
                double dTdy = (T[kn] - T[ks]) * ihy2;

                double adv1 = u1[k] * du1dx + u2[k] * du1dy;
                double adv2 = u1[k] * du2dx + u2[k] * du2dy;
                double advT = u1[k] * dTdx + u2[k] * dTdy;

                next.u1[k] = u1[k] + dt * (lap1 - adv1 - K * dTdx + f1[k]);
                next.u2[k] = u2[k] + dt * (lap2 - adv2 - K * dTdy + f2[k]);
                next.T[k] = T[k] + dt * (invPr * lapT - advT + q[k]);
            }
        }

        // Dirichlet boundary from the short-time expansion
        auto set_boundary = [&](int i, int j) {
            int k = g.idx(i, j);
            next.u1[k] = base1[k] + t_new * rate1[k];
            next.u2[k] = base2[k] + t_new * rate2[k];
            next.T[k] = T0s[k] + t_new * T1s[k];
        };
        for (int i = 0; i < nx; ++i) {
            set_boundary(i, 0);
            set_boundary(i, ny - 1);
        }
        for (int j = 1; j + 1 < ny; ++j) {
            set_boundary(0, j);
            set_boundary(nx - 1, j);
        }

        if (mode == Mode::projected) {
            project(next.u1, next.u2);
        }

        for (int k = 0; k < g.size(); ++k) {
            if (!std::isfinite(next.u1[k]) || !std::isfinite(next.u2[k]) ||
                !std::isfinite(next.T[k])) {
                std::ostringstream msg;
                msg << "non-finite value at t = " << t_new << " (step " << step_number
                    << "); the explicit integration blew up";
                throw BlowUpError(msg.str());
            }
        }

        next.max_interior_divergence = interior_divergence(g, next.u1, next.u2);
        return next;
    }
};

/// Action of the projection system matrix on a multiplier field q: take the
/// centered gradient of q at interior nodes (the correction the projection
/// is allowed to add; boundary velocity stays pinned), then apply the
/// negated interior-divergence stencil to that correction. Because the
/// divergence and gradient stencils are exact transposes of one another up
/// to sign, the result is symmetric positive semidefinite, and
///   div(u + grad q) = div u - A q,
/// so solving A q = div u cancels the interior divergence exactly.
void Stepper::correction_operator(const std::vector<double>& q,
                                  std::vector<double>& out) const {
    const int nx = g.nx, ny = g.ny;
    const double ihx2 = 1.0 / (2.0 * g.hx());
    const double ihy2 = 1.0 / (2.0 * g.hy());
    std::fill(pgx.begin(), pgx.end(), 0.0);
    std::fill(pgy.begin(), pgy.end(), 0.0);
    for (int j = 1; j + 1 < ny; ++j) {
        for (int i = 1; i + 1 < nx; ++i) {
            int k = g.idx(i, j);
            pgx[k] = (q[k + 1] - q[k - 1]) * ihx2;
            pgy[k] = (q[k + nx] - q[k - nx]) * ihy2;
        }
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (int j = 1; j + 1 < ny; ++j) {
        for (int i = 1; i + 1 < nx; ++i) {
            int k = g.idx(i, j);
            out[k] = (pgx[k - 1] - pgx[k + 1]) * ihx2 +
                     (pgy[k - nx] - pgy[k + nx]) * ihy2;
        }
    }
}

void Stepper::project(std::vector<double>& u1, std::vector<double>& u2) const {
    const int n = g.size();
    const double ihx2 = 1.0 / (2.0 * g.hx());
    const double ihy2 = 1.0 / (2.0 * g.hy());

    if (psol.empty()) {
        psol.assign(n, 0.0);
        // The system matrix annihilates one multiplier pattern: constant on
        // the odd/odd node sublattice, zero elsewhere (the centered 2h
        // stencils never couple that sublattice to a pinned boundary
        // value). The right-hand side is made orthogonal to it; the
        // discarded component is the sublattice mean of the divergence,
        // which the boundary data fixes at rounding level.
        pnull.assign(n, 0.0);
        for (int j = 1; j + 1 < g.ny; ++j) {
            for (int i = 1; i + 1 < g.nx; ++i) {
                if ((i % 2 == 1) && (j % 2 == 1)) pnull[g.idx(i, j)] = 1.0;
            }
        }
        pnull_norm2 = 0.0;
        for (double v : pnull) pnull_norm2 += v * v;
    }
    pb.assign(n, 0.0);
    pr.resize(n);
    pz.resize(n);
    pap.resize(n);
    pgx.resize(n);
    pgy.resize(n);

    // right-hand side: the interior divergence to cancel
    double worst = 0.0;
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 1; i + 1 < g.nx; ++i) {
            int k = g.idx(i, j);
            double d = (u1[k + 1] - u1[k - 1]) * ihx2 +
                       (u2[k + g.nx] - u2[k - g.nx]) * ihy2;
            pb[k] = d;
            worst = std::max(worst, std::abs(d));
        }
    }
    if (worst <= 1e-8 || !std::isfinite(worst)) return;
    double c = 0.0;
    for (int k = 0; k < n; ++k) c += pnull[k] * pb[k];
    c /= pnull_norm2;
    for (int k = 0; k < n; ++k) pb[k] -= c * pnull[k];

    // Conjugate-direction iteration on A q = div u, warm-started from the
    // previous step's multiplier (consecutive systems are nearly
    // identical). The residual b - A q is exactly the divergence that
    // would remain after the correction, so it is driven to 1e-8 in the
    // max norm.
    std::vector<double>& q = psol;
    correction_operator(q, pap);
    for (int k = 0; k < n; ++k) pr[k] = pb[k] - pap[k];
    pz = pr;
    double rr = 0.0;
    for (int k = 0; k < n; ++k) rr += pr[k] * pr[k];
    for (int it = 0; it < 4000; ++it) {
        double rmax = 0.0;
        for (int k = 0; k < n; ++k) rmax = std::max(rmax, std::abs(pr[k]));
        if (rmax <= 1e-8) break;
        correction_operator(pz, pap);
        double zap = 0.0;
        for (int k = 0; k < n; ++k) zap += pz[k] * pap[k];
        if (!(zap > 0.0)) break;
        double alpha = rr / zap;
        for (int k = 0; k < n; ++k) q[k] += alpha * pz[k];
        for (int k = 0; k < n; ++k) pr[k] -= alpha * pap[k];
        double rr_new = 0.0;
        for (int k = 0; k < n; ++k) rr_new += pr[k] * pr[k];
        double beta = rr_new / rr;
        rr = rr_new;
        for (int k = 0; k < n; ++k) pz[k] = pr[k] + beta * pz[k];
    }

    // apply the correction u += grad q on the interior; boundary pinned
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 1; i + 1 < g.nx; ++i) {
            int k = g.idx(i, j);
            u1[k] += (q[k + 1] - q[k - 1]) * ihx2;
            u2[k] += (q[k + g.nx] - q[k - g.nx]) * ihy2;
        }
    }
}

}  // namespace

FieldSnapshot initial_snapshot(const DimensionlessScenario& ds, const Grid2& g) {
    return Stepper(ds, g, Mode::literal).initial();
}

FieldSnapshot step(const FieldSnapshot& from, const DimensionlessScenario& ds,
                   const SolverConfig& cfg) {
    Stepper st(ds, from.grid, cfg.mode);
    return st.advance(from, cfg.dt, 1);
}

RunResult run(const DimensionlessScenario& ds, const Grid2& g, const SolverConfig& cfg) {
    Stepper st(ds, g, cfg.mode);
    RunResult out;
    out.snapshots.push_back(st.initial());

    long steps = cfg.end_time > 0.0
                     ? static_cast<long>(std::ceil(cfg.end_time / cfg.dt - 1e-9))
                     : 0;
    FieldSnapshot current = out.snapshots.front();
    for (long n = 1; n <= steps; ++n) {
        try {
            current = st.advance(current, cfg.dt, static_cast<int>(n));
        } catch (const BlowUpError& e) {
            out.blew_up = true;
            out.error = e.what();
            break;
        }
        if (n % cfg.snapshot_stride == 0 || n == steps) {
            out.snapshots.push_back(current);
        }
    }
    return out;
}

Vec2 FieldSnapshot::velocity_at(Vec2 p) const {
    const Grid2& g = grid;
    double x = std::clamp(p.x1, g.window.xmin, g.window.xmax);
    double y = std::clamp(p.x2, g.window.ymin, g.window.ymax);
    double sx = (x - g.window.xmin) / g.hx();
    double sy = (y - g.window.ymin) / g.hy();
    int i = std::clamp(static_cast<int>(sx), 0, g.nx - 2);
    int j = std::clamp(static_cast<int>(sy), 0, g.ny - 2);
    double fx = sx - i;
    double fy = sy - j;
    auto lerp2 = [&](const std::vector<double>& a) {
        double v00 = a[g.idx(i, j)], v10 = a[g.idx(i + 1, j)];
        double v01 = a[g.idx(i, j + 1)], v11 = a[g.idx(i + 1, j + 1)];
        return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) +
               fy * ((1.0 - fx) * v01 + fx * v11);
    };
    return {lerp2(u1), lerp2(u2)};
}

topo::PointField FieldSnapshot::velocity_field() const {
    auto shared = std::make_shared<FieldSnapshot>(*this);
    topo::PointField f;
    f.value = [shared](Vec2 p) { return shared->velocity_at(p); };
    f.fd_step = 1e-6;
    return f;
}

int stagnation_count(const FieldSnapshot& snap, const fields::Window& subwindow,
                     int seed_density, const topo::Tolerances& tol) {
    const Grid2& g = snap.grid;
    const double mx = g.window.xmin + g.hx();
    const double Mx = g.window.xmax - g.hx();
    const double my = g.window.ymin + g.hy();
    const double My = g.window.ymax - g.hy();
    const double slack = 1e-12;
    if (subwindow.xmin < mx - slack || subwindow.xmax > Mx + slack ||
        subwindow.ymin < my - slack || subwindow.ymax > My + slack || !subwindow.valid()) {
        throw std::invalid_argument(
            "stagnation_count: the subwindow must lie inside the grid interior");
    }
    double umax = 0.0;
    for (size_t k = 0; k < snap.u1.size(); ++k) {
        umax = std::max(umax, std::max(std::abs(snap.u1[k]), std::abs(snap.u2[k])));
    }
    if (umax <= 1e-14) {
        throw std::domain_error(
            "stagnation_count: the sampled velocity is identically-zero; "
            "a stagnation count is meaningless");
    }
    std::vector<Vec2> roots =
        topo::find_singular_points(snap.velocity_field(), subwindow, seed_density, tol);
    return static_cast<int>(roots.size());
}

std::vector<std::pair<double, double>> taylor_consistency(
    const std::vector<FieldSnapshot>& snaps, const taylor::FirstOrderField& fof) {
    std::vector<std::pair<double, double>> out;
    out.reserve(snaps.size());
    for (const FieldSnapshot& s : snaps) {
        if (s.t == 0.0) {
            out.emplace_back(0.0, 0.0);
            continue;
        }
        const Grid2& g = s.grid;
        double worst = 0.0;
        for (int j = 1; j + 1 < g.ny; ++j) {
            for (int i = 1; i + 1 < g.nx; ++i) {
                Vec2 v = fof.eval(g.node(i, j), s.t);
                int k = g.idx(i, j);
                worst = std::max(worst, std::abs(s.u1[k] - v.x1));
                worst = std::max(worst, std::abs(s.u2[k] - v.x2));
            }
        }
        out.emplace_back(s.t, worst / (s.t * s.t));
    }
    return out;
}

void write_snapshot_csv(const FieldSnapshot& snap, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << "t,x1,x2,u1,u2,T\n";
    char buf[160];
    const Grid2& g = snap.grid;
    for (int k = 0; k < g.size(); ++k) {
        int i = k % g.nx;
        int j = k / g.nx;
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", snap.t,
                      g.x1(i), g.x2(j), snap.u1[k], snap.u2[k], snap.T[k]);
        out << buf;
    }
}

nlohmann::ordered_json snapshot_index(const std::vector<std::string>& files,
                                      const std::vector<FieldSnapshot>& snaps, Mode mode) {
    nlohmann::ordered_json idx;
    idx["mode"] = to_string(mode);
    idx["note"] = kBoundaryNote;
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (size_t k = 0; k < snaps.size(); ++k) {
        nlohmann::ordered_json item;
        item["file"] = k < files.size() ? nlohmann::ordered_json(files[k])
                                        : nlohmann::ordered_json(nullptr);
        item["t"] = snaps[k].t;
        item["max_interior_divergence"] = snaps[k].max_interior_divergence;
        list.push_back(item);
    }
    idx["snapshots"] = list;
    return idx;
}

}  // namespace intersep::solver
