#include "intersep/predictor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace intersep::predictor {

using fields::Mat2;
using fields::Vec2;
using model::DimensionlessScenario;
using nlohmann::ordered_json;

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::separation_certified: return "separation_certified";
        case Verdict::separation_rejected: return "separation_rejected";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

namespace {

/// Time-parametrized Jacobian of the first-order field, evaluated from the
/// closed forms of the base and rate parts: Dv(x, t) = Jb(x) + t Jr(x).
struct TimeJacobian {
    fields::JacobianExpr base;
    fields::JacobianExpr rate;

    explicit TimeJacobian(const taylor::FirstOrderField& fof)
        : base(fields::jacobian(fof.base)), rate(fields::jacobian(fof.rate)) {}

    Mat2 eval(Vec2 x, double t) const {
        Mat2 b = base.eval(x);
        Mat2 r = rate.eval(x);
        return {b.a11 + t * r.a11, b.a12 + t * r.a12, b.a21 + t * r.a21, b.a22 + t * r.a22};
    }
};

bool solve3(const std::array<std::array<double, 3>, 3>& A_in, const std::array<double, 3>& b_in,
            std::array<double, 3>& out) {
    std::array<std::array<double, 4>, 3> m{};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m[r][c] = A_in[r][c];
        m[r][3] = b_in[r];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        }
        if (std::abs(m[piv][col]) < 1e-300) return false;
        std::swap(m[piv], m[col]);
        for (int r = col + 1; r < 3; ++r) {
            double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double acc = m[r][3];
        for (int c = r + 1; c < 3; ++c) acc -= m[r][c] * out[c];
        out[r] = acc / m[r][r];
    }
    return std::isfinite(out[0]) && std::isfinite(out[1]) && std::isfinite(out[2]);
}

struct FoldPolish {
    Vec2 x;
    double t = 0.0;
    bool ok = false;
};

/// Newton iteration on the fold system G(x1, x2, t) = (v1, v2, det Dv) = 0,
/// which pins both the root position and the degeneracy time to full
/// precision (bisection alone leaves the position O(sqrt(t_tol)) off).
FoldPolish polish_fold(const taylor::FirstOrderField& fof, const TimeJacobian& tj, Vec2 x0,
                       double t_guess) {
    auto G = [&](Vec2 x, double t) -> std::array<double, 3> {
        Vec2 v = fof.eval(x, t);
        return {v.x1, v.x2, tj.eval(x, t).det()};
    };
    auto norm3 = [](const std::array<double, 3>& g) {
        return std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    };

    Vec2 x = x0;
    double t = t_guess;
    std::array<double, 3> g = G(x, t);
    double gn = norm3(g);
    const double h = 1e-6;

    for (int iter = 0; iter < 50; ++iter) {
        if (!std::isfinite(gn) || gn == 0.0) break;
        std::array<std::array<double, 3>, 3> A{};
        for (int c = 0; c < 3; ++c) {
            Vec2 xp = x, xm = x;
            double tp = t, tm = t;
            if (c == 0) { xp.x1 += h; xm.x1 -= h; }
            if (c == 1) { xp.x2 += h; xm.x2 -= h; }
            if (c == 2) { tp += h; tm -= h; }
            std::array<double, 3> gp = G(xp, tp);
            std::array<double, 3> gm = G(xm, tm);
            for (int r = 0; r < 3; ++r) A[r][c] = (gp[r] - gm[r]) / (2.0 * h);
        }
        std::array<double, 3> d{};
        std::array<double, 3> rhs{-g[0], -g[1], -g[2]};
        if (!solve3(A, rhs, d)) break;

        double damp = 1.0;
        bool improved = false;
        Vec2 xn{};
        double tn = t;
        std::array<double, 3> gnext{};
        double gnn = gn;
        for (int halving = 0; halving < 16; ++halving) {
            xn = {x.x1 + damp * d[0], x.x2 + damp * d[1]};
            tn = t + damp * d[2];
            gnext = G(xn, tn);
            gnn = norm3(gnext);
            if (std::isfinite(gnn) && gnn < gn) {
                improved = true;
                break;
            }
            damp *= 0.5;
        }
        if (!improved) break;
        double moved = damp * std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        x = xn;
        t = tn;
        g = gnext;
        gn = gnn;
        if (moved <= 1e-15 * (1.0 + std::abs(t) + x.norm())) break;
    }

    FoldPolish out;
    out.x = x;
    out.t = t;
    Vec2 v = fof.eval(x, t);
    out.ok = std::isfinite(gn) && v.norm() <= 1e-10 && t > 0.0 && std::isfinite(t);
    return out;
}

std::vector<std::vector<Vec2>> cluster_roots(const std::vector<Vec2>& roots, double radius) {
    std::vector<std::vector<Vec2>> clusters;
    for (Vec2 r : roots) {
        bool placed = false;
        for (auto& cl : clusters) {
            for (Vec2 member : cl) {
                if ((r - member).norm() <= radius) {
                    cl.push_back(r);
                    placed = true;
                    break;
                }
            }
            if (placed) break;
        }
        if (!placed) clusters.push_back({r});
    }
    return clusters;
}

Vec2 centroid(const std::vector<Vec2>& pts) {
    Vec2 c{0.0, 0.0};
    for (Vec2 p : pts) c = c + p;
    return {c.x1 / pts.size(), c.x2 / pts.size()};
}

}  // namespace

SeparationEvent locate_separation(const DimensionlessScenario& ds, const LocateOptions& opts) {
    SeparationEvent ev;
    taylor::AssumptionResiduals res = taylor::assumption_residuals(ds);
    ev.max_abs_divergence = res.max_abs_divergence;
    ev.max_abs_compatibility = res.max_abs_compatibility;
    if (!res.within()) {
        ev.verdict = Verdict::separation_rejected;
        std::ostringstream msg;
        msg << "structural residuals exceed " << taylor::kResidualThreshold
            << " (max |div psi| = " << res.max_abs_divergence
            << ", max compatibility = " << res.max_abs_compatibility
            << "); the short-time model does not apply";
        ev.note = msg.str();
        return ev;
    }

    taylor::FirstOrderField fof = taylor::first_order_field(ds);
    TimeJacobian tj(fof);
    auto roots_at = [&](double t) {
        return topo::find_singular_points(topo::PointField::from(fof.at_time(t)), ds.window,
                                          opts.seed_density, opts.tol);
    };

    std::vector<Vec2> initial = roots_at(opts.t_tol);
    if (!initial.empty()) {
        ev.verdict = Verdict::inconclusive;
        ev.zero_count_before = static_cast<int>(initial.size());
        ev.zero_count_after = static_cast<int>(initial.size());
        std::ostringstream msg;
        msg << initial.size() << " stagnation point(s) exist already at the start of the "
            << "horizon; there is no birth event to certify";
        ev.note = msg.str();
        return ev;
    }

    double lo = opts.t_tol;
    double hi = -1.0;
    std::vector<Vec2> hi_roots;
    for (int k = 1; k <= opts.scan_samples; ++k) {
        double t = opts.t_max * k / opts.scan_samples;
        std::vector<Vec2> r = roots_at(t);
        if (!r.empty()) {
            hi = t;
            hi_roots = r;
            break;
        }
        lo = t;
    }
    if (hi < 0.0) {
        ev.verdict = Verdict::inconclusive;
        ev.zero_count_before = 0;
        ev.zero_count_after = 0;
        std::ostringstream msg;
        msg << "no stagnation point appears inside the window for t <= " << opts.t_max;
        ev.note = msg.str();
        return ev;
    }

    while (hi - lo > opts.t_tol) {
        double mid = 0.5 * (lo + hi);
        std::vector<Vec2> r = roots_at(mid);
        if (!r.empty()) {
            hi = mid;
            hi_roots = r;
        } else {
            lo = mid;
        }
    }

    std::vector<std::vector<Vec2>> clusters = cluster_roots(hi_roots, opts.cluster_radius);

    struct Candidate {
        Vec2 x;
        double t;
    };
    std::vector<Candidate> cands;
    for (const auto& cl : clusters) {
        Vec2 c = centroid(cl);
        FoldPolish fp = polish_fold(fof, tj, c, hi);
        if (fp.ok && ds.window.contains(fp.x, 1e-6)) {
            cands.push_back({fp.x, fp.t});
        } else {
            // fall back on the bisection output: a genuine root at t = hi
            cands.push_back({cl.front(), hi});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.x.x1 != b.x.x1) return a.x.x1 < b.x.x1;
        return a.x.x2 < b.x.x2;
    });

    const Candidate& primary = cands.front();
    ev.time = primary.t;
    ev.location = primary.x;
    ev.jacobian = tj.eval(primary.x, primary.t);

    double before_t = primary.t * (1.0 - opts.count_eps);
    double after_t = primary.t * (1.0 + opts.count_eps);
    ev.zero_count_before = static_cast<int>(roots_at(before_t).size());
    ev.zero_count_after = static_cast<int>(roots_at(after_t).size());

    bool all_pass = true;
    std::string fail_note;
    for (const Candidate& c : cands) {
        CertifiedPoint cp;
        cp.location = c.x;
        cp.jacobian = tj.eval(c.x, c.t);
        try {
            cp.checklist = topo::separation_checklist(fof, c.x, c.t, opts.tol);
        } catch (const topo::IndexError& e) {
            cp.checklist.note = e.what();
            all_pass = false;
            if (fail_note.empty()) fail_note = e.what();
        } catch (const std::invalid_argument& e) {
            cp.checklist.note = e.what();
            all_pass = false;
            if (fail_note.empty()) fail_note = e.what();
        }
        if (!cp.checklist.all_pass()) {
            all_pass = false;
            if (fail_note.empty() && !cp.checklist.note.empty()) fail_note = cp.checklist.note;
        }
        ev.points.push_back(cp);
    }

    ev.index = ev.points.front().checklist.index;
    ev.transversality = ev.points.front().checklist.transversality;

    if (all_pass && ev.zero_count_before == 0 && ev.zero_count_after >= 1) {
        ev.verdict = Verdict::separation_certified;
    } else {
        ev.verdict = Verdict::inconclusive;
        std::ostringstream msg;
        msg << "event located but not certified:";
        if (!all_pass) msg << " checklist incomplete;";
        if (ev.zero_count_before != 0) {
            msg << " " << ev.zero_count_before << " root(s) present just before t0;";
        }
        if (ev.zero_count_after < 1) msg << " no roots just after t0;";
        if (!fail_note.empty()) msg << " " << fail_note;
        ev.note = msg.str();
    }
    return ev;
}

SeparationEvent closed_form_canonical(double K, double C1, double C2, double C3, double C4) {
    (void)C2;  // the temperature offset does not enter the event
    double drive = K * C3 - 2.0 * C1;
    if (!(drive > 0.0)) {
        std::ostringstream msg;
        msg << "closed_form_canonical: K C3 - 2 C1 = " << drive
            << " must be positive for a separation event in finite forward time";
        throw std::domain_error(msg.str());
    }
    SeparationEvent ev;
    ev.verdict = Verdict::separation_certified;
    double t0 = 1.0 / drive;
    ev.time = t0;
    ev.location = Vec2{0.0, 0.0};
    ev.jacobian = Mat2{0.0, C4 * t0, 0.0, 0.0};
    ev.index = 0;
    ev.transversality = 2.0 * C1 - K * C3;
    ev.zero_count_before = 0;
    ev.zero_count_after = 2;
    ev.note = "closed-form evaluation for the quadratic-jet family";
    return ev;
}

std::optional<CanonicalConstants> extract_canonical(const DimensionlessScenario& ds) {
    const Vec2 o{0.0, 0.0};
    CanonicalConstants cc;
    try {
        cc.base = ds.initial_velocity.c2.eval(o);
        cc.C1 = ds.initial_velocity.c2.eval({1.0, 0.0}) - cc.base;
        cc.C2 = ds.initial_temperature.eval(o);
        cc.C3 = ds.initial_temperature.eval({0.0, 1.0}) - cc.C2;
        cc.C4 = ds.initial_force.c1.eval({0.0, 1.0}) - ds.initial_force.c1.eval(o);
    } catch (const fields::EvalError&) {
        return std::nullopt;
    }

    // verify the fitted form on a deterministic sample grid over the window
    const fields::Window& w = ds.window;
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)); };
    if (!close(cc.base, 1.0)) return std::nullopt;
    for (int j = 0; j < 5; ++j) {
        double x2 = w.ymin + j * (w.height() / 4.0);
        for (int i = 0; i < 5; ++i) {
            double x1 = w.xmin + i * (w.width() / 4.0);
            Vec2 p{x1, x2};
            try {
                if (!close(ds.initial_velocity.c1.eval(p), 0.0)) return std::nullopt;
                if (!close(ds.initial_velocity.c2.eval(p), cc.base + cc.C1 * x1 * x1)) {
                    return std::nullopt;
                }
                if (!close(ds.initial_temperature.eval(p), cc.C2 + cc.C3 * x2)) {
                    return std::nullopt;
                }
                if (!close(ds.initial_force.c1.eval(p), cc.C4 * x2)) return std::nullopt;
                if (!close(ds.initial_force.c2.eval(p), 0.0)) return std::nullopt;
                if (!close(ds.heat_source.eval(p), 0.0)) return std::nullopt;
            } catch (const fields::EvalError&) {
                return std::nullopt;
            }
        }
    }
    return cc;
}

InterpretationReport interpretation(double K, double C1, double C3, double threshold) {
    InterpretationReport rep;
    rep.canonical = true;
    rep.threshold = threshold;
    rep.K_C3_minus_2C1 = K * C3 - 2.0 * C1;
    rep.thermal_dominated = K * C3 >= threshold;
    rep.velocity_dominated = -2.0 * C1 >= threshold;
    rep.magnitude_flag = *rep.K_C3_minus_2C1 >= threshold;
    return rep;
}

InterpretationReport interpretation(const DimensionlessScenario& ds, double threshold) {
    std::optional<CanonicalConstants> cc = extract_canonical(ds);
    if (!cc) {
        InterpretationReport rep;
        rep.canonical = false;
        rep.threshold = threshold;
        return rep;
    }
    return interpretation(ds.thermal_forcing, cc->C1, cc->C3, threshold);
}

void attach_dimensional(SeparationEvent& ev, const model::Scenario& s) {
    if (ev.time) {
        model::DimensionalEvent de =
            model::dimensional_event(*ev.time, ev.location.value_or(Vec2{0.0, 0.0}), s);
        ev.time_dimensional = de.time;
        if (ev.location) ev.location_dimensional = de.location;
    }
}

namespace {

ordered_json vec_json(const std::optional<Vec2>& v) {
    if (!v) return nullptr;
    return ordered_json::array({v->x1, v->x2});
}

ordered_json mat_json(const Mat2& m) {
    return ordered_json::array(
        {ordered_json::array({m.a11, m.a12}), ordered_json::array({m.a21, m.a22})});
}

}  // namespace

ordered_json event_report(const SeparationEvent& ev, const DimensionlessScenario& ds,
                          const std::string& scenario_hash, const InterpretationReport& interp) {
    ordered_json j;
    j["scenario_hash"] = scenario_hash;
    j["K"] = ds.thermal_forcing;
    j["residuals"] = {{"max_abs_divergence", ev.max_abs_divergence},
                      {"max_abs_compatibility", ev.max_abs_compatibility},
                      {"threshold", taylor::kResidualThreshold}};
    j["t0"] = ev.time ? ordered_json(*ev.time) : ordered_json(nullptr);
    j["x_bar"] = vec_json(ev.location);
    j["t_bar_dimensional"] =
        ev.time_dimensional ? ordered_json(*ev.time_dimensional) : ordered_json(nullptr);
    j["x_bar_dimensional"] = vec_json(ev.location_dimensional);
    j["transversality"] = ev.transversality;
    j["jacobian"] = mat_json(ev.jacobian);
    j["index"] = ev.index;
    j["zero_count_before"] = ev.zero_count_before;
    j["zero_count_after"] = ev.zero_count_after;
    j["verdict"] = to_string(ev.verdict);

    ordered_json ji;
    ji["canonical"] = interp.canonical;
    ji["K_C3_minus_2C1"] =
        interp.K_C3_minus_2C1 ? ordered_json(*interp.K_C3_minus_2C1) : ordered_json(nullptr);
    ji["thermal_dominated"] = interp.thermal_dominated;
    ji["velocity_dominated"] = interp.velocity_dominated;
    ji["magnitude_flag"] = interp.magnitude_flag;
    ji["threshold"] = interp.threshold;
    j["interpretation"] = ji;

    // Both sign conventions for the quadratic jet circulate; record what the
    // implemented form means so downstream readers compare like with like.
    j["conventions"] = {
        {"implemented_form", "v = psi + t * (lap(psi) - (psi.grad)psi - K grad(T0) + F0)"},
        {"positive_quadratic_coefficient",
         "stagnation points are born at t0 and persist for t > t0"},
        {"negative_quadratic_coefficient",
         "stagnation points exist from t = 0 and the event time marks a merger, "
         "not a birth; such runs report inconclusive"}};

    ordered_json pts = ordered_json::array();
    for (const CertifiedPoint& cp : ev.points) {
        ordered_json p;
        p["location"] = ordered_json::array({cp.location.x1, cp.location.x2});
        p["jacobian"] = mat_json(cp.jacobian);
        ordered_json cl;
        cl["index_is_zero"] = cp.checklist.index_is_zero;
        cl["jacobian_nonzero"] = cp.checklist.jacobian_nonzero;
        cl["transversality_nonzero"] = cp.checklist.transversality_nonzero;
        cl["all_pass"] = cp.checklist.all_pass();
        cl["index"] = cp.checklist.index;
        cl["transversality"] = cp.checklist.transversality;
        if (cp.checklist.structure) {
            cl["e1"] = ordered_json::array(
                {cp.checklist.structure->e1.x1, cp.checklist.structure->e1.x2});
            cl["e2"] = ordered_json::array(
                {cp.checklist.structure->e2.x1, cp.checklist.structure->e2.x2});
            cl["alpha"] = cp.checklist.structure->alpha;
        }
        if (!cp.checklist.note.empty()) cl["note"] = cp.checklist.note;
        p["checklist"] = cl;
        pts.push_back(p);
    }
    j["points"] = pts;
    j["note"] = ev.note;
    return j;
}

}  // namespace intersep::predictor
