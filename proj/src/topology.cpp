#include "intersep/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace intersep::topo {

using fields::Mat2;
using fields::Vec2;

Mat2 PointField::jacobian_at(Vec2 p) const {
    if (jacobian) return jacobian(p);
    const double h = fd_step;
    Vec2 vpx = value({p.x1 + h, p.x2});
    Vec2 vmx = value({p.x1 - h, p.x2});
    Vec2 vpy = value({p.x1, p.x2 + h});
    Vec2 vmy = value({p.x1, p.x2 - h});
    return {(vpx.x1 - vmx.x1) / (2.0 * h), (vpy.x1 - vmy.x1) / (2.0 * h),
            (vpx.x2 - vmx.x2) / (2.0 * h), (vpy.x2 - vmy.x2) / (2.0 * h)};
}

PointField PointField::from(const fields::VectorField& w) {
    fields::JacobianExpr jac = fields::jacobian(w);
    PointField f;
    f.value = [w](Vec2 p) { return w.eval(p); };
    f.jacobian = [jac](Vec2 p) { return jac.eval(p); };
    return f;
}

namespace {

struct NewtonOutcome {
    Vec2 x;
    double fnorm = std::numeric_limits<double>::infinity();
};

/// Damped Newton iteration with a Levenberg-style normal-equation step when
/// the Jacobian is (nearly) singular. Runs until the residual stops
/// improving or the step stalls; folds and other degenerate roots converge
/// linearly, so the iteration budget is generous.
NewtonOutcome newton_from(const PointField& field, Vec2 x0, const fields::Window& window) {
    Vec2 x = x0;
    Vec2 v = field.value(x);
    double fn = v.norm();
    const double bail = 4.0 * std::hypot(window.width(), window.height());
    const Vec2 center{0.5 * (window.xmin + window.xmax), 0.5 * (window.ymin + window.ymax)};

    for (int iter = 0; iter < 60; ++iter) {
        if (!std::isfinite(fn) || fn == 0.0) break;
        if ((x - center).norm() > bail) break;  // runaway iterate

        Mat2 J = field.jacobian_at(x);
        double jf2 = J.a11 * J.a11 + J.a12 * J.a12 + J.a21 * J.a21 + J.a22 * J.a22;
        double det = J.det();
        Vec2 d;
        if (std::abs(det) > 1e-13 * std::max(jf2, 1e-300)) {
            d = {(-v.x1 * J.a22 + v.x2 * J.a12) / det,
                 (-v.x2 * J.a11 + v.x1 * J.a21) / det};
        } else {
            // (J^T J + lambda I) d = -J^T v
            double lam = 1e-12 * jf2 + 1e-300;
            double a = J.a11 * J.a11 + J.a21 * J.a21 + lam;
            double b = J.a11 * J.a12 + J.a21 * J.a22;
            double c = J.a12 * J.a12 + J.a22 * J.a22 + lam;
            Vec2 g = {J.a11 * v.x1 + J.a21 * v.x2, J.a12 * v.x1 + J.a22 * v.x2};
            double det2 = a * c - b * b;
            if (!(std::abs(det2) > 0.0) || !std::isfinite(det2)) break;
            d = {(-g.x1 * c + g.x2 * b) / det2, (-g.x2 * a + g.x1 * b) / det2};
        }
        if (!std::isfinite(d.x1) || !std::isfinite(d.x2)) break;

        double damp = 1.0;
        bool improved = false;
        Vec2 xn{}, vn{};
        double fnn = fn;
        for (int halving = 0; halving < 16; ++halving) {
            xn = {x.x1 + damp * d.x1, x.x2 + damp * d.x2};
            vn = field.value(xn);
            fnn = vn.norm();
            if (std::isfinite(fnn) && fnn < fn) {
                improved = true;
                break;
            }
            damp *= 0.5;
        }
        if (!improved) break;  // local minimum of |v| away from zero, or noise floor
        double moved = damp * std::hypot(d.x1, d.x2);
        x = xn;
        v = vn;
        fn = fnn;
        if (moved <= 1e-15 * (1.0 + x.norm())) break;
    }
    return {x, fn};
}

}  // namespace

std::vector<Vec2> find_singular_points(const PointField& field, const fields::Window& window,
                                       int seed_density, const Tolerances& tol) {
    if (seed_density < 8) {
        throw std::invalid_argument("find_singular_points: seed_density must be at least 8, got " +
                                    std::to_string(seed_density));
    }
    if (!window.valid()) {
        throw std::invalid_argument("find_singular_points: window is empty");
    }

    std::vector<Vec2> accepted;
    const double pad = 1e-9 * (1.0 + std::max(window.width(), window.height()));
    for (int j = 0; j < seed_density; ++j) {
        double x2 = window.ymin + (j + 0.5) * window.height() / seed_density;
        for (int i = 0; i < seed_density; ++i) {
            double x1 = window.xmin + (i + 0.5) * window.width() / seed_density;
            NewtonOutcome out = newton_from(field, {x1, x2}, window);
            if (out.fnorm <= tol.root_tol && window.contains(out.x, pad)) {
                accepted.push_back(out.x);
            }
        }
    }

    auto lexicographic = [](Vec2 a, Vec2 b) {
        if (a.x1 != b.x1) return a.x1 < b.x1;
        return a.x2 < b.x2;
    };
    std::sort(accepted.begin(), accepted.end(), lexicographic);

    // Merge points within merge_radius of a cluster anchor and report the
    // cluster centroid: converged copies of one root average their rounding
    // noise away, and a fold pair split only by arithmetic in the field's
    // coefficients collapses onto the fold point itself.
    std::vector<Vec2> unique;
    std::vector<Vec2> sums;
    std::vector<int> counts;
    for (Vec2 r : accepted) {
        bool merged = false;
        for (size_t m = 0; m < unique.size(); ++m) {
            if ((r - unique[m]).norm() <= tol.merge_radius) {
                sums[m] = sums[m] + r;
                counts[m] += 1;
                merged = true;
                break;
            }
        }
        if (!merged) {
            unique.push_back(r);
            sums.push_back(r);
            counts.push_back(1);
        }
    }
    std::vector<Vec2> centroids;
    centroids.reserve(unique.size());
    for (size_t m = 0; m < unique.size(); ++m) {
        centroids.push_back({sums[m].x1 / counts[m], sums[m].x2 / counts[m]});
    }
    std::sort(centroids.begin(), centroids.end(), lexicographic);
    return centroids;
}

int poincare_index(const PointField& field, Vec2 center, double radius, int samples) {
    if (samples < 8) {
        throw std::invalid_argument("poincare_index: samples must be at least 8, got " +
                                    std::to_string(samples));
    }
    if (!(radius > 0.0)) {
        throw std::invalid_argument("poincare_index: radius must be positive");
    }
    constexpr double kZeroTol = 1e-9;
    const double two_pi = 2.0 * M_PI;

    // The closing sample at angle 2 pi is evaluated fresh rather than reused,
    // so inconsistent field evaluations surface in the winding residue
    // instead of being silently absorbed by an assumed closure.
    std::vector<Vec2> vals(static_cast<size_t>(samples) + 1);
    for (int k = 0; k <= samples; ++k) {
        double th = two_pi * k / samples;
        Vec2 p{center.x1 + radius * std::cos(th), center.x2 + radius * std::sin(th)};
        Vec2 v = field.value(p);
        if (!(v.norm() > kZeroTol)) {
            std::ostringstream msg;
            msg << "inconclusive: field magnitude " << v.norm() << " at loop angle " << th
                << " is not clearly nonzero; shrink or move the loop";
            throw IndexError(msg.str());
        }
        vals[static_cast<size_t>(k)] = v;
    }

    double sum = 0.0;
    for (int k = 1; k <= samples; ++k) {
        Vec2 a = vals[static_cast<size_t>(k) - 1];
        Vec2 b = vals[static_cast<size_t>(k)];
        sum += std::atan2(fields::cross(a, b), fields::dot(a, b));
    }
    double winding = sum / two_pi;
    double nearest = std::nearbyint(winding);
    double residue = std::abs(winding - nearest);
    if (!(residue < 0.1)) {
        std::ostringstream msg;
        msg << "undersampled: winding number " << winding << " has rounding residue " << residue
            << " (>= 0.1); increase the loop sampling";
        throw IndexError(msg.str());
    }
    return static_cast<int>(nearest);
}

EigenStructure eigen_structure(const Mat2& J, const Tolerances& tol) {
    const double fro = J.frobenius();
    if (fro <= tol.mat_tol) {
        std::ostringstream msg;
        msg << "zero_matrix: ||J||_F = " << fro << " is below " << tol.mat_tol;
        throw EigenError(msg.str());
    }
    const double det = J.det();
    if (std::abs(det) > tol.det_tol * fro * fro) {
        std::ostringstream msg;
        msg << "not-rank-one: |det J| = " << std::abs(det) << " exceeds " << tol.det_tol
            << " * ||J||_F^2 (matrix is nondegenerate)";
        throw EigenError(msg.str());
    }

    // null direction, taken from the row with the larger norm for stability
    double row1 = std::hypot(J.a11, J.a12);
    double row2 = std::hypot(J.a21, J.a22);
    Vec2 e1 = row1 >= row2 ? Vec2{J.a12, -J.a11} : Vec2{J.a22, -J.a21};
    double n = e1.norm();
    e1 = {e1.x1 / n, e1.x2 / n};

    // sign convention: first component nonnegative; ties break toward
    // nonnegative second component
    constexpr double kTie = 1e-14;
    if (e1.x1 < -kTie || (std::abs(e1.x1) <= kTie && e1.x2 < 0.0)) {
        e1 = {-e1.x1, -e1.x2};
    }
    if (std::abs(e1.x1) <= kTie && e1.x1 == 0.0) e1.x1 = 0.0;  // normalize -0

    Vec2 e2{-e1.x2, e1.x1};
    Vec2 je2 = J.apply(e2);
    double alpha = fields::dot(je2, e1);
    Vec2 resid = je2 - alpha * e1;
    if (resid.norm() > tol.det_tol * fro) {
        std::ostringstream msg;
        msg << "not-rank-one: J e2 is not parallel to e1 (off-direction residual "
            << resid.norm() << ")";
        throw EigenError(msg.str());
    }
    if (std::abs(alpha) <= tol.mat_tol) {
        throw EigenError("not-rank-one: J e2 is numerically zero, no crossing direction");
    }
    return {e1, e2, alpha};
}

SingularPointReport report_singular_point(const PointField& field, Vec2 location,
                                          const Tolerances& tol) {
    SingularPointReport rep;
    rep.location = location;
    rep.jacobian = field.jacobian_at(location);
    rep.det = rep.jacobian.det();
    rep.frobenius = rep.jacobian.frobenius();
    rep.index = poincare_index(field, location, tol.index_radius, tol.index_samples);

    if (rep.frobenius <= tol.mat_tol) {
        rep.kind = "zero_matrix";
    } else if (std::abs(rep.det) <= tol.det_tol * rep.frobenius * rep.frobenius) {
        rep.kind = "degenerate_nonzero";
        try {
            rep.structure = eigen_structure(rep.jacobian, tol);
        } catch (const EigenError&) {
            // rank one but without the nilpotent split; leave structure empty
        }
    } else if (rep.det < 0.0) {
        rep.kind = "saddle";
    } else if (rep.jacobian.trace() * rep.jacobian.trace() >= 4.0 * rep.det) {
        rep.kind = "node";
    } else {
        rep.kind = "focus_or_center";
    }
    return rep;
}

SeparationChecklist separation_checklist(const taylor::FirstOrderField& fof, Vec2 x0,
                                         double t0, const Tolerances& tol) {
    Vec2 v = fof.eval(x0, t0);
    if (v.norm() > tol.root_tol) {
        std::ostringstream msg;
        msg << "separation_checklist: (x0, t0) is not a root of the first-order field "
            << "(|v| = " << v.norm() << " > " << tol.root_tol << "); polish the root first";
        throw std::invalid_argument(msg.str());
    }

    PointField frozen = PointField::from(fof.at_time(t0));
    SeparationChecklist cl;
    cl.index = poincare_index(frozen, x0, tol.index_radius, tol.index_samples);
    cl.index_is_zero = (cl.index == 0);

    Mat2 J = frozen.jacobian_at(x0);
    cl.jacobian_nonzero = J.frobenius() > tol.mat_tol;
    try {
        EigenStructure es = eigen_structure(J, tol);
        cl.structure = es;
        cl.transversality = taylor::transversality(fof, x0, es.e2);
        cl.transversality_nonzero = std::abs(cl.transversality) > tol.trans_tol;
    } catch (const EigenError& e) {
        cl.note = e.what();
    }
    return cl;
}

bool regularity_screen(const PointField& field, const fields::Window& window,
                       int seed_density, const Tolerances& tol) {
    std::vector<Vec2> roots = find_singular_points(field, window, seed_density, tol);
    for (Vec2 r : roots) {
        Mat2 J = field.jacobian_at(r);
        double fro = J.frobenius();
        if (fro <= tol.mat_tol) return false;
        if (std::abs(J.det()) <= tol.det_tol * fro * fro) return false;
    }
    return true;
}

}  // namespace intersep::topo
