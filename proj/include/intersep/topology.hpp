#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "intersep/fields.hpp"
#include "intersep/taylor.hpp"

namespace intersep::topo {

/// Numerical thresholds shared by the point-field diagnostics. Defaults are
/// the certified values used throughout the toolkit; tests pin them.
struct Tolerances {
    double root_tol = 1e-9;       // |v| at an accepted root
    double det_tol = 1e-7;        // |det J| <= det_tol * ||J||_F^2 -> degenerate
    double mat_tol = 1e-10;       // ||J||_F below this -> zero matrix
    double trans_tol = 1e-8;      // nonzero-ness threshold for alpha, crossing rate
    double merge_radius = 1e-5;   // dedup radius for roots
    double index_radius = 0.1;    // default loop radius for the winding index
    int index_samples = 720;      // default loop sampling
};

/// A numerically evaluable plane vector field with (optionally) its
/// Jacobian; closed-form fields supply the exact Jacobian, sampled fields
/// fall back to central differences with step fd_step.
struct PointField {
    std::function<fields::Vec2(fields::Vec2)> value;
    std::function<fields::Mat2(fields::Vec2)> jacobian;  // may be empty
    double fd_step = 1e-6;

    fields::Mat2 jacobian_at(fields::Vec2 p) const;
    static PointField from(const fields::VectorField& w);
};

class IndexError : public std::runtime_error {
public:
    explicit IndexError(const std::string& what) : std::runtime_error(what) {}
};

/// All roots of the field inside the window: damped Newton (with a
/// Levenberg-style fallback near singular Jacobians) started from a
/// seed_density x seed_density grid, converged to |v| <= root_tol,
/// deduplicated within merge_radius, sorted lexicographically.
std::vector<fields::Vec2> find_singular_points(const PointField& field,
                                               const fields::Window& window,
                                               int seed_density = 16,
                                               const Tolerances& tol = {});

/// Winding number of the field around a circle: samples the loop, sums
/// wrapped angle increments, divides by 2 pi. Throws IndexError when the
/// field (nearly) vanishes on the loop or the rounding residue exceeds 0.1
/// (undersampled loop).
int poincare_index(const PointField& field, fields::Vec2 center, double radius,
                   int samples = 720);

/// Degenerate-direction decomposition of a rank-one Jacobian:
///   J e1 = 0, |e1| = 1 (sign fixed: first nonzero component positive),
///   e2 = rot90(e1), J e2 = alpha e1 with alpha != 0.
/// alpha is invariant under the e1 sign choice.
struct EigenStructure {
    fields::Vec2 e1;
    fields::Vec2 e2;
    double alpha = 0.0;
};

class EigenError : public std::runtime_error {
public:
    explicit EigenError(const std::string& what) : std::runtime_error(what) {}
};

/// Throws EigenError for the zero matrix, for a non-degenerate matrix
/// (|det| above det_tol * ||J||_F^2), and when J e2 fails to align with e1
/// (rank one but without the required nilpotent structure).
EigenStructure eigen_structure(const fields::Mat2& J, const Tolerances& tol = {});

/// Pointwise diagnostic of one singular point.
struct SingularPointReport {
    fields::Vec2 location;
    fields::Mat2 jacobian;
    double det = 0.0;
    double frobenius = 0.0;
    int index = 0;
    /// saddle / node / focus_or_center for regular points,
    /// degenerate_nonzero / zero_matrix otherwise.
    std::string kind;
    std::optional<EigenStructure> structure;  // only for degenerate_nonzero
};

SingularPointReport report_singular_point(const PointField& field, fields::Vec2 location,
                                          const Tolerances& tol = {});

/// The three-part certificate for an interior separation candidate at
/// (x0, t0): index zero, nonzero-but-degenerate Jacobian with the e1/e2
/// split, and a nonzero crossing rate along e2.
struct SeparationChecklist {
    bool index_is_zero = false;
    bool jacobian_nonzero = false;
    bool transversality_nonzero = false;

    int index = 0;
    std::optional<EigenStructure> structure;
    double transversality = 0.0;
    std::string note;  // populated when a check could not be completed

    bool all_pass() const {
        return index_is_zero && jacobian_nonzero && transversality_nonzero;
    }
};

/// Evaluates the checklist for the first-order field at (x0, t0).
/// Pre: x0 is a root of v(., t0) to root_tol (callers polish first).
SeparationChecklist separation_checklist(const taylor::FirstOrderField& fof,
                                         fields::Vec2 x0, double t0,
                                         const Tolerances& tol = {});

/// True when every root of the field in the window has a non-degenerate
/// Jacobian (all singular points are regular).
bool regularity_screen(const PointField& field, const fields::Window& window,
                       int seed_density = 16, const Tolerances& tol = {});

}  // namespace intersep::topo
