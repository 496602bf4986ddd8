#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intersep/model.hpp"
#include "intersep/taylor.hpp"
#include "intersep/topology.hpp"

namespace intersep::predictor {

enum class Verdict { separation_certified, separation_rejected, inconclusive };

std::string to_string(Verdict v);

/// One certified emergence point. Symmetric scenarios can produce several
/// simultaneously; each carries its own certificate.
struct CertifiedPoint {
    fields::Vec2 location;
    fields::Mat2 jacobian;
    topo::SeparationChecklist checklist;
};

/// Outcome of the short-time separation analysis for one scenario.
struct SeparationEvent {
    Verdict verdict = Verdict::inconclusive;
    std::optional<double> time;            // t0, scale-free
    std::optional<fields::Vec2> location;  // x at the event, scale-free
    std::optional<double> time_dimensional;
    std::optional<fields::Vec2> location_dimensional;

    fields::Mat2 jacobian;       // of v(., t0) at the event location
    int index = 0;               // winding number at the event
    double transversality = 0.0; // crossing rate along e2
    int zero_count_before = -1;  // roots at t0 (1 - eps)
    int zero_count_after = -1;   // roots at t0 (1 + eps)

    double max_abs_divergence = 0.0;     // structural residual maxima
    double max_abs_compatibility = 0.0;

    std::vector<CertifiedPoint> points;  // all simultaneous emergence points
    std::string note;                    // human-readable failure/context note
};

struct LocateOptions {
    double t_max = 0.25;         // search horizon in scale-free time
    int scan_samples = 32;       // coarse zero-existence scan resolution
    int seed_density = 16;       // Newton seed grid per zero-existence query
    double t_tol = 1e-6;         // bisection tolerance in t
    double count_eps = 0.05;     // relative offset for before/after counts
    double cluster_radius = 0.2; // groups roots emerging from one fold
    topo::Tolerances tol;
};

/// Finds the first time a root of the first-order field appears inside the
/// window: coarse scan for a bracket, bisection on zero-existence to t_tol,
/// then a fold-system polish (v = 0 and det Dv = 0 jointly) so the reported
/// (x0, t0) satisfies |v(x0, t0)| <= root_tol. Certifies the result with
/// the separation checklist and before/after root counts.
SeparationEvent locate_separation(const model::DimensionlessScenario& ds,
                                  const LocateOptions& opts = {});

/// Closed-form event for the canonical family
///   psi = (0, 1 + C1 x1^2), T0 = C2 + C3 x2, F0 = (C4 x2, 0):
///   t0 = 1 / (K C3 - 2 C1) at the origin, Jacobian [[0, C4 t0], [0, 0]],
///   crossing rate 2 C1 - K C3. Throws std::domain_error when
///   K C3 - 2 C1 <= 0 (no separation in finite forward time).
SeparationEvent closed_form_canonical(double K, double C1, double C2, double C3,
                                      double C4);

/// Constants of the canonical family extracted from a scenario, when the
/// scenario has exactly that structure (checked by sampling).
struct CanonicalConstants {
    double base = 1.0;  // psi2 at the origin
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double C4 = 0.0;
};

std::optional<CanonicalConstants> extract_canonical(const model::DimensionlessScenario& ds);

/// Physical reading of the driving terms: which mechanism dominates and
/// whether the combined drive K C3 - 2 C1 is large.
struct InterpretationReport {
    bool canonical = false;
    std::optional<double> K_C3_minus_2C1;
    bool thermal_dominated = false;   // K C3 >= threshold
    bool velocity_dominated = false;  // -2 C1 >= threshold
    bool magnitude_flag = false;      // K C3 - 2 C1 >= threshold
    double threshold = 10.0;
};

InterpretationReport interpretation(double K, double C1, double C3,
                                    double threshold = 10.0);
InterpretationReport interpretation(const model::DimensionlessScenario& ds,
                                    double threshold = 10.0);

/// Fills the dimensional time/location of an event from the originating
/// scenario's scales.
void attach_dimensional(SeparationEvent& ev, const model::Scenario& s);

/// The report schema written by the predict command. Deterministic: equal
/// scenarios produce byte-identical serializations.
nlohmann::ordered_json event_report(const SeparationEvent& ev,
                                    const model::DimensionlessScenario& ds,
                                    const std::string& scenario_hash,
                                    const InterpretationReport& interp);

}  // namespace intersep::predictor
