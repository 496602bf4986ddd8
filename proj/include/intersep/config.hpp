#pragma once

#include <stdexcept>
#include <string>

#include "intersep/model.hpp"

namespace intersep::config {

/// Raised for any malformed scenario configuration: unknown key, missing
/// section, unparsable value. The message names the offending item.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses the scenario configuration format:
///
///   [constants]          mu, kappa, beta, delta, L, theta
///   [fields]             psi1, psi2, T0, F1, F2, Q   (field grammar)
///   [window]             xmin, xmax, ymin, ymax
///
/// '#' and ';' start comments. Sections [constants]/[fields]/[window] are
/// required; kappa, delta, F1, F2 and Q may be omitted (default 0).
/// Unknown sections or keys are errors, not warnings.
model::Scenario parse_scenario(const std::string& text);

model::Scenario load_scenario_file(const std::string& path);

/// Canonical plain-text form of a scenario (constants at full precision,
/// fields printed in the grammar). Hash input and reproducibility anchor.
std::string canonical_serialization(const model::Scenario& s);

/// FNV-1a 64-bit hash, hex encoded; stable across runs and platforms.
std::string fnv1a_hex(const std::string& bytes);

inline std::string scenario_hash(const model::Scenario& s) {
    return fnv1a_hex(canonical_serialization(s));
}

}  // namespace intersep::config
