#include "intersep/config.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace intersep::config {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
    size_t cut = line.size();
    for (char marker : {'#', ';'}) {
        size_t pos = line.find(marker);
        if (pos != std::string::npos && pos < cut) cut = pos;
    }
    return line.substr(0, cut);
}

using SectionMap = std::map<std::string, std::string>;

struct RawConfig {
    std::map<std::string, SectionMap> sections;
};

RawConfig tokenize(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    std::string current;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string content = trim(strip_comment(line));
        if (content.empty()) continue;
        if (content.front() == '[') {
            if (content.back() != ']') {
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unterminated section header '" + content + "'");
            }
            current = trim(content.substr(1, content.size() - 2));
            if (current != "constants" && current != "fields" && current != "window") {
                throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" +
                                  current + "] (expected constants, fields or window)");
            }
            raw.sections[current];  // register even if empty
            continue;
        }
        size_t eq = content.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                              content + "'");
        }
        if (current.empty()) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": key outside any section; a [constants]/[fields]/[window] header "
                              "must come first");
        }
        std::string key = trim(content.substr(0, eq));
        std::string value = trim(content.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        }
        SectionMap& sec = raw.sections[current];
        if (sec.count(key) != 0) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key +
                              "' in [" + current + "]");
        }
        sec[key] = value;
    }
    return raw;
}

const SectionMap& require_section(const RawConfig& raw, const std::string& name) {
    auto it = raw.sections.find(name);
    if (it == raw.sections.end()) {
        throw ConfigError("missing required section [" + name + "]");
    }
    return it->second;
}

double parse_number(const SectionMap& sec, const std::string& section,
                    const std::string& key, bool required, double fallback) {
    auto it = sec.find(key);
    if (it == sec.end()) {
        if (required) {
            throw ConfigError("missing required key '" + key + "' in [" + section + "]");
        }
        return fallback;
    }
    const std::string& text = it->second;
    try {
        size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) {
            throw ConfigError("key '" + key + "' in [" + section + "]: trailing characters in '" +
                              text + "'");
        }
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' in [" + section + "]: '" + text +
                          "' is not a number");
    }
}

fields::ScalarExpr parse_field(const SectionMap& sec, const std::string& key, bool required) {
    auto it = sec.find(key);
    if (it == sec.end()) {
        if (required) {
            throw ConfigError("missing required key '" + key + "' in [fields]");
        }
        return fields::ScalarExpr(0.0);
    }
    try {
        return fields::parse_expression(it->second);
    } catch (const fields::ParseError& e) {
        throw ConfigError("key '" + key + "' in [fields]: " + std::string(e.what()));
    }
}

void reject_unknown_keys(const SectionMap& sec, const std::string& section,
                         const std::vector<std::string>& known) {
    for (const auto& [key, value] : sec) {
        bool ok = false;
        for (const auto& k : known) {
            if (k == key) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError("unknown key '" + key + "' in [" + section + "]");
        }
    }
}

std::string format_constant(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

model::Scenario parse_scenario(const std::string& text) {
    RawConfig raw = tokenize(text);

    const SectionMap& constants = require_section(raw, "constants");
    const SectionMap& field_sec = require_section(raw, "fields");
    const SectionMap& window_sec = require_section(raw, "window");

    reject_unknown_keys(constants, "constants", {"mu", "kappa", "beta", "delta", "L", "theta"});
    reject_unknown_keys(field_sec, "fields", {"psi1", "psi2", "T0", "F1", "F2", "Q"});
    reject_unknown_keys(window_sec, "window", {"xmin", "xmax", "ymin", "ymax"});

    model::Scenario s;
    s.viscosity = parse_number(constants, "constants", "mu", true, 0.0);
    s.diffusivity = parse_number(constants, "constants", "kappa", false, 0.0);
    s.expansion = parse_number(constants, "constants", "beta", true, 0.0);
    s.offset = parse_number(constants, "constants", "delta", false, 0.0);
    s.length_scale = parse_number(constants, "constants", "L", true, 0.0);
    s.temperature_scale = parse_number(constants, "constants", "theta", true, 0.0);

    s.initial_velocity.c1 = parse_field(field_sec, "psi1", true);
    s.initial_velocity.c2 = parse_field(field_sec, "psi2", true);
    s.initial_temperature = parse_field(field_sec, "T0", true);
    s.initial_force.c1 = parse_field(field_sec, "F1", false);
    s.initial_force.c2 = parse_field(field_sec, "F2", false);
    s.heat_source = parse_field(field_sec, "Q", false);

    s.window.xmin = parse_number(window_sec, "window", "xmin", true, 0.0);
    s.window.xmax = parse_number(window_sec, "window", "xmax", true, 0.0);
    s.window.ymin = parse_number(window_sec, "window", "ymin", true, 0.0);
    s.window.ymax = parse_number(window_sec, "window", "ymax", true, 0.0);

    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

model::Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file '" + path + "'");
    }
    std::ostringstream body;
    body << in.rdbuf();
    return parse_scenario(body.str());
}

std::string canonical_serialization(const model::Scenario& s) {
    std::ostringstream out;
    out << "constants\n";
    out << "mu=" << format_constant(s.viscosity) << "\n";
    out << "kappa=" << format_constant(s.diffusivity) << "\n";
    out << "beta=" << format_constant(s.expansion) << "\n";
    out << "delta=" << format_constant(s.offset) << "\n";
    out << "L=" << format_constant(s.length_scale) << "\n";
    out << "theta=" << format_constant(s.temperature_scale) << "\n";
    out << "fields\n";
    out << "psi1=" << s.initial_velocity.c1.str() << "\n";
    out << "psi2=" << s.initial_velocity.c2.str() << "\n";
    out << "T0=" << s.initial_temperature.str() << "\n";
    out << "F1=" << s.initial_force.c1.str() << "\n";
    out << "F2=" << s.initial_force.c2.str() << "\n";
    out << "Q=" << s.heat_source.str() << "\n";
    out << "window\n";
    out << "xmin=" << format_constant(s.window.xmin) << "\n";
    out << "xmax=" << format_constant(s.window.xmax) << "\n";
    out << "ymin=" << format_constant(s.window.ymin) << "\n";
    out << "ymax=" << format_constant(s.window.ymax) << "\n";
    return out.str();
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= static_cast<std::uint64_t>(c);
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace intersep::config
