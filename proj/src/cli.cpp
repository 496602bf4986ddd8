#include "intersep/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "intersep/config.hpp"
#include "intersep/model.hpp"
#include "intersep/predictor.hpp"
#include "intersep/solver.hpp"
#include "intersep/taylor.hpp"
#include "intersep/topology.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace intersep::cli {

namespace {

std::string utc_stamp() {
    std::time_t now = std::time(nullptr);
    std::tm g{};
#if defined(_WIN32)
    gmtime_s(&g, &now);
#else
    gmtime_r(&now, &g);
#endif
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &g);
    return buf;
}

/// Reads path into out; reports to stderr and returns false on failure.
bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot open scenario file '" << path << "'\n";
        return false;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

/// Loads and parses the scenario named by the common options. Returns
/// kOk on success; any failure is reported to stderr.
int load_scenario(const CommonOptions& common, std::string& raw, model::Scenario& s,
                  model::DimensionlessScenario& ds) {
    if (!read_file(common.config_path, raw)) return kConfigError;
    try {
        s = config::parse_scenario(raw);
    } catch (const config::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }
    ds = model::nondimensionalize(s);
    return kOk;
}

/// Creates out_dir/<name>, appending -2, -3, ... if the name is taken.
std::string make_run_dir(const std::string& out_dir, const std::string& name) {
    fs::path base(out_dir);
    fs::create_directories(base);
    fs::path dir = base / name;
    int suffix = 2;
    while (!fs::create_directory(dir)) {
        dir = base / (name + "-" + std::to_string(suffix));
        ++suffix;
    }
    return dir.string();
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << content;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::string& config_path, const std::string& hash,
                    const std::string& started_utc, double duration_seconds,
                    const std::vector<std::string>& outputs) {
    ordered_json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["config"] = config_path;
    m["scenario_hash"] = hash;
    m["started_utc"] = started_utc;
    m["duration_seconds"] = duration_seconds;
    m["outputs"] = outputs;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

/// Subwindow for stagnation counting: the full window shrunk on each side
/// so the root search never touches the one-sided boundary stencils.
fields::Window counting_window(const fields::Window& w, const solver::Grid2& g) {
    double mx = std::max(0.05 * w.width(), 1.5 * g.hx());
    double my = std::max(0.05 * w.height(), 1.5 * g.hy());
    return {w.xmin + mx, w.xmax - mx, w.ymin + my, w.ymax - my};
}

int count_or_zero(const solver::FieldSnapshot& snap, const fields::Window& sub) {
    try {
        return solver::stagnation_count(snap, sub);
    } catch (const std::domain_error&) {
        return 0;  // identically-zero velocity: nothing to count
    }
}

ordered_json verify_body(const std::optional<double>& predicted,
                         const std::optional<double>& simulated,
                         const std::optional<double>& gap, bool concordant,
                         const std::string& verdict, const std::string& note) {
    ordered_json v;
    v["predicted_t0"] = predicted ? ordered_json(*predicted) : ordered_json(nullptr);
    v["simulated_transition_time"] =
        simulated ? ordered_json(*simulated) : ordered_json(nullptr);
    v["relative_gap"] = gap ? ordered_json(*gap) : ordered_json(nullptr);
    v["concordant"] = concordant;
    v["verdict"] = verdict;
    v["note"] = note;
    return v;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

}  // namespace

std::string run_directory_name(const std::string& config_text) {
    return utc_stamp() + "_" + config::fnv1a_hex(config_text).substr(0, 8);
}

int cmd_predict(const PredictOptions& opts) {
    Timer timer;
    std::string started = utc_stamp();
    std::string raw;
    model::Scenario s;
    model::DimensionlessScenario ds;
    if (int rc = load_scenario(opts.common, raw, s, ds); rc != kOk) return rc;

    std::string dir = make_run_dir(opts.common.out_dir, run_directory_name(raw));
    std::vector<std::string> outputs;

    predictor::LocateOptions lo;
    lo.t_max = opts.t_max;
    predictor::SeparationEvent ev = predictor::locate_separation(ds, lo);
    predictor::attach_dimensional(ev, s);
    predictor::InterpretationReport interp = predictor::interpretation(ds);

    ordered_json report = predictor::event_report(ev, ds, config::scenario_hash(s), interp);
    write_text(fs::path(dir) / "report.json", report.dump(2) + "\n");
    outputs.push_back("report.json");

    if (!opts.common.json_only) {
        taylor::FirstOrderField fof = taylor::first_order_field(ds);
        std::ostringstream csv;
        csv << "t,zero_count\n";
        char line[96];
        for (int k = 0; k <= 32; ++k) {
            double t = opts.t_max * k / 32.0;
            size_t count = topo::find_singular_points(
                               topo::PointField::from(fof.at_time(t)), ds.window)
                               .size();
            std::snprintf(line, sizeof(line), "%.17g,%zu\n", t, count);
            csv << line;
        }
        write_text(fs::path(dir) / "zero_count.csv", csv.str());
        outputs.push_back("zero_count.csv");
    }

    write_manifest(dir, "predict", opts.common.config_path, config::scenario_hash(s),
                   started, timer.seconds(), outputs);
    std::cout << dir << std::endl;
    return ev.verdict == predictor::Verdict::separation_rejected ? kRejected : kOk;
}

int cmd_simulate(const SimulateOptions& opts) {
    Timer timer;
    std::string started = utc_stamp();
    std::string raw;
    model::Scenario s;
    model::DimensionlessScenario ds;
    if (int rc = load_scenario(opts.common, raw, s, ds); rc != kOk) return rc;

    solver::Mode mode;
    std::optional<solver::Grid2> grid;
    std::optional<solver::SolverConfig> cfg;
    double end = opts.end_time.value_or(0.1);
    try {
        mode = solver::mode_from_string(opts.mode);
        grid.emplace(opts.grid, opts.grid, ds.window);
        double dt = 0.5 * solver::SolverConfig::stability_limit(*grid);
        long steps = end > 0.0 ? static_cast<long>(std::ceil(end / dt - 1e-9)) : 0;
        int stride = static_cast<int>(std::max(1L, steps / 40));
        cfg.emplace(*grid, mode, dt, end, stride);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }

    std::string dir = make_run_dir(opts.common.out_dir, run_directory_name(raw));
    std::vector<std::string> outputs;

    solver::RunResult res = solver::run(ds, *grid, *cfg);

    std::vector<std::string> files;
    if (!opts.common.json_only) {
        char name[32];
        for (size_t k = 0; k < res.snapshots.size(); ++k) {
            std::snprintf(name, sizeof(name), "snap_%03zu.csv", k);
            solver::write_snapshot_csv(res.snapshots[k], (fs::path(dir) / name).string());
            files.push_back(name);
            outputs.push_back(name);
        }
    }

    ordered_json index = solver::snapshot_index(files, res.snapshots, mode);
    index["blew_up"] = res.blew_up;
    if (res.blew_up) index["error"] = res.error;
    write_text(fs::path(dir) / "index.json", index.dump(2) + "\n");
    outputs.push_back("index.json");

    if (!opts.common.json_only) {
        fields::Window sub = counting_window(ds.window, *grid);
        std::ostringstream csv;
        csv << "t,stagnation_count\n";
        char line[96];
        for (const solver::FieldSnapshot& snap : res.snapshots) {
            std::snprintf(line, sizeof(line), "%.17g,%d\n", snap.t,
                          count_or_zero(snap, sub));
            csv << line;
        }
        write_text(fs::path(dir) / "stagnation_timeline.csv", csv.str());
        outputs.push_back("stagnation_timeline.csv");
    }

    write_manifest(dir, "simulate", opts.common.config_path, config::scenario_hash(s),
                   started, timer.seconds(), outputs);
    std::cout << dir << std::endl;
    return res.blew_up ? kNumericalFailure : kOk;
}

int cmd_verify(const VerifyOptions& opts) {
    Timer timer;
    std::string started = utc_stamp();
    std::string raw;
    model::Scenario s;
    model::DimensionlessScenario ds;
    if (int rc = load_scenario(opts.common, raw, s, ds); rc != kOk) return rc;

    solver::Mode mode;
    std::optional<solver::Grid2> grid;
    try {
        mode = solver::mode_from_string(opts.mode);
        grid.emplace(opts.grid, opts.grid, ds.window);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }

    std::string dir = make_run_dir(opts.common.out_dir, run_directory_name(raw));
    std::vector<std::string> outputs;

    predictor::LocateOptions lo;
    lo.t_max = opts.t_max;
    predictor::SeparationEvent ev = predictor::locate_separation(ds, lo);
    predictor::attach_dimensional(ev, s);
    predictor::InterpretationReport interp = predictor::interpretation(ds);
    ordered_json report = predictor::event_report(ev, ds, config::scenario_hash(s), interp);
    write_text(fs::path(dir) / "report.json", report.dump(2) + "\n");
    outputs.push_back("report.json");

    auto finish = [&](const ordered_json& body, int rc) {
        write_text(fs::path(dir) / "verify.json", body.dump(2) + "\n");
        outputs.push_back("verify.json");
        write_manifest(dir, "verify", opts.common.config_path, config::scenario_hash(s),
                       started, timer.seconds(), outputs);
        std::cout << dir << std::endl;
        return rc;
    };

    std::string verdict = predictor::to_string(ev.verdict);
    if (ev.verdict == predictor::Verdict::separation_rejected) {
        return finish(verify_body(ev.time, std::nullopt, std::nullopt, false, verdict,
                                  "prediction rejected: " + ev.note),
                      kRejected);
    }

    double end = opts.end_time.value_or(ev.time ? 1.3 * *ev.time : 0.1);
    solver::RunResult res;
    try {
        double dt = 0.5 * solver::SolverConfig::stability_limit(*grid);
        long steps = end > 0.0 ? static_cast<long>(std::ceil(end / dt - 1e-9)) : 0;
        int stride = static_cast<int>(std::max(1L, steps / 40));
        solver::SolverConfig cfg(*grid, mode, dt, end, stride);
        res = solver::run(ds, *grid, cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return finish(verify_body(ev.time, std::nullopt, std::nullopt, false, verdict,
                                  std::string("invalid simulation setup: ") + e.what()),
                      kConfigError);
    }

    if (res.blew_up) {
        return finish(verify_body(ev.time, std::nullopt, std::nullopt, false, verdict,
                                  "simulation blew up: " + res.error),
                      kNumericalFailure);
    }

    fields::Window sub = counting_window(ds.window, *grid);
    std::optional<double> transition;
    for (const solver::FieldSnapshot& snap : res.snapshots) {
        if (snap.t > 0.0 && count_or_zero(snap, sub) >= 1) {
            transition = snap.t;
            break;
        }
    }

    if (ev.time && transition) {
        double gap = std::abs(*transition - *ev.time) / *ev.time;
        bool concordant = gap <= 0.25;
        std::ostringstream note;
        note << "predicted t0 = " << *ev.time << ", first simulated stagnation at t = "
             << *transition << " (relative gap " << gap << ")";
        return finish(verify_body(ev.time, transition, gap, concordant, verdict, note.str()),
                      concordant ? kOk : kRejected);
    }
    if (!ev.time && !transition) {
        return finish(verify_body(std::nullopt, std::nullopt, std::nullopt, true, verdict,
                                  "no event predicted and no stagnation observed over the "
                                  "simulated horizon; the scenario is concordantly quiet"),
                      kOk);
    }
    if (ev.time) {
        std::ostringstream note;
        note << "an event was predicted at t0 = " << *ev.time
             << " but the simulation shows no stagnation point up to t = " << end;
        return finish(verify_body(ev.time, std::nullopt, std::nullopt, false, verdict,
                                  note.str()),
                      kRejected);
    }
    std::ostringstream note;
    note << "no event was predicted but the simulation develops a stagnation point at t = "
         << *transition;
    return finish(verify_body(std::nullopt, transition, std::nullopt, false, verdict,
                              note.str()),
                  kRejected);
}

}  // namespace intersep::cli
