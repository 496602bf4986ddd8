#include <doctest.h>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intersep/cli.hpp"

namespace fs = std::filesystem;
using intersep::cli::CommonOptions;
using intersep::cli::PredictOptions;
using intersep::cli::SimulateOptions;
using intersep::cli::VerifyOptions;
using nlohmann::json;

namespace {

const char* kCanonicalK100 = R"(
[constants]
mu = 1.0
kappa = 1.0
beta = 100.0
L = 1.0
theta = 1.0

[fields]
psi1 = 0
psi2 = 1 + x1^2
T0 = 1 + x2
F1 = x2
F2 = 0

[window]
xmin = -2
xmax = 2
ymin = -2
ymax = 2
)";

const char* kCanonicalK20 = R"(
[constants]
mu = 1.0
kappa = 1.0
beta = 20.0
L = 1.0
theta = 1.0

[fields]
psi1 = 0
psi2 = 1 + x1^2
T0 = 1 + x2
F1 = x2
F2 = 0

[window]
xmin = -2
xmax = 2
ymin = -2
ymax = 2
)";

const char* kUniformStream = R"(
[constants]
mu = 1.0
kappa = 1.0
beta = 100.0
L = 1.0
theta = 1.0

[fields]
psi1 = 0
psi2 = 1
T0 = 0
F1 = 0
F2 = 0

[window]
xmin = -2
xmax = 2
ymin = -2
ymax = 2
)";

const char* kDivergent = R"(
[constants]
mu = 1.0
kappa = 1.0
beta = 100.0
L = 1.0
theta = 1.0

[fields]
psi1 = x1
psi2 = 0
T0 = 0
F1 = 0
F2 = 0

[window]
xmin = -2
xmax = 2
ymin = -2
ymax = 2
)";

// certifiable on paper (smooth quadratic data, event at t0 = 0.01) but
// violently advective, so the explicit integrator must blow up
const char* kStiff = R"(
[constants]
mu = 1.0
kappa = 1.0
beta = 1100.0
L = 1.0
theta = 1.0

[fields]
psi1 = 0
psi2 = 1 + 500*x1^2
T0 = 1 + x2
F1 = x2
F2 = 0

[window]
xmin = -2
xmax = 2
ymin = -2
ymax = 2
)";

const char* kMissingConstants = R"(
[fields]
psi1 = 0
psi2 = 1
T0 = 0

[window]
xmin = -2
xmax = 2
ymin = -2
ymax = 2
)";

struct StreamCapture {
    std::ostream& stream;
    std::stringstream buffer;
    std::streambuf* saved;
    explicit StreamCapture(std::ostream& s) : stream(s), saved(s.rdbuf(buffer.rdbuf())) {}
    ~StreamCapture() { stream.rdbuf(saved); }
    std::string text() const { return buffer.str(); }
};

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("separation_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const std::string& name, const char* text) {
    fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

/// Runs fn while capturing stdout; returns {exit code, printed run dir}.
template <typename Fn>
std::pair<int, fs::path> run_command(Fn&& fn) {
    std::string out;
    int code = 0;
    {
        StreamCapture cap(std::cout);
        code = fn();
        out = cap.text();
    }
    std::string last;
    std::stringstream ss(out);
    for (std::string line; std::getline(ss, line);)
        if (!line.empty()) last = line;
    return {code, fs::path(last)};
}

json load_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return json::parse(in);
}

std::vector<std::pair<double, int>> load_timeline(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::pair<double, int>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        rows.emplace_back(std::stod(line.substr(0, comma)),
                          std::stoi(line.substr(comma + 1)));
    }
    return rows;
}

}  // namespace

TEST_CASE("predict: certification, outputs, and determinism") {
    fs::path dir = fresh_dir("predict_ok");
    fs::path cfg = write_config(dir, "scenario.ini", kCanonicalK100);

    PredictOptions opts;
    opts.common.config_path = cfg.string();
    opts.common.out_dir = (dir / "runs").string();
    opts.t_max = 0.05;

    auto [code1, run1] = run_command([&] { return intersep::cli::cmd_predict(opts); });
    CHECK(code1 == intersep::cli::kOk);
    REQUIRE(fs::is_directory(run1));

    json report = load_json(run1 / "report.json");
    CHECK(report["verdict"] == "separation_certified");
    CHECK(report["t0"].get<double>() == doctest::Approx(1.0 / 98.0).epsilon(1e-4));
    CHECK(report["zero_count_before"] == 0);
    CHECK(report["zero_count_after"] == 2);
    CHECK(report["interpretation"]["thermal_dominated"] == true);

    // the sweep starts with no roots and ends with the emerged pair
    auto timeline = load_timeline(run1 / "zero_count.csv");
    REQUIRE(timeline.size() >= 8);
    CHECK(timeline.front().second == 0);
    CHECK(timeline.back().second == 2);

    // manifest lists only files that exist
    json manifest = load_json(run1 / "manifest.json");
    CHECK(manifest["command"] == "predict");
    for (const auto& f : manifest["outputs"]) {
        CAPTURE(f.get<std::string>());
        CHECK(fs::exists(run1 / f.get<std::string>()));
    }

    // a second run reproduces the report byte for byte
    auto [code2, run2] = run_command([&] { return intersep::cli::cmd_predict(opts); });
    CHECK(code2 == intersep::cli::kOk);
    REQUIRE(fs::is_directory(run2));
    CHECK(run1 != run2);
    std::ifstream a(run1 / "report.json"), b(run2 / "report.json");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
}

TEST_CASE("predict: json-only suppresses the sweep file") {
    fs::path dir = fresh_dir("predict_json_only");
    fs::path cfg = write_config(dir, "scenario.ini", kCanonicalK100);
    PredictOptions opts;
    opts.common.config_path = cfg.string();
    opts.common.out_dir = (dir / "runs").string();
    opts.common.json_only = true;
    opts.t_max = 0.05;
    auto [code, run] = run_command([&] { return intersep::cli::cmd_predict(opts); });
    CHECK(code == intersep::cli::kOk);
    CHECK(fs::exists(run / "report.json"));
    CHECK_FALSE(fs::exists(run / "zero_count.csv"));
}

TEST_CASE("predict: rejection and config errors map to distinct exit codes") {
    fs::path dir = fresh_dir("predict_bad");

    PredictOptions divergent;
    divergent.common.config_path = write_config(dir, "divergent.ini", kDivergent).string();
    divergent.common.out_dir = (dir / "runs").string();
    auto [code, run] = run_command([&] { return intersep::cli::cmd_predict(divergent); });
    CHECK(code == intersep::cli::kRejected);
    CHECK(load_json(run / "report.json")["verdict"] == "separation_rejected");

    PredictOptions broken;
    broken.common.config_path =
        write_config(dir, "broken.ini", kMissingConstants).string();
    broken.common.out_dir = (dir / "runs").string();
    std::string message;
    int code2 = 0;
    {
        StreamCapture err(std::cerr);
        StreamCapture out(std::cout);
        code2 = intersep::cli::cmd_predict(broken);
        message = err.text();
    }
    CHECK(code2 == intersep::cli::kConfigError);
    CHECK(message.find("constants") != std::string::npos);

    PredictOptions missing;
    missing.common.config_path = (dir / "does_not_exist.ini").string();
    missing.common.out_dir = (dir / "runs").string();
    StreamCapture err(std::cerr);
    StreamCapture out(std::cout);
    CHECK(intersep::cli::cmd_predict(missing) == intersep::cli::kConfigError);
}

TEST_CASE("predict: a uniform stream is honestly inconclusive with exit 0") {
    fs::path dir = fresh_dir("predict_uniform");
    PredictOptions opts;
    opts.common.config_path =
        write_config(dir, "uniform.ini", kUniformStream).string();
    opts.common.out_dir = (dir / "runs").string();
    auto [code, run] = run_command([&] { return intersep::cli::cmd_predict(opts); });
    CHECK(code == intersep::cli::kOk);
    json report = load_json(run / "report.json");
    CHECK(report["verdict"] == "inconclusive");
    CHECK(report["t0"].is_null());
}

TEST_CASE("simulate: zero-horizon run, timeline transition, and guarded flags") {
    fs::path dir = fresh_dir("simulate");
    fs::path cfg = write_config(dir, "scenario.ini", kCanonicalK20);

    SimulateOptions trivial;
    trivial.common.config_path = cfg.string();
    trivial.common.out_dir = (dir / "runs").string();
    trivial.grid = 33;
    trivial.end_time = 0.0;
    auto [code0, run0] = run_command([&] { return intersep::cli::cmd_simulate(trivial); });
    CHECK(code0 == intersep::cli::kOk);
    json index0 = load_json(run0 / "index.json");
    REQUIRE(index0["snapshots"].size() == 1);
    CHECK(fs::exists(run0 / index0["snapshots"][0]["file"].get<std::string>()));

    SimulateOptions full = trivial;
    full.grid = 65;
    full.end_time = 1.5 / 18.0;
    auto [code1, run1] = run_command([&] { return intersep::cli::cmd_simulate(full); });
    CHECK(code1 == intersep::cli::kOk);
    auto timeline = load_timeline(run1 / "stagnation_timeline.csv");
    REQUIRE(timeline.size() >= 5);
    CHECK(timeline.front().second == 0);
    CHECK(timeline.back().second == 2);

    SimulateOptions bad = trivial;
    bad.grid = 4;
    StreamCapture err(std::cerr);
    StreamCapture out(std::cout);
    CHECK(intersep::cli::cmd_simulate(bad) == intersep::cli::kConfigError);
}

TEST_CASE("simulate: blow-up exits 3 and keeps the stable prefix") {
    fs::path dir = fresh_dir("simulate_blowup");
    SimulateOptions opts;
    opts.common.config_path = write_config(dir, "stiff.ini", kStiff).string();
    opts.common.out_dir = (dir / "runs").string();
    opts.grid = 65;
    opts.end_time = 0.02;
    auto [code, run] = run_command([&] { return intersep::cli::cmd_simulate(opts); });
    CHECK(code == intersep::cli::kNumericalFailure);
    json index = load_json(run / "index.json");
    CHECK(index["blew_up"] == true);
    REQUIRE(!index["snapshots"].empty());
    CHECK(fs::exists(run / index["snapshots"][0]["file"].get<std::string>()));
}

TEST_CASE("verify: concordant prediction on the K=20 scenario") {
    fs::path dir = fresh_dir("verify_ok");
    VerifyOptions opts;
    opts.common.config_path = write_config(dir, "scenario.ini", kCanonicalK20).string();
    opts.common.out_dir = (dir / "runs").string();
    opts.grid = 65;
    auto [code, run] = run_command([&] { return intersep::cli::cmd_verify(opts); });
    CHECK(code == intersep::cli::kOk);
    json v = load_json(run / "verify.json");
    CHECK(v["predicted_t0"].get<double>() == doctest::Approx(1.0 / 18.0).epsilon(1e-3));
    CHECK(v["simulated_transition_time"].get<double>() ==
          doctest::Approx(1.0 / 18.0).epsilon(0.25));
    CHECK(v["relative_gap"].get<double>() <= 0.25);
    CHECK(v["concordant"] == true);
}

TEST_CASE("verify: no event on either side is concordant") {
    fs::path dir = fresh_dir("verify_uniform");
    VerifyOptions opts;
    opts.common.config_path =
        write_config(dir, "uniform.ini", kUniformStream).string();
    opts.common.out_dir = (dir / "runs").string();
    opts.grid = 33;
    opts.end_time = 0.01;
    auto [code, run] = run_command([&] { return intersep::cli::cmd_verify(opts); });
    CHECK(code == intersep::cli::kOk);
    json v = load_json(run / "verify.json");
    CHECK(v["concordant"] == true);
    CHECK(v["predicted_t0"].is_null());
    CHECK(v["note"].get<std::string>().find("no event") != std::string::npos);
}

TEST_CASE("verify: certified prediction with a blown-up simulation exits 3") {
    fs::path dir = fresh_dir("verify_blowup");
    VerifyOptions opts;
    opts.common.config_path = write_config(dir, "stiff.ini", kStiff).string();
    opts.common.out_dir = (dir / "runs").string();
    opts.grid = 65;
    opts.end_time = 0.05;  // ample horizon for the instability to surface
    auto [code, run] = run_command([&] { return intersep::cli::cmd_verify(opts); });
    CHECK(code == intersep::cli::kNumericalFailure);
    CHECK(fs::exists(run / "verify.json"));
}

TEST_CASE("run directories are timestamped and config-addressed") {
    std::string a = intersep::cli::run_directory_name(kCanonicalK100);
    std::string b = intersep::cli::run_directory_name(kCanonicalK20);

    auto underscore = a.find('_');
    REQUIRE(underscore != std::string::npos);
    std::string stamp = a.substr(0, underscore);
    std::string hash = a.substr(underscore + 1);
    CHECK(stamp.size() == 16);  // 20260815T093000Z
    CHECK(stamp[8] == 'T');
    CHECK(stamp.back() == 'Z');
    CHECK(hash.size() == 8);
    for (char c : hash) CHECK(std::isxdigit(static_cast<unsigned char>(c)));

    // same instant, different config -> different directory
    CHECK(a.substr(underscore) != b.substr(b.find('_')));
}
