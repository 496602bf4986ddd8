#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "intersep/config.hpp"
#include "intersep/model.hpp"
#include "intersep/predictor.hpp"
#include "intersep/taylor.hpp"

namespace py = pybind11;

using namespace intersep;

namespace {

/// Round-trips a serialized report through the stdlib json module so the
/// caller receives plain dicts/lists with the exact report key order.
py::object json_to_py(const std::string& dumped) {
    return py::module_::import("json").attr("loads")(dumped);
}

py::object locate(const model::Scenario& s, double t_max) {
    model::DimensionlessScenario ds = model::nondimensionalize(s);
    predictor::LocateOptions lo;
    lo.t_max = t_max;
    predictor::SeparationEvent ev = predictor::locate_separation(ds, lo);
    predictor::attach_dimensional(ev, s);
    predictor::InterpretationReport interp = predictor::interpretation(ds);
    nlohmann::ordered_json rep =
        predictor::event_report(ev, ds, config::scenario_hash(s), interp);
    return json_to_py(rep.dump());
}

py::dict closed_form_event(double K, double C1, double C2, double C3, double C4) {
    predictor::SeparationEvent ev = predictor::closed_form_canonical(K, C1, C2, C3, C4);
    py::dict out;
    out["verdict"] = predictor::to_string(ev.verdict);
    out["t0"] = ev.time ? py::object(py::float_(*ev.time)) : py::object(py::none());
    if (ev.location) {
        out["x_bar"] = py::make_tuple(ev.location->x1, ev.location->x2);
    } else {
        out["x_bar"] = py::none();
    }
    out["jacobian"] = py::make_tuple(py::make_tuple(ev.jacobian.a11, ev.jacobian.a12),
                                     py::make_tuple(ev.jacobian.a21, ev.jacobian.a22));
    out["index"] = ev.index;
    out["transversality"] = ev.transversality;
    out["zero_count_before"] = ev.zero_count_before;
    out["zero_count_after"] = ev.zero_count_after;
    out["note"] = ev.note;
    return out;
}

py::dict residuals(const model::Scenario& s) {
    model::DimensionlessScenario ds = model::nondimensionalize(s);
    taylor::AssumptionResiduals r = taylor::assumption_residuals(ds);
    py::dict out;
    out["max_abs_divergence"] = r.max_abs_divergence;
    out["max_abs_compatibility"] = r.max_abs_compatibility;
    out["threshold"] = taylor::kResidualThreshold;
    out["within"] = r.within();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "short-time stagnation-birth analysis for heat-coupled planar flow";
#ifdef INTERSEP_VERSION
    m.attr("__version__") = INTERSEP_VERSION;
#else
    m.attr("__version__") = "dev";
#endif

    py::register_exception<config::ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<model::Scenario>(m, "Scenario",
                                "parsed scenario: constants, initial fields, window")
        .def_property_readonly("hash",
                               [](const model::Scenario& s) { return config::scenario_hash(s); })
        .def("__repr__", [](const model::Scenario& s) {
            return "<Scenario " + config::scenario_hash(s) + ">";
        });

    m.def("scenario_from_text", &config::parse_scenario, py::arg("text"),
          "parse a scenario configuration from its text form");
    m.def("locate_separation", &locate, py::arg("scenario"), py::arg("t_max") = 0.25,
          "run the full analysis and return the report as a dict");
    m.def("closed_form_event", &closed_form_event, py::arg("K"), py::arg("C1"),
          py::arg("C2"), py::arg("C3"), py::arg("C4"),
          "closed-form event for the quadratic-jet family");
    m.def("assumption_residuals", &residuals, py::arg("scenario"),
          "structural residual maxima of the short-time model");
}
