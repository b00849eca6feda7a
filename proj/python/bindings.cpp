#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "mmst/analysis.hpp"
#include "mmst/ensemble.hpp"
#include "mmst/errors.hpp"
#include "mmst/model.hpp"
#include "mmst/quantum_cis.hpp"
#include "mmst/scenarios.hpp"
#include "mmst/trajectory.hpp"

namespace py = pybind11;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

py::array_t<double> to_matrix(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    py::array_t<double> a({rows, cols});
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

py::array_t<double> to_matrix(const std::vector<std::vector<double>>& v) {
    const std::size_t cols = v.empty() ? 0 : v.front().size();
    py::array_t<double> a({v.size(), cols});
    auto* out = a.mutable_data();
    for (const auto& row : v) out = std::copy(row.begin(), row.end(), out);
    return a;
}

py::dict fit_dict(const mmst::FitResult& f) {
    py::dict d;
    d["model"] = mmst::fit_model_name(f.model);
    d["k"] = f.k;
    d["intercept"] = f.intercept;
    d["amplitude"] = f.amplitude;
    d["k_slow"] = f.k_slow;
    d["k_fast"] = f.k_fast;
    d["t_begin"] = f.t_begin;
    d["t_end"] = f.t_end;
    d["residual"] = f.residual;
    d["r_squared"] = f.r_squared;
    d["converged"] = f.converged;
    d["degenerate"] = f.degenerate;
    d["points"] = f.points;
    return d;
}

py::dict run_quantum(const mmst::SystemConfig& config, std::optional<std::vector<double>> times,
                     std::vector<double> snapshots) {
    const auto t = times ? *times : mmst::output_times(config);
    mmst::QuantumSeries q;
    {
        py::gil_scoped_release release;
        const mmst::CavityModel model(config);
        q = mmst::run_quantum_reference(model, t, snapshots);
    }
    py::dict d;
    d["times"] = to_array(q.times);
    d["populations"] = to_matrix(q.populations, q.times.size(), config.tls_count());
    d["snapshot_times"] = to_array(q.snapshot_times);
    d["intensity"] = to_matrix(q.intensity);
    return d;
}

py::dict run_ensemble(const mmst::SystemConfig& config, std::size_t trajectories, std::uint64_t seed,
                      const std::string& propagator, const std::string& sampling, std::optional<double> gamma,
                      std::vector<double> snapshots, bool free_field_control, std::size_t threads) {
    mmst::EnsembleRequest req;
    req.trajectories = trajectories;
    req.seed = seed;
    req.propagator = mmst::propagator_from_name(propagator);
    req.sampling = mmst::SamplingOptions::from_name(sampling, gamma.value_or(config.gamma));
    req.snapshot_times = std::move(snapshots);
    req.free_field_control = free_field_control;
    req.threads = threads;

    mmst::PopulationSeries pop;
    mmst::IntensitySeries inten;
    std::size_t completed = 0, failed = 0;
    {
        py::gil_scoped_release release;
        const mmst::CavityModel model(config);
        const auto res = mmst::run_ensemble(model, req);
        pop = mmst::population_estimate(res);
        if (!res.snapshot_times.empty()) inten = mmst::intensity_estimate(res, model);
        completed = res.completed();
        failed = res.failed;
    }
    py::dict d;
    d["times"] = to_array(pop.times);
    d["rho"] = to_matrix(pop.rho, pop.times.size(), pop.tls_count);
    d["stderr"] = to_matrix(pop.std_error, pop.times.size(), pop.tls_count);
    d["completed"] = completed;
    d["failed"] = failed;
    d["r"] = to_array(inten.r);
    d["snapshot_times"] = to_array(inten.times);
    d["intensity"] = to_matrix(inten.intensity);
    d["intensity_stderr"] = to_matrix(inten.std_error);
    return d;
}

py::dict run_scenario(const std::string& name, const std::string& out_dir, std::uint64_t seed, bool desk_scale,
                      std::optional<std::size_t> trajectories, std::size_t threads) {
    auto sc = mmst::catalog_scenario(name);
    if (desk_scale) mmst::apply_desk_scale(sc);
    mmst::RunOverrides ov;
    ov.trajectories = trajectories;
    mmst::apply_overrides(sc, ov);
    mmst::RunOptions opt;
    opt.out_dir = out_dir;
    opt.seed = seed;
    opt.threads = threads;
    opt.desk_scale = desk_scale;
    mmst::ScenarioReport rep;
    {
        py::gil_scoped_release release;
        rep = mmst::run_scenario(sc, opt);
    }
    py::list variants;
    for (const auto& v : rep.variants) {
        py::dict d;
        d["label"] = v.label;
        d["trajectories"] = v.trajectories;
        d["completed"] = v.completed;
        d["failed"] = v.failed;
        py::list fits;
        for (const auto& f : v.fits) fits.append(fit_dict(f));
        d["fits"] = fits;
        d["warnings"] = v.warnings;
        variants.append(d);
    }
    py::dict out;
    out["name"] = rep.name;
    out["config_hash"] = rep.config_hash;
    out["wall_seconds"] = rep.wall_seconds;
    out["variants"] = variants;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "MMST cavity core";
    py::register_exception<mmst::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<mmst::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<mmst::SystemConfig>(m, "SystemConfig")
        .def(py::init<>())
        .def_readwrite("length", &mmst::SystemConfig::length)
        .def_readwrite("mode_count", &mmst::SystemConfig::mode_count)
        .def_readwrite("first_mode", &mmst::SystemConfig::first_mode)
        .def_readwrite("omega0", &mmst::SystemConfig::omega0)
        .def_readwrite("mu_ge", &mmst::SystemConfig::mu_ge)
        .def_readwrite("positions", &mmst::SystemConfig::positions)
        .def_readwrite("initially_excited", &mmst::SystemConfig::initially_excited)
        .def_readwrite("grid_points", &mmst::SystemConfig::grid_points)
        .def_readwrite("dt_divisor", &mmst::SystemConfig::dt_divisor)
        .def_readwrite("sigma", &mmst::SystemConfig::sigma)
        .def_readwrite("gamma", &mmst::SystemConfig::gamma)
        .def_readwrite("t_final", &mmst::SystemConfig::t_final)
        .def_readwrite("output_interval", &mmst::SystemConfig::output_interval)
        .def_property_readonly("dx", &mmst::SystemConfig::dx)
        .def_property_readonly("dt", &mmst::SystemConfig::dt)
        .def_property_readonly("tls_count", &mmst::SystemConfig::tls_count)
        .def("validate", [](const mmst::SystemConfig& c) { mmst::CavityModel{c}; })
        .def("__repr__", [](const mmst::SystemConfig& c) {
            return "SystemConfig(M=" + std::to_string(c.mode_count) + ", first_mode=" + std::to_string(c.first_mode) +
                   ", grid_points=" + std::to_string(c.grid_points) + ", tls=" + std::to_string(c.tls_count()) + ")";
        });

    py::class_<mmst::FitResult>(m, "FitResult")
        .def_readonly("k", &mmst::FitResult::k)
        .def_readonly("intercept", &mmst::FitResult::intercept)
        .def_readonly("amplitude", &mmst::FitResult::amplitude)
        .def_readonly("k_slow", &mmst::FitResult::k_slow)
        .def_readonly("k_fast", &mmst::FitResult::k_fast)
        .def_readonly("r_squared", &mmst::FitResult::r_squared)
        .def_readonly("degenerate", &mmst::FitResult::degenerate)
        .def_readonly("converged", &mmst::FitResult::converged)
        .def_property_readonly("model", [](const mmst::FitResult& f) { return mmst::fit_model_name(f.model); })
        .def("as_dict", &fit_dict);

    m.def("centered_first_mode", &mmst::centered_first_mode, py::arg("length"), py::arg("omega0"), py::arg("count"));
    m.def("fgr_rate", &mmst::fgr_rate, py::arg("omega0"), py::arg("mu_ge"));
    m.def(
        "mode_frequencies", [](const mmst::SystemConfig& c) { return to_array(mmst::build_mode_basis(c).omega); },
        py::arg("config"));

    m.def("run_quantum", &run_quantum, py::arg("config"), py::arg("times") = py::none(),
          py::arg("snapshot_times") = std::vector<double>{},
          "Exact single-excitation reference; returns times, populations [t, tls] and intensity snapshots.");
    m.def("run_ensemble", &run_ensemble, py::arg("config"), py::arg("trajectories"), py::arg("seed") = 0,
          py::arg("propagator") = "fdtd", py::arg("sampling") = "both", py::arg("gamma") = py::none(),
          py::arg("snapshot_times") = std::vector<double>{}, py::arg("free_field_control") = false,
          py::arg("threads") = 0,
          "MMST ensemble average; returns times, rho and stderr [t, tls] plus optional intensity snapshots.");

    // spans do not convert from Python sequences; go through vectors
    using Vec = std::vector<double>;
    m.def(
        "fit_exponential",
        [](const Vec& t, const Vec& rho, double a, double b, bool fix) { return mmst::fit_exponential(t, rho, a, b, fix); }, py::arg("t"), py::arg("rho"), py::arg("t_begin"),
          py::arg("t_end"), py::arg("fix_intercept") = false);
    m.def(
        "fit_biexponential",
        [](const Vec& t, const Vec& rho, std::size_t starts) { return mmst::fit_biexponential(t, rho, starts); }, py::arg("t"), py::arg("rho"), py::arg("starts") = 8);
    m.def(
        "effective_rate", [](const Vec& t, const Vec& rho, double a, double b) { return mmst::effective_rate(t, rho, a, b); }, py::arg("t"), py::arg("rho"), py::arg("t_begin"),
          py::arg("t_end"));
    m.def(
        "delay_time",
        [](const Vec& t, const Vec& rho, double w, double end) { return mmst::delay_time(t, rho, w, end); }, py::arg("t"), py::arg("rho"), py::arg("smoothing_width") = 0.05,
          py::arg("window_end") = std::numeric_limits<double>::infinity());
    m.def(
        "delay_reference",
        [](std::size_t n, double k) {
            const auto s = mmst::delay_reference(n, k);
            return py::make_tuple(s.reference_mean, s.reference_std);
        },
        py::arg("n"), py::arg("k"), "Mean and spread of the Dicke delay time.");
    m.def(
        "dicke_ladder_population",
        [](std::size_t n, double k, const Vec& t) { return to_array(mmst::dicke_ladder_population(n, k, t)); },
        py::arg("n"), py::arg("k"), py::arg("t"));

    m.def("scenario_names", &mmst::scenario_names);
    m.def("run_scenario", &run_scenario, py::arg("name"), py::arg("out_dir"), py::arg("seed") = 0,
          py::arg("desk_scale") = true, py::arg("trajectories") = py::none(), py::arg("threads") = 0,
          "Run a built-in scenario and write its CSVs and manifest.json to out_dir.");

    m.attr("__version__") = MMST_PY_VERSION;
}
