// mmst: run a named scenario or a config file and write CSV output.
//
// Exit codes: 0 ok, 1 bad configuration or arguments, 2 numerical failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mmst/errors.hpp"
#include "mmst/scenarios.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"MMST spontaneous and collective emission in a 1D cavity"};
    std::string scenario_name;
    std::string config_file;
    std::optional<std::size_t> trajectories;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::optional<std::string> propagator;
    std::optional<std::string> sampling;
    std::optional<double> gamma;
    bool quantum = false;
    std::string out = "out";
    bool desk = false;
    bool list = false;

    auto* sc = app.add_option("--scenario", scenario_name, "built-in scenario (see --list)");
    auto* cf = app.add_option("--config", config_file, "INI config file")->check(CLI::ExistingFile);
    sc->excludes(cf);
    app.add_option("--trajectories", trajectories, "number of trajectories per variant");
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--threads", threads, "worker threads, 0 = all cores")->capture_default_str();
    app.add_option("--propagator", propagator, "fdtd or modes");
    app.add_option("--sample", sampling, "both, electronic, photonic or none");
    app.add_option("--gamma", gamma, "electronic ZPE parameter");
    app.add_flag("--quantum", quantum, "also run the quantum reference");
    app.add_option("--out", out, "output directory")->capture_default_str();
    app.add_flag("--desk-scale", desk, "100 centred modes, 1001 nodes, reduced counts");
    app.add_flag("--list", list, "list built-in scenarios and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (list) {
        for (const auto& name : mmst::scenario_names())
            std::printf("%-6s %s\n", name.c_str(), mmst::catalog_scenario(name).description.c_str());
        return 0;
    }
    if (scenario_name.empty() && config_file.empty()) {
        std::cerr << "error: one of --scenario or --config is required\n";
        return 1;
    }

    try {
        mmst::Scenario s = config_file.empty() ? mmst::catalog_scenario(scenario_name) : mmst::parse_config(config_file);
        if (desk) mmst::apply_desk_scale(s);
        mmst::RunOverrides o;
        o.trajectories = trajectories;
        if (propagator) o.propagator = mmst::propagator_from_name(*propagator);
        o.sampling = sampling;
        o.gamma = gamma;
        o.quantum = quantum;
        mmst::apply_overrides(s, o);

        mmst::RunOptions opts;
        opts.out_dir = out;
        opts.seed = seed;
        opts.threads = threads;
        opts.desk_scale = desk;
        opts.log = &std::cerr;
        const auto report = mmst::run_scenario(s, opts);
        for (const auto& v : report.variants) {
            std::printf("%s%s%s: %zu/%zu trajectories completed\n", report.name.c_str(), v.label.empty() ? "" : "/",
                        v.label.c_str(), v.completed, v.trajectories);
            for (const auto& f : v.fits) {
                if (f.model == mmst::FitModel::biexponential)
                    std::printf("  biexp fit: A=%.4f k_s=%.4f k_f=%.4f%s\n", f.amplitude, f.k_slow, f.k_fast,
                                f.degenerate ? " (degenerate)" : "");
                else
                    std::printf("  exp fit on [%.3f, %.3f]: k=%.4f B=%.4f\n", f.t_begin, f.t_end, f.k, f.intercept);
            }
            if (v.delays)
                std::printf("  delay: mean %.4f std %.4f (reference %.4f / %.4f)\n", v.delays->mean,
                            v.delays->std_dev, v.delays->reference_mean, v.delays->reference_std);
        }
        std::printf("wrote %s (%.1f s)\n", out.c_str(), report.wall_seconds);
        return 0;
    } catch (const mmst::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const mmst::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
