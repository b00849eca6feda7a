#include "mmst/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "mmst/errors.hpp"

namespace mmst {

ObservationSchedule make_schedule(const SystemConfig& config, std::span<const double> snapshot_times) {
    ObservationSchedule s;
    s.total_steps = config.step_count();
    s.output_stride = config.output_stride();
    const double dt = config.dt();
    for (const double t : snapshot_times) {
        if (t < 0.0) throw ConfigError("snapshot times must be non-negative");
        const auto step = static_cast<std::size_t>(std::llround(t / dt));
        s.snapshot_steps.push_back(std::min(step, s.total_steps));
    }
    return s;
}

std::vector<double> output_times(const SystemConfig& config) {
    const ObservationSchedule s = make_schedule(config);
    std::vector<double> t(s.output_count());
    const double spacing = static_cast<double>(s.output_stride) * config.dt();
    for (std::size_t n = 0; n < t.size(); ++n) t[n] = static_cast<double>(n) * spacing;
    return t;
}

std::vector<double> snapshot_times(const SystemConfig& config, const ObservationSchedule& schedule) {
    std::vector<double> t;
    t.reserve(schedule.snapshot_steps.size());
    for (const auto step : schedule.snapshot_steps) t.push_back(static_cast<double>(step) * config.dt());
    return t;
}

Propagator propagator_from_name(std::string_view name) {
    if (name == "fdtd") return Propagator::fdtd;
    if (name == "modes") return Propagator::modes;
    throw ConfigError("unknown propagator '" + std::string(name) + "' (expected fdtd or modes)");
}

std::string_view propagator_name(Propagator p) { return p == Propagator::fdtd ? "fdtd" : "modes"; }

}  // namespace mmst
