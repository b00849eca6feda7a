#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmst/model.hpp"
#include "mmst/sampling.hpp"

namespace mmst {

/// When a trajectory records observables. Output n is taken after n * output_stride steps,
/// i.e. at t = n * output_stride * dt.
struct ObservationSchedule {
    std::size_t total_steps = 0;
    std::size_t output_stride = 1;
    std::vector<std::size_t> snapshot_steps;  ///< E_z snapshots, in request order

    [[nodiscard]] std::size_t output_count() const noexcept { return total_steps / output_stride + 1; }
};

ObservationSchedule make_schedule(const SystemConfig& config, std::span<const double> snapshot_times = {});

/// The uniform output grid shared by MMST and quantum runs.
std::vector<double> output_times(const SystemConfig& config);

/// Time actually sampled for each requested snapshot (nearest step).
std::vector<double> snapshot_times(const SystemConfig& config, const ObservationSchedule& schedule);

struct TrajectoryResult {
    std::size_t tls_count = 0;
    std::vector<double> excited;  ///< raw |c_e|^2, [output][tls]
    std::vector<double> ground;   ///< raw |c_g|^2, [output][tls]
    std::vector<std::vector<double>> snapshots;  ///< E_z on the grid, one per snapshot step
    ElectronicSample final_electrons;
    bool ok = true;
    std::string diagnostic;

    [[nodiscard]] std::size_t output_count() const noexcept {
        return tls_count == 0 ? 0 : excited.size() / tls_count;
    }
};

enum class Propagator { fdtd, modes };

Propagator propagator_from_name(std::string_view name);
std::string_view propagator_name(Propagator p);

}  // namespace mmst
