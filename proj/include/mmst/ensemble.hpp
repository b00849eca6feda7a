#pragma once

// Trajectory ensembles: sampling, propagation, ZPE-subtracted estimators and
// streaming statistics. Results depend only on the request, never on the
// number of worker threads.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmst/model.hpp"
#include "mmst/sampling.hpp"
#include "mmst/trajectory.hpp"

namespace mmst {

/// Welford mean / M2 for a single scalar; merge uses Chan's pairwise formula.
class RunningStats {
public:
    void add(double x) noexcept;
    void merge(const RunningStats& other) noexcept;

    [[nodiscard]] std::size_t count() const noexcept { return n_; }
    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double m2() const noexcept { return m2_; }
    /// Sample variance (n - 1); 0 for fewer than two values.
    [[nodiscard]] double variance() const noexcept;
    [[nodiscard]] double standard_error() const noexcept;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Element-wise RunningStats over fixed-length vectors sharing one count.
class VectorStats {
public:
    VectorStats() = default;
    explicit VectorStats(std::size_t size) : mean_(size, 0.0), m2_(size, 0.0) {}

    void add(std::span<const double> x);
    void merge(const VectorStats& other);

    [[nodiscard]] std::size_t count() const noexcept { return n_; }
    [[nodiscard]] std::size_t size() const noexcept { return mean_.size(); }
    [[nodiscard]] const std::vector<double>& mean() const noexcept { return mean_; }
    [[nodiscard]] const std::vector<double>& m2() const noexcept { return m2_; }
    [[nodiscard]] double variance(std::size_t i) const noexcept;
    [[nodiscard]] double standard_error(std::size_t i) const noexcept;

private:
    std::size_t n_ = 0;
    std::vector<double> mean_;
    std::vector<double> m2_;
};

/// Delay times use the population averaged over the initially excited TLSs.
struct DelayOptions {
    bool enabled = false;
    double smoothing = 0.05;                        ///< moving-average width in time units
    double window_end = std::numeric_limits<double>::infinity();  ///< ignore later samples
};

struct EnsembleRequest {
    std::size_t trajectories = 1;
    std::uint64_t seed = 0;
    std::uint64_t first_index = 0;       ///< trajectory indices first_index .. first_index + trajectories - 1
    Propagator propagator = Propagator::fdtd;
    SamplingOptions sampling;
    std::vector<double> snapshot_times;  ///< E_z^2 is accumulated at these times
    std::vector<double> phase_space_times;
    DelayOptions delays;
    /// Modes engine only: accumulate E^2 - E_free^2, where E_free is the sampled vacuum field
    /// rotated freely to the snapshot time. Same mean as the baseline-subtracted estimator, far
    /// smaller variance.
    bool free_field_control = false;
    std::size_t threads = 0;             ///< 0: hardware concurrency
    std::size_t block_size = 16;
    double max_failure_fraction = 1e-3;
};

struct PhaseSpacePoint {
    std::uint64_t traj_index;
    std::size_t tls;
    double n_g;
    double n_e;
};

struct DelaySample {
    std::uint64_t traj_index;
    std::optional<double> t_d;  ///< empty when the trajectory's decay is flat
};

struct EnsembleResult {
    SamplingOptions sampling;
    std::size_t tls_count = 0;
    std::vector<double> times;           ///< output grid
    VectorStats excited;                 ///< raw |c_e|^2, [output][tls]
    VectorStats ground;                  ///< raw |c_g|^2, [output][tls]
    std::vector<double> snapshot_times;  ///< sampled times of the E_z^2 snapshots
    std::vector<VectorStats> e_squared;  ///< per snapshot, per grid node
    bool free_field_subtracted = false;  ///< e_squared holds E^2 - E_free^2
    std::vector<double> phase_space_times;
    std::vector<std::vector<PhaseSpacePoint>> phase_space;  ///< per requested time
    std::vector<DelaySample> delays;
    std::size_t requested = 0;
    std::size_t failed = 0;
    std::vector<std::string> diagnostics;  ///< first few failure messages

    [[nodiscard]] std::size_t completed() const noexcept { return excited.count(); }
};

/// Single trajectory with the configured engine.
TrajectoryResult run_trajectory(const CavityModel& model, const InitialSample& sample,
                                const ObservationSchedule& schedule, Propagator propagator);

/// Throws NumericalError when more than max_failure_fraction of trajectories fail.
EnsembleResult run_ensemble(const CavityModel& model, const EnsembleRequest& request);

struct PopulationSeries {
    std::vector<double> times;
    std::size_t tls_count = 0;
    std::vector<double> rho;     ///< [time][tls]
    std::vector<double> std_error;  ///< [time][tls]

    [[nodiscard]] double at(std::size_t t, std::size_t tls) const { return rho[t * tls_count + tls]; }
    [[nodiscard]] double error(std::size_t t, std::size_t tls) const { return std_error[t * tls_count + tls]; }
    /// Average over all TLSs at each time.
    [[nodiscard]] std::vector<double> mean_over_tls() const;
    /// Average over the listed TLSs at each time.
    [[nodiscard]] std::vector<double> mean_over(std::span<const std::size_t> tls) const;
    [[nodiscard]] std::vector<double> column(std::size_t tls) const;
};

/// rho_ee = <|c_e|^2> - gamma when electronic ZPE was sampled, raw mean otherwise.
PopulationSeries population_estimate(const EnsembleResult& result);

struct IntensitySeries {
    std::vector<double> r;
    std::vector<double> times;
    std::vector<std::vector<double>> intensity;  ///< [snapshot][node]
    std::vector<std::vector<double>> std_error;
};

/// I = <E_z^2> - sum_j eps_j^2 sin^2(k_j r) when photonic ZPE was sampled, <E_z^2> otherwise.
/// With the free-field control the accumulated mean is already the intensity.
IntensitySeries intensity_estimate(const EnsembleResult& result, const CavityModel& model);

/// Moving average over `width` neighbouring nodes; near the mirrors the window shifts inward. The
/// reported error is the window average of the node errors, an upper bound for correlated noise.
IntensitySeries coarse_grain(const IntensitySeries& series, std::size_t width = 50);

/// Flat (time, point) table of the exported electronic actions.
struct PhaseSpaceTable {
    double time;
    std::vector<PhaseSpacePoint> points;
};
std::vector<PhaseSpaceTable> phase_space_export(const EnsembleResult& result);

}  // namespace mmst
