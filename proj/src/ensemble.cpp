#include "mmst/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mmst/analysis.hpp"
#include "mmst/errors.hpp"
#include "mmst/fdtd.hpp"
#include "mmst/modes.hpp"

namespace mmst {

void RunningStats::add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) noexcept {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ += delta * nb / n;
    m2_ += other.m2_ + delta * delta * na * nb / n;
    n_ += other.n_;
}

double RunningStats::variance() const noexcept { return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1); }

double RunningStats::standard_error() const noexcept {
    return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

void VectorStats::add(std::span<const double> x) {
    if (x.size() != mean_.size()) throw std::invalid_argument("VectorStats::add: size mismatch");
    ++n_;
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double delta = x[i] - mean_[i];
        mean_[i] += delta * inv_n;
        m2_[i] += delta * (x[i] - mean_[i]);
    }
}

void VectorStats::merge(const VectorStats& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    if (other.size() != size()) throw std::invalid_argument("VectorStats::merge: size mismatch");
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const double wb = nb / n;
    const double wab = na * nb / n;
    for (std::size_t i = 0; i < mean_.size(); ++i) {
        const double delta = other.mean_[i] - mean_[i];
        mean_[i] += delta * wb;
        m2_[i] += other.m2_[i] + delta * delta * wab;
    }
    n_ += other.n_;
}

double VectorStats::variance(std::size_t i) const noexcept {
    return n_ < 2 ? 0.0 : m2_[i] / static_cast<double>(n_ - 1);
}

double VectorStats::standard_error(std::size_t i) const noexcept {
    return n_ < 2 ? 0.0 : std::sqrt(variance(i) / static_cast<double>(n_));
}

TrajectoryResult run_trajectory(const CavityModel& model, const InitialSample& sample,
                                const ObservationSchedule& schedule, Propagator propagator) {
    return propagator == Propagator::fdtd ? run_trajectory_fdtd(model, sample, schedule)
                                          : run_trajectory_modes(model, sample, schedule);
}

namespace {

struct Block {
    VectorStats excited;
    VectorStats ground;
    std::vector<VectorStats> e_squared;
    std::vector<std::vector<PhaseSpacePoint>> phase_space;
    std::vector<DelaySample> delays;
    std::size_t failed = 0;
    std::vector<std::string> diagnostics;
};

constexpr std::size_t kMaxDiagnostics = 10;

class BlockRunner {
public:
    BlockRunner(const CavityModel& model, const EnsembleRequest& request)
        : model_(model), request_(request), schedule_(make_schedule(model.config(), request.snapshot_times)) {
        const auto& config = model.config();
        times_ = output_times(config);
        const double spacing = static_cast<double>(schedule_.output_stride) * config.dt();
        for (const double t : request.phase_space_times) {
            const auto idx = static_cast<std::size_t>(std::llround(t / spacing));
            if (t < 0.0 || idx >= times_.size()) throw ConfigError("phase-space time outside the simulated interval");
            phase_index_.push_back(idx);
        }
        if (request.free_field_control) {
            if (request.propagator != Propagator::modes)
                throw ConfigError("the free-field control needs the modes propagator");
            const double scale = std::sqrt(2.0 / config.length);
            for (const auto step : schedule_.snapshot_steps) {
                const double t = static_cast<double>(step) * config.dt();
                std::vector<double> c(model.modes().size()), s(model.modes().size());
                for (std::size_t j = 0; j < c.size(); ++j) {
                    const double w = model.modes().omega[j];
                    c[j] = scale * w * std::cos(w * t);
                    s[j] = scale * std::sin(w * t);
                }
                free_cos_.push_back(std::move(c));
                free_sin_.push_back(std::move(s));
            }
        }
        gamma_offset_ = request.sampling.electronic ? request.sampling.gamma : 0.0;
        for (std::size_t a = 0; a < config.tls_count(); ++a)
            if (config.initially_excited[a]) tracked_.push_back(a);
        if (tracked_.empty())
            for (std::size_t a = 0; a < config.tls_count(); ++a) tracked_.push_back(a);
    }

    [[nodiscard]] const ObservationSchedule& schedule() const noexcept { return schedule_; }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] std::vector<double> phase_times() const {
        std::vector<double> t;
        for (const auto i : phase_index_) t.push_back(times_[i]);
        return t;
    }

    Block empty_block() const {
        const std::size_t n = model_.config().tls_count();
        Block b;
        b.excited = VectorStats(times_.size() * n);
        b.ground = VectorStats(times_.size() * n);
        b.e_squared.assign(schedule_.snapshot_steps.size(), VectorStats(model_.grid().size()));
        b.phase_space.resize(phase_index_.size());
        return b;
    }

    Block run(std::uint64_t begin, std::uint64_t end) const {
        Block b = empty_block();
        const auto& config = model_.config();
        const std::size_t n = config.tls_count();
        std::vector<double> squared(model_.grid().size());
        std::vector<double> free(model_.grid().size());
        std::vector<double> rho_bar(times_.size());
        for (std::uint64_t index = begin; index < end; ++index) {
            const InitialSample sample =
                draw_initial_sample(request_.seed, index, config, model_.modes(), request_.sampling);
            const TrajectoryResult r = run_trajectory(model_, sample, schedule_, request_.propagator);
            if (!r.ok) {
                ++b.failed;
                if (b.diagnostics.size() < kMaxDiagnostics)
                    b.diagnostics.push_back("trajectory " + std::to_string(index) + ": " + r.diagnostic);
                continue;
            }
            b.excited.add(r.excited);
            b.ground.add(r.ground);
            for (std::size_t s = 0; s < r.snapshots.size(); ++s) {
                const auto& e = r.snapshots[s];
                for (std::size_t k = 0; k < e.size(); ++k) squared[k] = e[k] * e[k];
                if (!free_cos_.empty()) {
                    free_field(sample.photons, s, free);
                    for (std::size_t k = 0; k < e.size(); ++k) squared[k] -= free[k] * free[k];
                }
                b.e_squared[s].add(squared);
            }
            for (std::size_t p = 0; p < phase_index_.size(); ++p) {
                const std::size_t base = phase_index_[p] * n;
                for (std::size_t a = 0; a < n; ++a)
                    b.phase_space[p].push_back({index, a, r.ground[base + a], r.excited[base + a]});
            }
            if (request_.delays.enabled && n > 0) {
                for (std::size_t t = 0; t < times_.size(); ++t) {
                    double s = 0.0;
                    for (const auto a : tracked_) s += r.excited[t * n + a];
                    rho_bar[t] = s / static_cast<double>(tracked_.size()) - gamma_offset_;
                }
                b.delays.push_back(
                    {index, delay_time(times_, rho_bar, request_.delays.smoothing, request_.delays.window_end)});
            }
        }
        return b;
    }

private:
    // E_free(r) = sum_j sqrt(2/L) omega_j [X_j cos(w t) + P_j sin(w t) / w] sin(k_j r)
    void free_field(const PhotonSample& photons, std::size_t snapshot, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        const auto& c = free_cos_[snapshot];
        const auto& s = free_sin_[snapshot];
        for (std::size_t j = 0; j < c.size(); ++j) {
            const double a = c[j] * photons.x[j] + s[j] * photons.p[j];
            const auto sin_kr = model_.mode_sin(j);
            for (std::size_t k = 0; k < out.size(); ++k) out[k] += a * sin_kr[k];
        }
    }

    const CavityModel& model_;
    const EnsembleRequest& request_;
    ObservationSchedule schedule_;
    std::vector<double> times_;
    std::vector<std::size_t> phase_index_;
    std::vector<std::size_t> tracked_;  // initially excited TLSs (all when none)
    double gamma_offset_ = 0.0;
    std::vector<std::vector<double>> free_cos_;  // per snapshot, per mode
    std::vector<std::vector<double>> free_sin_;
};

void merge_into(Block& total, Block&& b) {
    total.excited.merge(b.excited);
    total.ground.merge(b.ground);
    for (std::size_t s = 0; s < total.e_squared.size(); ++s) total.e_squared[s].merge(b.e_squared[s]);
    for (std::size_t p = 0; p < total.phase_space.size(); ++p)
        total.phase_space[p].insert(total.phase_space[p].end(), b.phase_space[p].begin(), b.phase_space[p].end());
    total.delays.insert(total.delays.end(), b.delays.begin(), b.delays.end());
    total.failed += b.failed;
    for (auto& d : b.diagnostics)
        if (total.diagnostics.size() < kMaxDiagnostics) total.diagnostics.push_back(std::move(d));
}

}  // namespace

EnsembleResult run_ensemble(const CavityModel& model, const EnsembleRequest& request) {
    if (request.trajectories == 0) throw ConfigError("at least one trajectory is required");
    if (request.block_size == 0) throw ConfigError("block size must be positive");
    if (request.propagator == Propagator::fdtd && model.config().dt() > model.config().dx())
        throw ConfigError("CFL condition violated: c dt > dx");

    const BlockRunner runner(model, request);
    const std::size_t blocks = (request.trajectories + request.block_size - 1) / request.block_size;
    std::size_t threads = request.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : request.threads;
    threads = std::min(threads, blocks);

    Block total = runner.empty_block();
    auto block_range = [&](std::size_t b) {
        const std::uint64_t begin = request.first_index + b * request.block_size;
        const std::uint64_t end =
            request.first_index + std::min<std::size_t>((b + 1) * request.block_size, request.trajectories);
        return std::pair{begin, end};
    };

    if (threads <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) {
            const auto [begin, end] = block_range(b);
            merge_into(total, runner.run(begin, end));
        }
    } else {
        // Blocks finish in any order but are merged strictly by index.
        std::atomic<std::size_t> next_block{0};
        std::atomic<bool> abort{false};
        std::mutex mutex;
        std::vector<std::optional<Block>> pending(blocks);
        std::size_t next_merge = 0;
        std::exception_ptr error;

        auto worker = [&] {
            while (!abort.load()) {
                const std::size_t b = next_block.fetch_add(1);
                if (b >= blocks) return;
                try {
                    const auto [begin, end] = block_range(b);
                    Block result = runner.run(begin, end);
                    const std::lock_guard lock(mutex);
                    pending[b] = std::move(result);
                    while (next_merge < blocks && pending[next_merge]) {
                        merge_into(total, std::move(*pending[next_merge]));
                        pending[next_merge].reset();
                        ++next_merge;
                    }
                } catch (...) {
                    const std::lock_guard lock(mutex);
                    if (!error) error = std::current_exception();
                    abort = true;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    EnsembleResult result;
    result.sampling = request.sampling;
    result.tls_count = model.config().tls_count();
    result.times = runner.times();
    result.excited = std::move(total.excited);
    result.ground = std::move(total.ground);
    result.snapshot_times = snapshot_times(model.config(), runner.schedule());
    result.e_squared = std::move(total.e_squared);
    result.free_field_subtracted = request.free_field_control;
    result.phase_space_times = runner.phase_times();
    result.phase_space = std::move(total.phase_space);
    result.delays = std::move(total.delays);
    result.requested = request.trajectories;
    result.failed = total.failed;
    result.diagnostics = std::move(total.diagnostics);

    if (static_cast<double>(result.failed) > request.max_failure_fraction * static_cast<double>(request.trajectories)) {
        std::string msg = std::to_string(result.failed) + " of " + std::to_string(request.trajectories) +
                          " trajectories failed";
        if (!result.diagnostics.empty()) msg += " (first: " + result.diagnostics.front() + ")";
        throw NumericalError(msg);
    }
    if (result.completed() == 0) throw NumericalError("no trajectory completed");
    return result;
}

std::vector<double> PopulationSeries::mean_over_tls() const {
    std::vector<double> m(times.size(), 0.0);
    if (tls_count == 0) return m;
    for (std::size_t t = 0; t < times.size(); ++t) {
        double s = 0.0;
        for (std::size_t a = 0; a < tls_count; ++a) s += at(t, a);
        m[t] = s / static_cast<double>(tls_count);
    }
    return m;
}

std::vector<double> PopulationSeries::mean_over(std::span<const std::size_t> tls) const {
    if (tls.empty()) return mean_over_tls();
    std::vector<double> m(times.size(), 0.0);
    for (std::size_t t = 0; t < times.size(); ++t) {
        double s = 0.0;
        for (const auto a : tls) s += at(t, a);
        m[t] = s / static_cast<double>(tls.size());
    }
    return m;
}

std::vector<double> PopulationSeries::column(std::size_t tls) const {
    if (tls >= tls_count) throw std::out_of_range("TLS index out of range");
    std::vector<double> c(times.size());
    for (std::size_t t = 0; t < times.size(); ++t) c[t] = at(t, tls);
    return c;
}

PopulationSeries population_estimate(const EnsembleResult& result) {
    PopulationSeries p;
    p.times = result.times;
    p.tls_count = result.tls_count;
    const double offset = result.sampling.electronic ? result.sampling.gamma : 0.0;
    const auto& mean = result.excited.mean();
    p.rho.resize(mean.size());
    p.std_error.resize(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
        p.rho[i] = mean[i] - offset;
        p.std_error[i] = result.excited.standard_error(i);
    }
    return p;
}

IntensitySeries intensity_estimate(const EnsembleResult& result, const CavityModel& model) {
    IntensitySeries s;
    s.r.assign(model.grid().begin(), model.grid().end());
    s.times = result.snapshot_times;
    const auto baseline = model.vacuum_baseline();
    const bool subtract = result.sampling.photonic && !result.free_field_subtracted;
    for (const auto& e2 : result.e_squared) {
        std::vector<double> i(e2.size());
        std::vector<double> err(e2.size());
        for (std::size_t k = 0; k < e2.size(); ++k) {
            i[k] = e2.mean()[k] - (subtract ? baseline[k] : 0.0);
            err[k] = e2.standard_error(k);
        }
        s.intensity.push_back(std::move(i));
        s.std_error.push_back(std::move(err));
    }
    return s;
}

IntensitySeries coarse_grain(const IntensitySeries& series, std::size_t width) {
    if (width <= 1) return series;
    IntensitySeries out;
    out.r = series.r;
    out.times = series.times;
    const std::size_t half = width / 2;
    for (std::size_t s = 0; s < series.intensity.size(); ++s) {
        const auto& in = series.intensity[s];
        const auto& err = series.std_error[s];
        std::vector<double> avg(in.size());
        std::vector<double> avg_err(in.size());
        for (std::size_t k = 0; k < in.size(); ++k) {
            std::size_t lo = k >= half ? k - half : 0;
            if (lo + width > in.size()) lo = in.size() > width ? in.size() - width : 0;
            const std::size_t hi = std::min(in.size(), lo + width);
            double sum = 0.0;
            double sum_err = 0.0;
            for (std::size_t q = lo; q < hi; ++q) {
                sum += in[q];
                sum_err += err[q];
            }
            avg[k] = sum / static_cast<double>(hi - lo);
            avg_err[k] = sum_err / static_cast<double>(hi - lo);
        }
        out.intensity.push_back(std::move(avg));
        out.std_error.push_back(std::move(avg_err));
    }
    return out;
}

std::vector<PhaseSpaceTable> phase_space_export(const EnsembleResult& result) {
    std::vector<PhaseSpaceTable> tables;
    for (std::size_t p = 0; p < result.phase_space_times.size(); ++p)
        tables.push_back({result.phase_space_times[p], result.phase_space[p]});
    return tables;
}

}  // namespace mmst
