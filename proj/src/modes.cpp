#include "mmst/modes.hpp"

#include <cmath>
#include <string>

#include "electronic_ops.hpp"
#include "mmst/errors.hpp"

namespace mmst {

ModeState make_mode_state(const InitialSample& sample) {
    ModeState s;
    s.x = sample.photons.x;
    s.p = sample.photons.p;
    s.electrons = sample.electrons;
    return s;
}

ModePropagator::ModePropagator(const CavityModel& model, double dt)
    : model_(&model), dt_(dt), tls_phase_(std::polar(1.0, -0.5 * model.config().omega0 * dt)) {
    const auto& w = model.modes().omega;
    cos_wdt_.resize(w.size());
    sin_wdt_.resize(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        cos_wdt_[j] = std::cos(w[j] * dt);
        sin_wdt_[j] = std::sin(w[j] * dt);
    }
}

void ModePropagator::kick(ModeState& state, double h) const {
    const std::size_t m = state.x.size();
    for (const auto& g : model_->profile_groups()) {
        const auto w = model_->mode_weights(g.members.front());
        double v = 0.0;
        for (std::size_t j = 0; j < m; ++j) v -= w[j] * state.x[j];
        const double cs = std::cos(v * h);
        const double sn = std::sin(v * h);
        double s_sum = 0.0;
        for (const auto a : g.members) {
            detail::rotate_sigma_x(state.electrons[a], cs, sn);
            s_sum += detail::sigma_x(state.electrons[a]);
        }
        if (s_sum == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) state.p[j] += h * w[j] * s_sum;
    }
}

void ModePropagator::step(ModeState& state) const {
    const double h = 0.5 * dt_;
    kick(state, h);
    const auto& w = model_->modes().omega;
    for (std::size_t j = 0; j < state.x.size(); ++j) {
        const double x = state.x[j];
        const double p = state.p[j];
        state.x[j] = cos_wdt_[j] * x + sin_wdt_[j] * p / w[j];
        state.p[j] = cos_wdt_[j] * p - w[j] * sin_wdt_[j] * x;
    }
    for (auto& c : state.electrons) detail::rotate_sigma_z(c, tls_phase_);
    kick(state, h);
    state.time += dt_;
}

void step_modes(ModeState& state, const CavityModel& model, double dt) { ModePropagator(model, dt).step(state); }

std::vector<double> tls_potentials(const ModeState& state, const CavityModel& model) {
    std::vector<double> v(model.config().tls_count(), 0.0);
    for (std::size_t a = 0; a < v.size(); ++a) {
        const auto w = model.mode_weights(a);
        for (std::size_t j = 0; j < state.x.size(); ++j) v[a] -= w[j] * state.x[j];
    }
    return v;
}

double classical_energy(const ModeState& state, const CavityModel& model) {
    const auto& w = model.modes().omega;
    const double omega0 = model.config().omega0;
    double e = 0.0;
    for (std::size_t j = 0; j < state.x.size(); ++j)
        e += 0.5 * (state.p[j] * state.p[j] + w[j] * w[j] * state.x[j] * state.x[j]);
    const auto v = tls_potentials(state, model);
    for (std::size_t a = 0; a < v.size(); ++a) {
        const auto& c = state.electrons[a];
        e += 0.5 * omega0 * (std::norm(c.excited) - std::norm(c.ground)) + v[a] * detail::sigma_x(c);
    }
    return e;
}

double field_e(const ModeState& state, const ModeBasis& basis, double length, double r) {
    double e = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) e += basis.omega[j] * state.x[j] * std::sin(basis.k[j] * r);
    return std::sqrt(2.0 / length) * e;
}

double field_b(const ModeState& state, const ModeBasis& basis, double length, double r) {
    double b = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) b += state.p[j] * std::cos(basis.k[j] * r);
    return std::sqrt(2.0 / length) * b;
}

FieldProfiles synthesize_fields(const ModeState& state, const ModeBasis& basis, double length,
                                std::span<const double> r) {
    FieldProfiles f;
    f.e.reserve(r.size());
    f.b.reserve(r.size());
    for (const double ri : r) {
        f.e.push_back(field_e(state, basis, length, ri));
        f.b.push_back(field_b(state, basis, length, ri));
    }
    return f;
}

std::vector<double> field_e_on_grid(const ModeState& state, const CavityModel& model) {
    const auto& basis = model.modes();
    const double scale = std::sqrt(2.0 / model.config().length);
    std::vector<double> e(model.grid().size(), 0.0);
    for (std::size_t j = 0; j < basis.size(); ++j) {
        const double a = scale * basis.omega[j] * state.x[j];
        const auto s = model.mode_sin(j);
        for (std::size_t k = 0; k < e.size(); ++k) e[k] += a * s[k];
    }
    return e;
}

TrajectoryResult run_trajectory_modes(const CavityModel& model, const InitialSample& sample,
                                      const ObservationSchedule& schedule) {
    const auto& config = model.config();
    if (sample.electrons.size() != config.tls_count())
        throw ConfigError("electronic sample does not match the TLS count");
    if (sample.photons.x.size() != model.modes().size())
        throw ConfigError("photon sample does not match the mode basis");

    TrajectoryResult result;
    result.tls_count = config.tls_count();
    result.excited.reserve(schedule.output_count() * result.tls_count);
    result.ground.reserve(schedule.output_count() * result.tls_count);

    const ModePropagator prop(model, config.dt());
    ModeState state = make_mode_state(sample);

    auto record = [&] {
        for (const auto& a : state.electrons) {
            result.excited.push_back(std::norm(a.excited));
            result.ground.push_back(std::norm(a.ground));
        }
    };
    result.snapshots.resize(schedule.snapshot_steps.size());
    auto take_snapshots = [&](std::size_t step) {
        for (std::size_t i = 0; i < schedule.snapshot_steps.size(); ++i)
            if (schedule.snapshot_steps[i] == step) result.snapshots[i] = field_e_on_grid(state, model);
    };
    record();
    take_snapshots(0);

    for (std::size_t m = 1; m <= schedule.total_steps; ++m) {
        prop.step(state);
        if (m % schedule.output_stride == 0) {
            bool finite = true;
            for (const auto& a : state.electrons) finite = finite && detail::finite(a);
            for (std::size_t j = 0; finite && j < state.x.size(); ++j)
                finite = std::isfinite(state.x[j]) && std::isfinite(state.p[j]);
            if (!finite) {
                result.ok = false;
                result.diagnostic = "non-finite state at t = " + std::to_string(static_cast<double>(m) * config.dt());
                return result;
            }
            record();
        }
        take_snapshots(m);
    }
    result.final_electrons = std::move(state.electrons);
    return result;
}

}  // namespace mmst
