#include "mmst/fdtd.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "electronic_ops.hpp"
#include "mmst/errors.hpp"

namespace mmst {

namespace {

void advance_e(std::vector<double>& e, const std::vector<double>& b, double ratio) {
    const std::size_t last = e.size() - 1;
    for (std::size_t k = 1; k < last; ++k) e[k] -= ratio * (b[k] - b[k - 1]);
}

void advance_b(std::vector<double>& b, const std::vector<double>& e, double ratio) {
    for (std::size_t k = 0; k < b.size(); ++k) b[k] -= ratio * (e[k + 1] - e[k]);
}

void zero_mirrors(std::vector<double>& e) {
    e.front() = 0.0;
    e.back() = 0.0;
}

void record(TrajectoryResult& result, const ElectronicSample& c) {
    for (const auto& a : c) {
        result.excited.push_back(std::norm(a.excited));
        result.ground.push_back(std::norm(a.ground));
    }
}

bool all_finite(const ElectronicSample& c) {
    for (const auto& a : c)
        if (!detail::finite(a)) return false;
    return true;
}

}  // namespace

double YeeField::energy(double dx) const {
    double u = 0.0;
    for (const double v : e) u += v * v;
    for (const double v : b) u += v * v;
    return 0.5 * u * dx;
}

YeeField init_yee_fields(const PhotonSample& photons, const CavityModel& model) {
    const auto& basis = model.modes();
    const double dt = model.config().dt();
    const double scale = std::sqrt(2.0 / model.config().length);
    const std::size_t ng = model.grid().size();
    YeeField f;
    f.e.assign(ng, 0.0);
    f.b.assign(ng - 1, 0.0);
    for (std::size_t j = 0; j < basis.size(); ++j) {
        const double w = basis.omega[j];
        const double x = photons.x[j];
        const double p_full = photons.p[j] - w * w * x * 0.5 * dt;
        const double ea = scale * w * x;
        const double ba = scale * p_full;
        if (ea != 0.0) {
            const auto s = model.mode_sin(j);
            for (std::size_t k = 0; k < ng; ++k) f.e[k] += ea * s[k];
        }
        if (ba != 0.0) {
            const auto c = model.mode_cos_half(j);
            for (std::size_t k = 0; k + 1 < ng; ++k) f.b[k] += ba * c[k];
        }
    }
    zero_mirrors(f.e);
    return f;
}

void step_fdtd(YeeField& field, double dt, double dx, std::span<const double> current) {
    if (dt > dx) throw ConfigError("CFL condition violated: c dt > dx");
    if (current.size() != field.e.size() && !current.empty())
        throw ConfigError("current profile and grid differ in size");
    const double ratio = dt / dx;
    advance_e(field.e, field.b, ratio);
    for (std::size_t k = 0; k < current.size(); ++k) field.e[k] -= current[k] * dt;
    zero_mirrors(field.e);
    advance_b(field.b, field.e, ratio);
}

std::vector<double> current_density(std::span<const TlsAmplitudes> electrons, const std::vector<GridProfile>& profiles,
                                    double omega0, std::size_t grid_points) {
    if (electrons.size() != profiles.size()) throw ConfigError("one profile per TLS is required");
    std::vector<double> j(grid_points, 0.0);
    for (std::size_t a = 0; a < electrons.size(); ++a) {
        const double amp = -2.0 * omega0 * detail::im_rho_ge(electrons[a]);
        const auto& p = profiles[a];
        for (std::size_t i = 0; i < p.weights.size() && p.first + i < grid_points; ++i)
            j[p.first + i] += amp * p.weights[i];
    }
    return j;
}

double field_overlap(std::span<const double> e, const GridProfile& profile, double dx) {
    const std::size_t last = e.size() - 1;
    double s = 0.0;
    for (std::size_t i = 0; i < profile.weights.size(); ++i) {
        const std::size_t k = profile.first + i;
        const double w = (k == 0 || k == last) ? 0.5 : 1.0;
        s += w * e[k] * profile.weights[i];
    }
    return s * dx;
}

void step_electronic(TlsAmplitudes& c, double v_first, double v_second, double omega0, double dt) {
    detail::rotate_sigma_x(c, std::cos(0.5 * v_first * dt), std::sin(0.5 * v_first * dt));
    detail::rotate_sigma_z(c, std::polar(1.0, -0.5 * omega0 * dt));
    detail::rotate_sigma_x(c, std::cos(0.5 * v_second * dt), std::sin(0.5 * v_second * dt));
}

void step_electronic(TlsAmplitudes& c, std::span<const double> e, const GridProfile& profile, double omega0,
                     double dx, double dt) {
    const double v = -field_overlap(e, profile, dx);
    step_electronic(c, v, v, omega0, dt);
}

TrajectoryResult run_trajectory_fdtd(const CavityModel& model, const InitialSample& sample,
                                     const ObservationSchedule& schedule) {
    const auto& config = model.config();
    const double dt = config.dt();
    const double dx = config.dx();
    if (dt > dx) throw ConfigError("CFL condition violated: c dt > dx");
    const double ratio = dt / dx;
    const double omega0 = config.omega0;
    const auto& profiles = model.profiles();
    const auto& groups = model.profile_groups();

    TrajectoryResult result;
    result.tls_count = config.tls_count();
    result.excited.reserve(schedule.output_count() * result.tls_count);
    result.ground.reserve(schedule.output_count() * result.tls_count);

    YeeField field = init_yee_fields(sample.photons, model);
    ElectronicSample c = sample.electrons;
    if (c.size() != config.tls_count()) throw ConfigError("electronic sample does not match the TLS count");

    result.snapshots.resize(schedule.snapshot_steps.size());
    auto take_snapshots = [&](std::size_t step) {
        for (std::size_t i = 0; i < schedule.snapshot_steps.size(); ++i)
            if (schedule.snapshot_steps[i] == step) result.snapshots[i] = field.e;
    };
    record(result, c);
    take_snapshots(0);

    const std::complex<double> quarter_phase = std::polar(1.0, -0.25 * omega0 * dt);
    std::vector<double> v_old(groups.size());
    for (std::size_t m = 1; m <= schedule.total_steps; ++m) {
        // First half of the split-operator step, up to the temporal midpoint of E's update.
        for (std::size_t g = 0; g < groups.size(); ++g) {
            v_old[g] = -field_overlap(field.e, profiles[groups[g].profile], dx);
            const double cs = std::cos(0.5 * v_old[g] * dt);
            const double sn = std::sin(0.5 * v_old[g] * dt);
            for (const auto a : groups[g].members) {
                detail::rotate_sigma_x(c[a], cs, sn);
                detail::rotate_sigma_z(c[a], quarter_phase);
            }
        }

        advance_e(field.e, field.b, ratio);
        for (const auto& g : groups) {
            double im_sum = 0.0;
            for (const auto a : g.members) im_sum += detail::im_rho_ge(c[a]);
            const double amp = -2.0 * omega0 * im_sum * dt;
            if (amp == 0.0) continue;
            const auto& p = profiles[g.profile];
            for (std::size_t i = 0; i < p.weights.size(); ++i) field.e[p.first + i] -= amp * p.weights[i];
        }
        zero_mirrors(field.e);

        for (const auto& g : groups) {
            const double v_new = -field_overlap(field.e, profiles[g.profile], dx);
            const double cs = std::cos(0.5 * v_new * dt);
            const double sn = std::sin(0.5 * v_new * dt);
            for (const auto a : g.members) {
                detail::rotate_sigma_z(c[a], quarter_phase);
                detail::rotate_sigma_x(c[a], cs, sn);
            }
        }
        advance_b(field.b, field.e, ratio);

        if (m % schedule.output_stride == 0) {
            if (!all_finite(c)) {
                result.ok = false;
                result.diagnostic = "non-finite electronic amplitude at t = " + std::to_string(m * dt);
                return result;
            }
            record(result, c);
        }
        take_snapshots(m);
    }
    result.final_electrons = std::move(c);
    return result;
}

}  // namespace mmst
