#include "mmst/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmst/errors.hpp"

namespace mmst {

namespace {

// sin(pi * num / den) with the integer argument reduced exactly first.
double sin_pi_ratio(std::size_t num, std::size_t den) {
    return std::sin(kPi * static_cast<double>(num % (2 * den)) / static_cast<double>(den));
}

double cos_pi_ratio(std::size_t num, std::size_t den) {
    return std::cos(kPi * static_cast<double>(num % (2 * den)) / static_cast<double>(den));
}

}  // namespace

std::size_t SystemConfig::step_count() const {
    return static_cast<std::size_t>(std::llround(t_final / dt()));
}

std::size_t SystemConfig::output_stride() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(output_interval / dt())));
}

std::size_t SystemConfig::excited_count() const {
    return static_cast<std::size_t>(std::count(initially_excited.begin(), initially_excited.end(), true));
}

void SystemConfig::validate() const {
    if (!(length > 0.0)) throw ConfigError("cavity length must be positive");
    if (mode_count == 0) throw ConfigError("mode count must be at least 1");
    if (first_mode == 0) throw ConfigError("mode indices start at 1");
    if (grid_points < 3) throw ConfigError("grid needs at least 3 points");
    if (!(dt_divisor >= 1.0)) throw ConfigError("dt_divisor < 1 violates the CFL condition c dt <= dx");
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (!(gamma >= 0.0 && gamma <= 0.5)) throw ConfigError("gamma must lie in [0, 0.5]");
    if (!(omega0 >= 0.0)) throw ConfigError("omega0 must be non-negative");
    if (!(mu_ge >= 0.0)) throw ConfigError("mu_ge must be non-negative");
    if (!(t_final >= 0.0)) throw ConfigError("t_final must be non-negative");
    if (!(output_interval > 0.0)) throw ConfigError("output interval must be positive");
    if (positions.size() != initially_excited.size())
        throw ConfigError("positions and initial-excitation flags differ in length");
    for (std::size_t a = 0; a < positions.size(); ++a) {
        if (!(positions[a] > 0.0 && positions[a] < length))
            throw ConfigError("TLS " + std::to_string(a + 1) + " at r = " + std::to_string(positions[a]) +
                              " lies outside the open cavity (0, L)");
    }
}

std::size_t centered_first_mode(double length, double omega0, std::size_t count) {
    const auto center = static_cast<long long>(std::llround(omega0 * length / kPi));
    const long long first = center - static_cast<long long>(count / 2) + 1;
    return static_cast<std::size_t>(std::max<long long>(1, first));
}

ModeBasis build_mode_basis(double length, std::size_t count, std::size_t first_mode) {
    if (!(length > 0.0)) throw ConfigError("cavity length must be positive");
    if (count == 0) throw ConfigError("mode count must be at least 1");
    if (first_mode == 0) throw ConfigError("mode indices start at 1");
    ModeBasis basis;
    basis.index.resize(count);
    basis.omega.resize(count);
    basis.k.resize(count);
    basis.eps.resize(count);
    for (std::size_t n = 0; n < count; ++n) {
        const std::size_t j = first_mode + n;
        basis.index[n] = j;
        basis.omega[n] = static_cast<double>(j) * kPi / length;
        basis.k[n] = basis.omega[n];
        basis.eps[n] = std::sqrt(basis.omega[n] / length);
    }
    return basis;
}

ModeBasis build_mode_basis(const SystemConfig& config) {
    return build_mode_basis(config.length, config.mode_count, config.first_mode);
}

double coupling_constant(const SystemConfig& config, std::size_t alpha, std::size_t j) {
    if (alpha >= config.tls_count()) throw ConfigError("TLS index out of range");
    if (j < config.first_mode || j >= config.first_mode + config.mode_count)
        throw ConfigError("mode index " + std::to_string(j) + " outside the configured basis");
    const double omega = static_cast<double>(j) * kPi / config.length;
    return std::sqrt(omega / config.length) * config.mu_ge * std::sin(omega * config.positions[alpha]);
}

CouplingMatrix build_coupling(const SystemConfig& config, const ModeBasis& basis) {
    CouplingMatrix g(config.tls_count(), basis.size());
    for (std::size_t a = 0; a < config.tls_count(); ++a) {
        for (std::size_t j = 0; j < basis.size(); ++j) {
            g(a, j) = std::sqrt(basis.omega[j] / config.length) * config.mu_ge *
                      std::sin(basis.k[j] * config.positions[a]);
        }
    }
    return g;
}

double fgr_rate(double omega0, double mu_ge) { return omega0 * mu_ge * mu_ge; }

GridProfile polarization_profile(const SystemConfig& config, std::size_t alpha) {
    if (alpha >= config.tls_count()) throw ConfigError("TLS index out of range");
    const double dx = config.dx();
    const double r0 = config.positions[alpha];
    const double sigma = config.sigma;
    const auto last = static_cast<long long>(config.grid_points - 1);

    const double centre = r0 / dx;
    long long lo = static_cast<long long>(std::floor((r0 - 8.0 * sigma) / dx));
    long long hi = static_cast<long long>(std::ceil((r0 + 8.0 * sigma) / dx));
    lo = std::clamp(std::min(lo, static_cast<long long>(std::floor(centre))), 0LL, last);
    hi = std::clamp(std::max(hi, static_cast<long long>(std::ceil(centre))), 0LL, last);

    GridProfile profile;
    profile.first = static_cast<std::size_t>(lo);
    profile.under_resolved = sigma < dx;
    profile.weights.resize(static_cast<std::size_t>(hi - lo + 1));
    const double norm = config.mu_ge / (std::sqrt(2.0 * kPi) * sigma);
    for (long long k = lo; k <= hi; ++k) {
        const double d = static_cast<double>(k) * dx - r0;
        profile.weights[static_cast<std::size_t>(k - lo)] = norm * std::exp(-d * d / (2.0 * sigma * sigma));
    }

    double integral = 0.0;
    for (long long k = lo; k <= hi; ++k) {
        const double w = (k == 0 || k == last) ? 0.5 : 1.0;
        integral += w * profile.weights[static_cast<std::size_t>(k - lo)] * dx;
    }
    if (!(integral > 0.0)) {
        // Gaussian underflowed between nodes: fall back to linear (cloud-in-cell) weights.
        std::fill(profile.weights.begin(), profile.weights.end(), 0.0);
        const auto left = static_cast<long long>(std::floor(centre));
        const double frac = centre - static_cast<double>(left);
        profile.weights[static_cast<std::size_t>(left - lo)] += (1.0 - frac) * config.mu_ge / dx;
        if (left + 1 <= hi) profile.weights[static_cast<std::size_t>(left + 1 - lo)] += frac * config.mu_ge / dx;
        return profile;
    }
    if (config.mu_ge > 0.0) {
        const double scale = config.mu_ge / integral;
        for (auto& w : profile.weights) w *= scale;
    }
    return profile;
}

CavityModel::CavityModel(SystemConfig config) : config_(std::move(config)) {
    config_.validate();
    modes_ = build_mode_basis(config_);
    coupling_ = build_coupling(config_, modes_);

    const std::size_t ng = config_.grid_points;
    const std::size_t nm = modes_.size();
    const std::size_t intervals = ng - 1;
    grid_.resize(ng);
    for (std::size_t k = 0; k < ng; ++k) grid_[k] = static_cast<double>(k) * config_.dx();

    for (std::size_t a = 0; a < config_.tls_count(); ++a) {
        auto it = std::find_if(groups_.begin(), groups_.end(), [&](const ProfileGroup& g) {
            return config_.positions[g.members.front()] == config_.positions[a];
        });
        if (it != groups_.end()) {
            it->members.push_back(a);
        } else {
            profiles_.push_back(polarization_profile(config_, a));
            groups_.push_back({profiles_.size() - 1, {a}});
        }
    }

    weights_.resize(config_.tls_count() * nm);
    for (std::size_t a = 0; a < config_.tls_count(); ++a)
        for (std::size_t j = 0; j < nm; ++j)
            weights_[a * nm + j] = std::sqrt(2.0 * modes_.omega[j]) * coupling_(a, j);

    sin_table_.resize(nm * ng);
    cos_half_table_.resize(nm * intervals);
    baseline_.assign(ng, 0.0);
    for (std::size_t j = 0; j < nm; ++j) {
        const std::size_t mode = modes_.index[j];
        double* s = sin_table_.data() + j * ng;
        double* c = cos_half_table_.data() + j * intervals;
        const double eps2 = modes_.eps[j] * modes_.eps[j];
        for (std::size_t k = 0; k < ng; ++k) {
            s[k] = sin_pi_ratio(mode * k, intervals);
            baseline_[k] += eps2 * s[k] * s[k];
        }
        for (std::size_t k = 0; k < intervals; ++k) c[k] = cos_pi_ratio(mode * (2 * k + 1), 2 * intervals);
    }
}

bool CavityModel::source_under_resolved() const noexcept {
    return std::any_of(profiles_.begin(), profiles_.end(), [](const GridProfile& p) { return p.under_resolved; });
}

}  // namespace mmst
