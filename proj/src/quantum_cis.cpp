#include "mmst/quantum_cis.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "mmst/errors.hpp"

namespace mmst {

double CisState::norm_squared() const {
    double n = std::norm(ground);
    for (const auto& c : tls) n += std::norm(c);
    for (const auto& d : photons) n += std::norm(d);
    return n;
}

Eigen::VectorXcd CisState::to_vector() const {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(dimension()));
    v[0] = ground;
    Eigen::Index i = 1;
    for (const auto& c : tls) v[i++] = c;
    for (const auto& d : photons) v[i++] = d;
    return v;
}

CisState CisState::from_vector(const Eigen::VectorXcd& v, std::size_t tls_count, std::size_t mode_count) {
    CisState s;
    s.ground = v[0];
    s.tls.resize(tls_count);
    s.photons.resize(mode_count);
    Eigen::Index i = 1;
    for (auto& c : s.tls) c = v[i++];
    for (auto& d : s.photons) d = v[i++];
    return s;
}

CisState cis_basis_state(std::size_t tls_count, std::size_t mode_count, std::optional<std::size_t> excited_tls) {
    CisState s;
    s.tls.assign(tls_count, cplx{});
    s.photons.assign(mode_count, cplx{});
    if (excited_tls) {
        if (*excited_tls >= tls_count) throw ConfigError("TLS index out of range");
        s.tls[*excited_tls] = 1.0;
    } else {
        s.ground = 1.0;
    }
    return s;
}

CisState cis_initial_state(const SystemConfig& config) {
    std::optional<std::size_t> excited;
    for (std::size_t a = 0; a < config.tls_count(); ++a) {
        if (!config.initially_excited[a]) continue;
        if (excited) throw ConfigError("the CIS reference supports at most one initially excited TLS");
        excited = a;
    }
    return cis_basis_state(config.tls_count(), config.mode_count, excited);
}

CisHamiltonian::CisHamiltonian(const SystemConfig& config, const ModeBasis& basis)
    : tls_(config.tls_count()), modes_(basis.size()) {
    const auto dim = static_cast<Eigen::Index>(1 + tls_ + modes_);
    const auto n = static_cast<Eigen::Index>(tls_);
    h_ = Eigen::MatrixXd::Zero(dim, dim);
    // The ground configuration is decoupled under the rotating-wave approximation.
    for (Eigen::Index a = 0; a < n; ++a) h_(1 + a, 1 + a) = config.omega0;
    for (std::size_t j = 0; j < modes_; ++j) {
        const auto col = 1 + n + static_cast<Eigen::Index>(j);
        h_(col, col) = basis.omega[j];
    }
    const CouplingMatrix g = build_coupling(config, basis);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (std::size_t j = 0; j < modes_; ++j) {
            const auto col = 1 + n + static_cast<Eigen::Index>(j);
            h_(1 + a, col) = -g(static_cast<std::size_t>(a), j);
            h_(col, 1 + a) = -g(static_cast<std::size_t>(a), j);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h_);
    if (solver.info() != Eigen::Success) throw NumericalError("CIS eigen-decomposition failed");
    values_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
}

CisState CisHamiltonian::propagate(const CisState& psi0, double t) const {
    const double times[] = {t};
    return propagate(psi0, times).front();
}

std::vector<CisState> CisHamiltonian::propagate(const CisState& psi0, std::span<const double> times) const {
    if (psi0.dimension() != dimension()) throw ConfigError("state dimension does not match the Hamiltonian");
    const Eigen::VectorXcd coeff = vectors_.transpose().cast<cplx>() * psi0.to_vector();
    const Eigen::MatrixXcd vc = vectors_.cast<cplx>();
    std::vector<CisState> out;
    out.reserve(times.size());
    Eigen::VectorXcd phased(coeff.size());
    for (const double t : times) {
        for (Eigen::Index i = 0; i < coeff.size(); ++i) phased[i] = std::polar(1.0, -values_[i] * t) * coeff[i];
        out.push_back(CisState::from_vector(vc * phased, tls_, modes_));
    }
    return out;
}

double CisHamiltonian::energy(const CisState& psi) const {
    const Eigen::VectorXcd v = psi.to_vector();
    return (v.adjoint() * h_.cast<cplx>() * v)(0, 0).real();
}

CisHamiltonian build_cis_hamiltonian(const SystemConfig& config) {
    config.validate();
    return CisHamiltonian(config, build_mode_basis(config));
}

CisState propagate_cis(const CisHamiltonian& h, const CisState& psi0, double t) { return h.propagate(psi0, t); }

double cis_population(const CisState& psi, std::size_t alpha) {
    if (alpha >= psi.tls.size()) throw ConfigError("TLS index out of range");
    return std::norm(psi.tls[alpha]);
}

std::vector<double> cis_intensity(const CisState& psi, const ModeBasis& basis, std::span<const double> r) {
    if (psi.photons.size() != basis.size()) throw ConfigError("state and mode basis differ in mode count");
    std::vector<double> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        cplx amp{};
        for (std::size_t j = 0; j < basis.size(); ++j) amp += basis.eps[j] * std::sin(basis.k[j] * r[i]) * psi.photons[j];
        out[i] = 2.0 * std::norm(amp);
    }
    return out;
}

QuantumSeries run_quantum_reference(const CavityModel& model, std::span<const double> times,
                                    std::span<const double> snapshot_times) {
    const auto& config = model.config();
    const CisHamiltonian h(config, model.modes());
    const CisState psi0 = cis_initial_state(config);
    QuantumSeries series;
    series.times.assign(times.begin(), times.end());
    const std::size_t n = config.tls_count();
    series.populations.reserve(times.size() * n);
    for (const auto& psi : h.propagate(psi0, times))
        for (std::size_t a = 0; a < n; ++a) series.populations.push_back(cis_population(psi, a));

    series.snapshot_times.assign(snapshot_times.begin(), snapshot_times.end());
    const auto& basis = model.modes();
    const std::size_t ng = model.grid().size();
    for (const auto& psi : h.propagate(psi0, snapshot_times)) {
        // Reuse the model's sin table rather than re-evaluating sin(k_j r) per node.
        std::vector<cplx> amp(ng, cplx{});
        for (std::size_t j = 0; j < basis.size(); ++j) {
            const cplx w = basis.eps[j] * psi.photons[j];
            const auto s = model.mode_sin(j);
            for (std::size_t k = 0; k < ng; ++k) amp[k] += w * s[k];
        }
        std::vector<double> intensity(ng);
        for (std::size_t k = 0; k < ng; ++k) intensity[k] = 2.0 * std::norm(amp[k]);
        series.intensity.push_back(std::move(intensity));
    }
    return series;
}

}  // namespace mmst
