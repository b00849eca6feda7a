#pragma once

// Exact single-excitation (CIS) dynamics of N TLSs in the multimode cavity.
// Basis ordering: |g,0>, |e_1,0> ... |e_N,0>, |g,1_1> ... |g,1_M>.

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mmst/model.hpp"

namespace mmst {

using cplx = std::complex<double>;

struct CisState {
    cplx ground{0.0, 0.0};
    std::vector<cplx> tls;      ///< c_alpha
    std::vector<cplx> photons;  ///< d_j

    [[nodiscard]] std::size_t dimension() const noexcept { return 1 + tls.size() + photons.size(); }
    [[nodiscard]] double norm_squared() const;

    [[nodiscard]] Eigen::VectorXcd to_vector() const;
    static CisState from_vector(const Eigen::VectorXcd& v, std::size_t tls_count, std::size_t mode_count);
};

/// |e_alpha>|0>, or the global ground state |g>|0> when no TLS is given.
CisState cis_basis_state(std::size_t tls_count, std::size_t mode_count, std::optional<std::size_t> excited_tls);
/// Initial state from the configuration flags; at most one TLS may be excited.
CisState cis_initial_state(const SystemConfig& config);

class CisHamiltonian {
public:
    CisHamiltonian(const SystemConfig& config, const ModeBasis& basis);

    [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return h_; }
    [[nodiscard]] const Eigen::VectorXd& eigenvalues() const noexcept { return values_; }
    [[nodiscard]] const Eigen::MatrixXd& eigenvectors() const noexcept { return vectors_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(h_.rows()); }
    [[nodiscard]] std::size_t tls_count() const noexcept { return tls_; }
    [[nodiscard]] std::size_t mode_count() const noexcept { return modes_; }

    [[nodiscard]] CisState propagate(const CisState& psi0, double t) const;
    /// Batch propagation; projects psi0 onto the eigenbasis once.
    [[nodiscard]] std::vector<CisState> propagate(const CisState& psi0, std::span<const double> times) const;
    [[nodiscard]] double energy(const CisState& psi) const;

private:
    std::size_t tls_;
    std::size_t modes_;
    Eigen::MatrixXd h_;
    Eigen::VectorXd values_;
    Eigen::MatrixXd vectors_;
};

CisHamiltonian build_cis_hamiltonian(const SystemConfig& config);
CisState propagate_cis(const CisHamiltonian& h, const CisState& psi0, double t);

double cis_population(const CisState& psi, std::size_t alpha);

/// Normal-ordered intensity 2 eps0 |sum_j eps_j sin(k_j r) d_j|^2 at each r.
std::vector<double> cis_intensity(const CisState& psi, const ModeBasis& basis, std::span<const double> r);

struct QuantumSeries {
    std::vector<double> times;
    std::vector<double> populations;  ///< [time][tls]
    std::vector<double> snapshot_times;
    std::vector<std::vector<double>> intensity;  ///< [snapshot][grid node]
};

/// Reference run on the given output times; intensity snapshots on the model grid.
QuantumSeries run_quantum_reference(const CavityModel& model, std::span<const double> times,
                                    std::span<const double> snapshot_times);

}  // namespace mmst
