#pragma once

// Direct integration of the MMST equations in the photon-mode basis.
// Strang splitting: half kick from the TLS-field coupling (exact, since <sigma_x>
// is conserved by its own rotation), exact free evolution of every oscillator and
// TLS phase, then a second half kick. Time reversible; use a negative dt to run
// backwards.

#include <span>
#include <vector>

#include "mmst/model.hpp"
#include "mmst/sampling.hpp"
#include "mmst/trajectory.hpp"

namespace mmst {

struct ModeState {
    std::vector<double> x;
    std::vector<double> p;
    ElectronicSample electrons;
    double time = 0.0;
};

ModeState make_mode_state(const InitialSample& sample);

class ModePropagator {
public:
    ModePropagator(const CavityModel& model, double dt);

    void step(ModeState& state) const;
    [[nodiscard]] double dt() const noexcept { return dt_; }

private:
    void kick(ModeState& state, double h) const;

    const CavityModel* model_;
    double dt_;
    std::vector<double> cos_wdt_;
    std::vector<double> sin_wdt_;
    std::complex<double> tls_phase_;
};

/// One Strang step of length dt (negative dt runs backwards).
void step_modes(ModeState& state, const CavityModel& model, double dt);

/// sum_a [ omega0/2 (|c_e|^2 - |c_g|^2) + V_a 2 Re(c_e^* c_g) ] + sum_j (P^2 + omega^2 X^2) / 2,
/// with V_a = -sum_j sqrt(2 omega_j) g_j^(a) X_j.
double classical_energy(const ModeState& state, const CavityModel& model);

/// V_a = -mu E(r_a) for every TLS.
std::vector<double> tls_potentials(const ModeState& state, const CavityModel& model);

/// E_z(r) = sum sqrt(2/L) omega_j X_j sin(k_j r).
double field_e(const ModeState& state, const ModeBasis& basis, double length, double r);
/// B_y(r) = sum sqrt(2/L) P_j cos(k_j r).
double field_b(const ModeState& state, const ModeBasis& basis, double length, double r);
struct FieldProfiles {
    std::vector<double> e;
    std::vector<double> b;
};
/// E_z and B_y at each point of `r`.
FieldProfiles synthesize_fields(const ModeState& state, const ModeBasis& basis, double length,
                                std::span<const double> r);

/// E_z on every grid node of `model`.
std::vector<double> field_e_on_grid(const ModeState& state, const CavityModel& model);

TrajectoryResult run_trajectory_modes(const CavityModel& model, const InitialSample& sample,
                                      const ObservationSchedule& schedule);

}  // namespace mmst
