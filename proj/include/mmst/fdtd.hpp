#pragma once

// Split-operator FDTD propagation of one MMST trajectory: Yee-grid Maxwell
// updates driven by the mean-field current, and unitary split-operator steps
// for each TLS.
//
// Time staggering: E_z and the electronic amplitudes live at half-integer steps
// m + 1/2, B_y at integer steps. B_y(k + 1/2) is stored at index k.
// Sign convention: dE/dt = -dB/dx - J and dB/dt = -dE/dx, which is the pair
// consistent with E = sum sqrt(2/L) omega X sin(kr), B = sum sqrt(2/L) P cos(kr).

#include <span>
#include <vector>

#include "mmst/model.hpp"
#include "mmst/sampling.hpp"
#include "mmst/trajectory.hpp"

namespace mmst {

struct YeeField {
    std::vector<double> e;  ///< grid_points nodes, mirrors at both ends
    std::vector<double> b;  ///< grid_points - 1 half nodes

    /// (1/2) int (E^2 + B^2) dr using the stored (staggered) values.
    [[nodiscard]] double energy(double dx) const;
};

/// E_z^{1/2} and B_y^{1} from sampled mode coordinates; P is advanced by a half step
/// before building B.
YeeField init_yee_fields(const PhotonSample& photons, const CavityModel& model);

/// One leapfrog update: E (with current injection E -= J dt), mirrors re-zeroed, then B.
/// Throws ConfigError when c dt > dx.
void step_fdtd(YeeField& field, double dt, double dx, std::span<const double> current);

/// J_z(r) = sum_alpha -2 omega0 Im[c_g c_e^*] xi_alpha(r) on the E grid.
std::vector<double> current_density(std::span<const TlsAmplitudes> electrons, const std::vector<GridProfile>& profiles,
                                    double omega0, std::size_t grid_points);

/// Trapezoid quadrature of E_z(r) xi(r).
double field_overlap(std::span<const double> e, const GridProfile& profile, double dx);

/// exp(-i V2 sx dt/2) exp(-i H_s dt) exp(-i V1 sx dt/2), H_s = omega0 sz / 2.
void step_electronic(TlsAmplitudes& c, double v_first, double v_second, double omega0, double dt);

/// Same step with V = -int E xi dr taken from `e` for both half kicks.
void step_electronic(TlsAmplitudes& c, std::span<const double> e, const GridProfile& profile, double omega0,
                     double dx, double dt);

TrajectoryResult run_trajectory_fdtd(const CavityModel& model, const InitialSample& sample,
                                     const ObservationSchedule& schedule);

}  // namespace mmst
