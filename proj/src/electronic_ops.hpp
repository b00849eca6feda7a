#pragma once

// Exact unitary factors shared by both trajectory engines.

#include <cmath>
#include <complex>

#include "mmst/sampling.hpp"

namespace mmst::detail {

/// c <- exp(-i angle sigma_x) c, given cos(angle) and sin(angle).
inline void rotate_sigma_x(TlsAmplitudes& c, double cs, double sn) noexcept {
    const std::complex<double> g = c.ground;
    const std::complex<double> e = c.excited;
    const std::complex<double> minus_i_sn{0.0, -sn};
    c.ground = cs * g + minus_i_sn * e;
    c.excited = cs * e + minus_i_sn * g;
}

/// c <- exp(-i (omega0/2) sigma_z tau) c, given phase = exp(-i omega0 tau / 2).
inline void rotate_sigma_z(TlsAmplitudes& c, std::complex<double> phase) noexcept {
    c.excited *= phase;
    c.ground *= std::conj(phase);
}

/// 2 Re(c_e^* c_g) = <sigma_x> of the unnormalized mapping state.
inline double sigma_x(const TlsAmplitudes& c) noexcept { return 2.0 * (std::conj(c.excited) * c.ground).real(); }

/// Im[rho_ge] with rho_ge = c_g c_e^*.
inline double im_rho_ge(const TlsAmplitudes& c) noexcept { return (c.ground * std::conj(c.excited)).imag(); }

inline bool finite(const TlsAmplitudes& c) noexcept {
    return std::isfinite(c.ground.real()) && std::isfinite(c.ground.imag()) && std::isfinite(c.excited.real()) &&
           std::isfinite(c.excited.imag());
}

}  // namespace mmst::detail
