#pragma once

// Initial conditions for MMST trajectories: Wigner vacuum samples for the photon
// modes and square action-angle windows for the electronic mapping oscillators.

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mmst/model.hpp"

namespace mmst {

struct SamplingOptions {
    bool photonic = true;
    bool electronic = true;
    double gamma = 0.45;

    /// "both", "electronic", "photonic" or "none" (Ehrenfest).
    static SamplingOptions from_name(std::string_view name, double gamma = 0.45);
    [[nodiscard]] std::string name() const;
};

struct TlsAmplitudes {
    std::complex<double> ground;
    std::complex<double> excited;

    [[nodiscard]] double norm_squared() const noexcept { return std::norm(ground) + std::norm(excited); }
};
using ElectronicSample = std::vector<TlsAmplitudes>;

struct PhotonSample {
    std::vector<double> x;
    std::vector<double> p;
};

struct InitialSample {
    PhotonSample photons;
    ElectronicSample electrons;
};

enum class RngStream : std::uint32_t { photonic = 1, electronic = 2 };

/// Engine for one trajectory; depends only on (master_seed, index, stream).
std::mt19937_64 trajectory_engine(std::uint64_t master_seed, std::uint64_t index, RngStream stream);

PhotonSample sample_photon_vacuum(std::mt19937_64& rng, const ModeBasis& basis, const SamplingOptions& options);

ElectronicSample sample_electronic(std::mt19937_64& rng, const std::vector<bool>& initially_excited,
                                   const SamplingOptions& options);

/// Both samples for trajectory `index`, drawn from independent streams.
InitialSample draw_initial_sample(std::uint64_t master_seed, std::uint64_t index, const SystemConfig& config,
                                  const ModeBasis& basis, const SamplingOptions& options);

}  // namespace mmst
