#include "mmst/sampling.hpp"

#include <cmath>

#include "mmst/errors.hpp"

namespace mmst {

SamplingOptions SamplingOptions::from_name(std::string_view name, double gamma) {
    SamplingOptions o;
    o.gamma = gamma;
    if (name == "both") {
    } else if (name == "electronic") {
        o.photonic = false;
    } else if (name == "photonic") {
        o.electronic = false;
    } else if (name == "none" || name == "ehrenfest") {
        o.photonic = false;
        o.electronic = false;
    } else {
        throw ConfigError("unknown sampling variant '" + std::string(name) + "'");
    }
    return o;
}

std::string SamplingOptions::name() const {
    if (photonic && electronic) return "both";
    if (electronic) return "electronic";
    if (photonic) return "photonic";
    return "none";
}

std::mt19937_64 trajectory_engine(std::uint64_t master_seed, std::uint64_t index, RngStream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

PhotonSample sample_photon_vacuum(std::mt19937_64& rng, const ModeBasis& basis, const SamplingOptions& options) {
    PhotonSample s;
    s.x.assign(basis.size(), 0.0);
    s.p.assign(basis.size(), 0.0);
    if (!options.photonic) return s;
    std::normal_distribution<double> unit(0.0, 1.0);
    // Wigner density exp(-P^2/omega - omega X^2) / pi.
    for (std::size_t j = 0; j < basis.size(); ++j) {
        const double w = basis.omega[j];
        s.x[j] = unit(rng) / std::sqrt(2.0 * w);
        s.p[j] = unit(rng) * std::sqrt(0.5 * w);
    }
    return s;
}

ElectronicSample sample_electronic(std::mt19937_64& rng, const std::vector<bool>& initially_excited,
                                   const SamplingOptions& options) {
    if (!(options.gamma >= 0.0 && options.gamma <= 0.5)) throw ConfigError("gamma must lie in [0, 0.5]");
    ElectronicSample out;
    out.reserve(initially_excited.size());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const bool excited : initially_excited) {
        const double n0g = excited ? 0.0 : 1.0;
        const double n0e = excited ? 1.0 : 0.0;
        if (!options.electronic) {
            out.push_back({std::sqrt(n0g), std::sqrt(n0e)});
            continue;
        }
        const double ng = n0g + 2.0 * options.gamma * unit(rng);
        const double tg = 2.0 * kPi * unit(rng);
        const double ne = n0e + 2.0 * options.gamma * unit(rng);
        const double te = 2.0 * kPi * unit(rng);
        out.push_back({std::polar(std::sqrt(ng), tg), std::polar(std::sqrt(ne), te)});
    }
    return out;
}

InitialSample draw_initial_sample(std::uint64_t master_seed, std::uint64_t index, const SystemConfig& config,
                                  const ModeBasis& basis, const SamplingOptions& options) {
    InitialSample s;
    auto photon_rng = trajectory_engine(master_seed, index, RngStream::photonic);
    s.photons = sample_photon_vacuum(photon_rng, basis, options);
    auto electron_rng = trajectory_engine(master_seed, index, RngStream::electronic);
    s.electrons = sample_electronic(electron_rng, config.initially_excited, options);
    return s;
}

}  // namespace mmst
