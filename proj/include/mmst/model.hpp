#pragma once

// Physical parameters, photon-mode basis, light-matter couplings and the
// spatial grid shared by every propagator. Natural units: hbar = c = eps0 = 1.

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace mmst {

inline constexpr double kPi = std::numbers::pi;

struct SystemConfig {
    double length = 2.0 * kPi;          ///< cavity length L
    std::size_t mode_count = 400;       ///< M
    std::size_t first_mode = 1;         ///< index j of the lowest retained mode
    double omega0 = 100.0;              ///< TLS transition frequency
    double mu_ge = 0.1 / std::numbers::inv_sqrtpi;  ///< sqrt(pi) / 10
    std::vector<double> positions{kPi};
    std::vector<bool> initially_excited{true};
    std::size_t grid_points = 5001;     ///< N_grids, E_z nodes including both mirrors
    double dt_divisor = 2.0;            ///< dt = dx / (dt_divisor c)
    double sigma = 1e-3;                ///< Gaussian width of each polarization profile
    double gamma = 0.45;                ///< electronic ZPE window parameter
    double t_final = 3.0 * kPi;
    double output_interval = 0.01;      ///< spacing of recorded population samples

    [[nodiscard]] std::size_t tls_count() const noexcept { return positions.size(); }
    [[nodiscard]] double dx() const noexcept { return length / static_cast<double>(grid_points - 1); }
    [[nodiscard]] double dt() const noexcept { return dx() / dt_divisor; }
    [[nodiscard]] std::size_t step_count() const;
    [[nodiscard]] std::size_t output_stride() const;
    [[nodiscard]] std::size_t excited_count() const;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

/// First mode index such that `count` modes are centred on omega0.
std::size_t centered_first_mode(double length, double omega0, std::size_t count);

struct ModeBasis {
    std::vector<std::size_t> index;  ///< physical mode number j
    std::vector<double> omega;       ///< j pi c / L
    std::vector<double> k;           ///< omega / c
    std::vector<double> eps;         ///< sqrt(hbar omega / (eps0 L))

    [[nodiscard]] std::size_t size() const noexcept { return omega.size(); }
};

ModeBasis build_mode_basis(double length, std::size_t count, std::size_t first_mode = 1);
ModeBasis build_mode_basis(const SystemConfig& config);

/// Dense N x M table of g_j^(alpha).
class CouplingMatrix {
public:
    CouplingMatrix() = default;
    CouplingMatrix(std::size_t tls, std::size_t modes) : tls_(tls), modes_(modes), g_(tls * modes, 0.0) {}

    [[nodiscard]] double operator()(std::size_t alpha, std::size_t j) const { return g_[alpha * modes_ + j]; }
    double& operator()(std::size_t alpha, std::size_t j) { return g_[alpha * modes_ + j]; }
    [[nodiscard]] std::span<const double> row(std::size_t alpha) const {
        return {g_.data() + alpha * modes_, modes_};
    }
    [[nodiscard]] std::size_t tls_count() const noexcept { return tls_; }
    [[nodiscard]] std::size_t mode_count() const noexcept { return modes_; }

private:
    std::size_t tls_ = 0;
    std::size_t modes_ = 0;
    std::vector<double> g_;
};

/// g for TLS `alpha` and physical mode number `j`; j must lie inside the configured basis.
double coupling_constant(const SystemConfig& config, std::size_t alpha, std::size_t j);
CouplingMatrix build_coupling(const SystemConfig& config, const ModeBasis& basis);

/// One-dimensional Fermi golden rule rate omega0 mu^2 / (eps0 hbar c).
double fgr_rate(double omega0, double mu_ge);

/// Polarization density xi_alpha sampled on E_z grid nodes [first, first + weights.size()).
struct GridProfile {
    std::size_t first = 0;
    std::vector<double> weights;
    bool under_resolved = false;  ///< sigma < dx: the source collapses onto one or two nodes
};

/// Normalized Gaussian mu_ge exp(-(r-r_a)^2 / 2 sigma^2) / (sqrt(2 pi) sigma), truncated at
/// 8 sigma and rescaled so its trapezoid integral on the grid is exactly mu_ge.
GridProfile polarization_profile(const SystemConfig& config, std::size_t alpha);

/// Immutable precomputation shared by all trajectories of one configuration.
class CavityModel {
public:
    explicit CavityModel(SystemConfig config);

    [[nodiscard]] const SystemConfig& config() const noexcept { return config_; }
    [[nodiscard]] const ModeBasis& modes() const noexcept { return modes_; }
    [[nodiscard]] const CouplingMatrix& coupling() const noexcept { return coupling_; }
    [[nodiscard]] std::span<const double> grid() const noexcept { return grid_; }
    [[nodiscard]] const std::vector<GridProfile>& profiles() const noexcept { return profiles_; }
    [[nodiscard]] bool source_under_resolved() const noexcept;

    /// TLSs sharing a position share one profile; `members` lists their indices.
    struct ProfileGroup {
        std::size_t profile;
        std::vector<std::size_t> members;
    };
    [[nodiscard]] const std::vector<ProfileGroup>& profile_groups() const noexcept { return groups_; }

    /// sqrt(2 omega_j) g_j^(alpha): the field-to-TLS coupling for mode coordinates.
    [[nodiscard]] std::span<const double> mode_weights(std::size_t alpha) const {
        return {weights_.data() + alpha * modes_.size(), modes_.size()};
    }
    /// sin(k_j r_k) for all grid nodes k.
    [[nodiscard]] std::span<const double> mode_sin(std::size_t j) const {
        return {sin_table_.data() + j * grid_.size(), grid_.size()};
    }
    /// cos(k_j (r_k + dx/2)) for the B_y half nodes.
    [[nodiscard]] std::span<const double> mode_cos_half(std::size_t j) const {
        return {cos_half_table_.data() + j * (grid_.size() - 1), grid_.size() - 1};
    }
    /// eps0 sum_j eps_j^2 sin^2(k_j r): the vacuum ZPE intensity at each grid node.
    [[nodiscard]] std::span<const double> vacuum_baseline() const noexcept { return baseline_; }

private:
    SystemConfig config_;
    ModeBasis modes_;
    CouplingMatrix coupling_;
    std::vector<double> grid_;
    std::vector<GridProfile> profiles_;
    std::vector<ProfileGroup> groups_;
    std::vector<double> weights_;
    std::vector<double> sin_table_;
    std::vector<double> cos_half_table_;
    std::vector<double> baseline_;
};

}  // namespace mmst
