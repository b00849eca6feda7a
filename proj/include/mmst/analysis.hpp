#pragma once

// Rate fits, mean-field superradiance curves, delay times and derivatives.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mmst {

enum class FitModel { single_exponential, biexponential };

struct FitResult {
    FitModel model = FitModel::single_exponential;
    double k = 0.0;          ///< single exponential: rho = B exp(-k t)
    double intercept = 1.0;  ///< B
    double amplitude = 1.0;  ///< biexponential A (slow weight)
    double k_slow = 0.0;
    double k_fast = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;
    double residual = 0.0;   ///< Euclidean norm of the fit residuals
    bool converged = true;
    bool degenerate = false; ///< biexponential collapsed onto a single exponential
    std::size_t points = 0;
    double r_squared = 0.0;
};

std::string fit_model_name(FitModel m);

/// Least squares on log(rho) over samples with t in [t_begin, t_end]. With fix_intercept the
/// fit is log rho = -k t (rho(0) = 1). Throws std::domain_error on non-positive values.
FitResult fit_exponential(std::span<const double> t, std::span<const double> rho, double t_begin, double t_end,
                          bool fix_intercept = false);

/// A exp(-k_s t) + (1 - A) exp(-k_f t), k_s <= k_f, A in [0, 1]. Multi-start Nelder-Mead over
/// (log k_s, log k_f) with A solved in closed form. Needs at least 10 samples.
FitResult fit_biexponential(std::span<const double> t, std::span<const double> rho, std::size_t starts = 8);

/// Rate k whose exponential exp(-k t) has the same mean over [t_begin, t_end] as rho (trapezoid
/// average). Tolerates noisy or slightly negative data; a mean at or below zero returns +inf and
/// a mean above 1 gives a negative rate.
double effective_rate(std::span<const double> t, std::span<const double> rho, double t_begin, double t_end);

/// Average excited fraction of N co-located TLSs on the symmetric Dicke ladder, all excited at
/// t = 0, with step rates k (J + M)(J - M + 1). Integrated with an adaptive GSL Runge-Kutta solver.
std::vector<double> dicke_ladder_population(std::size_t n, double k, std::span<const double> t);

/// (k N / 4) sech^2(k N (t - t_D) / 2).
std::vector<double> dicke_meanfield_curve(std::size_t n, double k, double t_d, std::span<const double> t);

/// Centered differences after a moving average of `smoothing_points` samples (0 or 1: none).
/// One-sided differences at both ends. Throws std::invalid_argument when the window exceeds the series.
std::vector<double> numerical_derivative(std::span<const double> y, double dt, std::size_t smoothing_points = 0);

/// Odd number of samples spanning `width` time units on a grid of spacing dt.
std::size_t smoothing_points(double width, double dt);

/// Time of the steepest decline of rho, i.e. the maximum of -d rho/dt after smoothing, restricted
/// to t <= window_end. Empty when the series is flat.
std::optional<double> delay_time(std::span<const double> t, std::span<const double> rho, double smoothing_width = 0.05,
                                 double window_end = std::numeric_limits<double>::infinity());

struct DelayStatistics {
    std::vector<double> delays;
    std::size_t missing = 0;
    double mean = 0.0;
    double std_dev = 0.0;         ///< sample standard deviation (n - 1)
    double reference_mean = 0.0;  ///< (1 / N k) sum_{s=1}^N 1/s
    double reference_std = 0.0;   ///< (1 / N k) sqrt(sum_{s=1}^N 1/s^2)
};

DelayStatistics delay_reference(std::size_t n, double k);

/// Needs at least two valid delays; throws std::invalid_argument otherwise.
DelayStatistics delay_statistics(std::span<const std::optional<double>> delays, std::size_t n, double k);

/// Ordinary least squares y = a + b x.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};
LinearFit linear_regression(std::span<const double> x, std::span<const double> y);

}  // namespace mmst
