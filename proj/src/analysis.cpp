#include "mmst/analysis.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_odeiv2.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmst {

std::string fit_model_name(FitModel m) { return m == FitModel::single_exponential ? "exp" : "biexp"; }

LinearFit linear_regression(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear regression needs >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear regression: x values are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

FitResult fit_exponential(std::span<const double> t, std::span<const double> rho, double t_begin, double t_end,
                          bool fix_intercept) {
    if (t.size() != rho.size()) throw std::invalid_argument("time and value series differ in length");
    std::vector<double> ts;
    std::vector<double> logs;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_begin || t[i] > t_end) continue;
        if (!(rho[i] > 0.0))
            throw std::domain_error("exponential fit: non-positive value " + std::to_string(rho[i]) +
                                    " at t = " + std::to_string(t[i]));
        ts.push_back(t[i]);
        logs.push_back(std::log(rho[i]));
    }
    FitResult f;
    f.model = FitModel::single_exponential;
    f.t_begin = t_begin;
    f.t_end = t_end;
    f.points = ts.size();
    if (fix_intercept) {
        if (ts.empty()) throw std::invalid_argument("exponential fit: no samples in window");
        double stt = 0.0;
        double sty = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            stt += ts[i] * ts[i];
            sty += ts[i] * logs[i];
        }
        if (stt == 0.0) throw std::invalid_argument("exponential fit: window contains only t = 0");
        f.k = -sty / stt;
        f.intercept = 1.0;
        f.r_squared = ts.size() >= 2 ? linear_regression(ts, logs).r_squared : 1.0;
    } else {
        if (ts.size() < 2) throw std::invalid_argument("exponential fit: fewer than two samples in window");
        const LinearFit lf = linear_regression(ts, logs);
        f.k = -lf.slope;
        f.intercept = std::exp(lf.intercept);
        f.r_squared = lf.r_squared;
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double d = std::exp(logs[i]) - f.intercept * std::exp(-f.k * ts[i]);
        ss += d * d;
    }
    f.residual = std::sqrt(ss);
    return f;
}

namespace {

struct BiexpData {
    std::span<const double> t;
    std::span<const double> y;
};

// Optimal A in [0, 1] for fixed rates, and the resulting sum of squares.
std::pair<double, double> biexp_profile(const BiexpData& d, double ks, double kf) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        const double es = std::exp(-ks * d.t[i]);
        const double ef = std::exp(-kf * d.t[i]);
        const double diff = es - ef;
        num += diff * (d.y[i] - ef);
        den += diff * diff;
    }
    const double a = den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 1.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        const double r = d.y[i] - (a * std::exp(-ks * d.t[i]) + (1.0 - a) * std::exp(-kf * d.t[i]));
        ss += r * r;
    }
    return {a, ss};
}

double biexp_objective(const gsl_vector* v, void* params) {
    const auto* d = static_cast<const BiexpData*>(params);
    const double ls = gsl_vector_get(v, 0);
    const double lf = gsl_vector_get(v, 1);
    if (std::abs(ls) > 50.0 || std::abs(lf) > 50.0) return 1e300;
    return biexp_profile(*d, std::exp(ls), std::exp(lf)).second;
}

}  // namespace

FitResult fit_biexponential(std::span<const double> t, std::span<const double> rho, std::size_t starts) {
    if (t.size() != rho.size()) throw std::invalid_argument("time and value series differ in length");
    if (t.size() < 10) throw std::invalid_argument("biexponential fit needs at least 10 samples");
    if (starts == 0) starts = 1;
    const BiexpData data{t, rho};

    // Rate scale from the time needed to fall below 1/e, or the series span.
    double k0 = 1.0 / std::max(t.back() - t.front(), 1e-12);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (rho[i] < std::exp(-1.0) && t[i] > t.front()) {
            k0 = 1.0 / (t[i] - t.front());
            break;
        }
    }
    static constexpr std::array<std::pair<double, double>, 8> kGrid{{
        {0.2, 2.0}, {0.5, 5.0}, {0.1, 10.0}, {0.05, 1.0}, {0.3, 30.0}, {0.02, 3.0}, {1.0, 1.5}, {0.01, 20.0}}};

    gsl_set_error_handler_off();
    gsl_multimin_function fn{&biexp_objective, 2, const_cast<BiexpData*>(&data)};
    const gsl_multimin_fminimizer_type* type = gsl_multimin_fminimizer_nmsimplex2;
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(type, 2);
    gsl_vector* x = gsl_vector_alloc(2);
    gsl_vector* step = gsl_vector_alloc(2);

    double best = std::numeric_limits<double>::infinity();
    double best_ls = 0.0;
    double best_lf = 0.0;
    bool best_converged = false;
    for (std::size_t i = 0; i < starts; ++i) {
        const auto [fs, ff] = kGrid[i % kGrid.size()];
        const double jitter = 1.0 + 0.37 * static_cast<double>(i / kGrid.size());
        gsl_vector_set(x, 0, std::log(k0 * fs * jitter));
        gsl_vector_set(x, 1, std::log(k0 * ff * jitter));
        gsl_vector_set_all(step, 0.5);
        gsl_multimin_fminimizer_set(s, &fn, x, step);
        int status = GSL_CONTINUE;
        for (int iter = 0; iter < 2000 && status == GSL_CONTINUE; ++iter) {
            if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
            status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-10);
        }
        const double val = s->fval;
        if (val < best) {
            best = val;
            best_ls = gsl_vector_get(s->x, 0);
            best_lf = gsl_vector_get(s->x, 1);
            best_converged = status == GSL_SUCCESS;
        }
    }
    gsl_vector_free(step);
    gsl_vector_free(x);
    gsl_multimin_fminimizer_free(s);

    double ks = std::exp(best_ls);
    double kf = std::exp(best_lf);
    double a = biexp_profile(data, ks, kf).first;
    if (ks > kf) {
        std::swap(ks, kf);
        a = 1.0 - a;
    }
    FitResult f;
    f.model = FitModel::biexponential;
    f.amplitude = a;
    f.k_slow = ks;
    f.k_fast = kf;
    f.t_begin = t.front();
    f.t_end = t.back();
    f.points = t.size();
    f.residual = std::sqrt(best);
    f.converged = best_converged && std::isfinite(best);
    f.degenerate = (kf - ks) <= 1e-2 * kf || a < 1e-3 || a > 1.0 - 1e-3;
    f.k = f.degenerate ? (a < 0.5 ? kf : ks) : ks;
    return f;
}

double effective_rate(std::span<const double> t, std::span<const double> rho, double t_begin, double t_end) {
    if (t.size() != rho.size()) throw std::invalid_argument("time and population series differ in length");
    if (!(t_begin < t_end)) throw std::invalid_argument("empty averaging window");
    double area = 0.0;
    double span = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double a = std::max(t[i], t_begin);
        const double b = std::min(t[i + 1], t_end);
        if (b <= a) continue;
        // linear interpolation between the samples
        const double slope = (rho[i + 1] - rho[i]) / (t[i + 1] - t[i]);
        const double ya = rho[i] + slope * (a - t[i]);
        const double yb = rho[i] + slope * (b - t[i]);
        area += 0.5 * (ya + yb) * (b - a);
        span += b - a;
    }
    if (span <= 0.0) throw std::invalid_argument("averaging window does not overlap the series");
    const double target = area / span;
    if (target <= 0.0) return std::numeric_limits<double>::infinity();
    // mean of exp(-k t) over the window; decreasing in k
    auto mean_exp = [&](double k) {
        if (std::abs(k) * (t_end - t_begin) < 1e-8) return std::exp(-k * 0.5 * (t_begin + t_end));
        return (std::exp(-k * t_begin) - std::exp(-k * t_end)) / (k * (t_end - t_begin));
    };
    double lo = -1.0;
    double hi = 1.0;
    while (mean_exp(lo) < target) lo *= 2.0;
    while (mean_exp(hi) > target) {
        hi *= 2.0;
        if (hi > 1e8) return std::numeric_limits<double>::infinity();
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_exp(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

struct LadderRates {
    std::vector<double> rate;  // rate out of level m (m excitations)
};

int ladder_rhs(double, const double y[], double dydt[], void* params) {
    const auto& r = static_cast<const LadderRates*>(params)->rate;
    const std::size_t levels = r.size();
    for (std::size_t m = 0; m < levels; ++m) {
        dydt[m] = -r[m] * y[m];
        if (m + 1 < levels) dydt[m] += r[m + 1] * y[m + 1];
    }
    return GSL_SUCCESS;
}

}  // namespace

std::vector<double> dicke_ladder_population(std::size_t n, double k, std::span<const double> t) {
    if (n == 0) throw std::invalid_argument("Dicke ladder needs N >= 1");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] < t[i - 1]) throw std::invalid_argument("times must be non-decreasing");
    // level m = J + M excitations; rate m (N - m + 1) k
    LadderRates rates;
    rates.rate.resize(n + 1);
    for (std::size_t m = 0; m <= n; ++m)
        rates.rate[m] = k * static_cast<double>(m) * static_cast<double>(n - m + 1);
    std::vector<double> y(n + 1, 0.0);
    y[n] = 1.0;
    gsl_odeiv2_system sys{ladder_rhs, nullptr, n + 1, &rates};
    gsl_odeiv2_driver* driver = gsl_odeiv2_driver_alloc_y_new(&sys, gsl_odeiv2_step_rk8pd, 1e-6, 1e-12, 1e-12);
    std::vector<double> out(t.size());
    double now = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] > now) {
            const int status = gsl_odeiv2_driver_apply(driver, &now, t[i], y.data());
            if (status != GSL_SUCCESS) {
                gsl_odeiv2_driver_free(driver);
                throw std::runtime_error("Dicke ladder integration failed");
            }
        }
        double excited = 0.0;
        for (std::size_t m = 0; m <= n; ++m) excited += static_cast<double>(m) * y[m];
        out[i] = excited / static_cast<double>(n);
    }
    gsl_odeiv2_driver_free(driver);
    return out;
}

std::vector<double> dicke_meanfield_curve(std::size_t n, double k, double t_d, std::span<const double> t) {
    if (n == 0) throw std::invalid_argument("Dicke curve needs N >= 1");
    const double kn = k * static_cast<double>(n);
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double c = std::cosh(0.5 * kn * (t[i] - t_d));
        out[i] = 0.25 * kn / (c * c);
    }
    return out;
}

std::size_t smoothing_points(double width, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    auto n = static_cast<std::size_t>(std::llround(std::max(width, 0.0) / dt));
    if (n % 2 == 0) ++n;
    return n;
}

namespace {

// Centered moving average; the window shrinks symmetrically near the ends.
std::vector<double> moving_average(std::span<const double> y, std::size_t points) {
    if (points <= 1) return {y.begin(), y.end()};
    const std::size_t half = points / 2;
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const std::size_t h = std::min({half, i, y.size() - 1 - i});
        double s = 0.0;
        for (std::size_t q = i - h; q <= i + h; ++q) s += y[q];
        out[i] = s / static_cast<double>(2 * h + 1);
    }
    return out;
}

}  // namespace

std::vector<double> numerical_derivative(std::span<const double> y, double dt, std::size_t smoothing) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    if (y.size() < 2) throw std::invalid_argument("derivative needs at least two samples");
    if (smoothing > y.size()) throw std::invalid_argument("smoothing window exceeds the series length");
    const std::vector<double> s = moving_average(y, smoothing);
    std::vector<double> d(s.size());
    const std::size_t last = s.size() - 1;
    d[0] = (s[1] - s[0]) / dt;
    d[last] = (s[last] - s[last - 1]) / dt;
    for (std::size_t i = 1; i < last; ++i) d[i] = (s[i + 1] - s[i - 1]) / (2.0 * dt);
    return d;
}

std::optional<double> delay_time(std::span<const double> t, std::span<const double> rho, double smoothing_width,
                                 double window_end) {
    if (t.size() != rho.size()) throw std::invalid_argument("time and value series differ in length");
    std::size_t n = 0;
    while (n < t.size() && t[n] <= window_end) ++n;
    if (n < 3) return std::nullopt;
    const double dt = t[1] - t[0];
    const std::size_t points = std::min(smoothing_points(smoothing_width, dt), n % 2 == 1 ? n : n - 1);
    const auto d = numerical_derivative(rho.first(n), dt, points);
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (-d[i] > -d[best]) best = i;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(rho[i]));
    if (!(-d[best] > 1e-12 * std::max(scale, 1.0))) return std::nullopt;
    return t[best];
}

DelayStatistics delay_reference(std::size_t n, double k) {
    if (n == 0 || !(k > 0.0)) throw std::invalid_argument("delay reference needs N >= 1 and k > 0");
    double h1 = 0.0;
    double h2 = 0.0;
    for (std::size_t s = 1; s <= n; ++s) {
        h1 += 1.0 / static_cast<double>(s);
        h2 += 1.0 / static_cast<double>(s * s);
    }
    DelayStatistics d;
    const double nk = static_cast<double>(n) * k;
    d.reference_mean = h1 / nk;
    d.reference_std = std::sqrt(h2) / nk;
    return d;
}

DelayStatistics delay_statistics(std::span<const std::optional<double>> delays, std::size_t n, double k) {
    DelayStatistics d = delay_reference(n, k);
    for (const auto& v : delays) {
        if (v) d.delays.push_back(*v);
        else ++d.missing;
    }
    if (d.delays.size() < 2) throw std::invalid_argument("delay statistics need at least two valid delays");
    double mean = 0.0;
    for (const double v : d.delays) mean += v;
    mean /= static_cast<double>(d.delays.size());
    double ss = 0.0;
    for (const double v : d.delays) ss += (v - mean) * (v - mean);
    d.mean = mean;
    d.std_dev = std::sqrt(ss / static_cast<double>(d.delays.size() - 1));
    return d;
}

}  // namespace mmst
