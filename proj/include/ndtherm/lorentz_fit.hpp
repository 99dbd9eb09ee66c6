#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "ndtherm/errors.hpp"
#include "ndtherm/least_squares.hpp"
#include "ndtherm/line_shape.hpp"
#include "ndtherm/spectrum.hpp"

namespace ndtherm {

struct FitResult {
    DoubleLorentzianParams params;
    double d_mhz = 0.0;
    std::array<double, 7> std_errors{};  // same order as the parameter vector
    double sse = 0.0;
    LeastSquaresReport report;
};

// Parameter vector order used by the fit throughout:
// (baseline, contrast-, contrast+, f-, f+, fwhm-, fwhm+).
namespace detail {

inline std::array<double, 7> pack_params(const DoubleLorentzianParams& p) {
    return {p.baseline,    p.contrast_minus,  p.contrast_plus, p.f_minus_mhz,
            p.f_plus_mhz,  p.fwhm_minus_mhz,  p.fwhm_plus_mhz};
}

inline DoubleLorentzianParams unpack_params(std::span<const double> th) {
    return DoubleLorentzianParams{th[0], th[1], th[2], th[3], th[4], th[5], th[6]};
}

inline std::vector<double> moving_average(const std::vector<double>& v, int window) {
    const int n = static_cast<int>(v.size());
    const int half = std::max(window, 3) / 2;
    std::vector<double> out(v.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        double s = 0.0;
        for (int k = lo; k <= hi; ++k)
            s += v[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(i)] = s / (hi - lo + 1);
    }
    return out;
}

// Interior local minima, plateaus collapsed to their middle index.
inline std::vector<std::size_t> local_minima(const std::vector<double>& v) {
    std::vector<std::size_t> mins;
    const std::size_t n = v.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (v[i] < v[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && v[j + 1] == v[i])
                ++j;
            if (j + 1 < n && v[j + 1] > v[i])
                mins.push_back((i + j) / 2);
            i = j + 1;
        } else {
            ++i;
        }
    }
    return mins;
}

inline double width_from_half_depth(const Spectrum& s, const std::vector<double>& smoothed,
                                    std::size_t dip, double half_level) {
    std::optional<double> f_left, f_right;
    for (std::size_t i = dip; i-- > 0;) {
        if (smoothed[i] >= half_level) {
            f_left = s.frequencies_mhz[i];
            break;
        }
    }
    for (std::size_t i = dip + 1; i < s.size(); ++i) {
        if (smoothed[i] >= half_level) {
            f_right = s.frequencies_mhz[i];
            break;
        }
    }
    if (!f_left || !f_right)
        return 8.0;  // crossing ran off the sweep; a generic ODMR linewidth
    return *f_right - *f_left;
}

} // namespace detail

/// Data-driven starting point for the seven-parameter fit. Baseline from
/// the median of the top intensity quartile; dip centers from the two
/// lowest local minima of a moving-average-smoothed copy (window
/// max(3, L/40)) separated by at least 5 MHz; contrasts from dip depths;
/// widths from half-depth crossings with an 8 MHz fallback.
inline DoubleLorentzianParams auto_initialize(const Spectrum& s) {
    validate(s);
    const std::size_t n = s.size();
    if (n < 8)
        throw UnderDetermined("auto_initialize: needs at least 8 points, got " +
                              std::to_string(n));

    std::vector<double> sorted = s.intensities;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const std::size_t q = std::max<std::size_t>(1, n / 4);
    const double baseline = (q % 2 == 1) ? sorted[q / 2]
                                         : 0.5 * (sorted[q / 2 - 1] + sorted[q / 2]);
    if (!(baseline > 0.0))
        throw DipDetectionFailed("auto_initialize: non-positive baseline estimate");

    const int window = std::max(3, static_cast<int>(n) / 40);
    const std::vector<double> smoothed = detail::moving_average(s.intensities, window);
    std::vector<std::size_t> mins = detail::local_minima(smoothed);
    if (mins.size() < 2)
        throw DipDetectionFailed("auto_initialize: fewer than two local minima");
    std::sort(mins.begin(), mins.end(),
              [&](std::size_t a, std::size_t b) { return smoothed[a] < smoothed[b]; });

    const std::size_t first = mins[0];
    std::optional<std::size_t> second;
    for (std::size_t k = 1; k < mins.size(); ++k) {
        if (std::abs(s.frequencies_mhz[mins[k]] - s.frequencies_mhz[first]) >= 5.0) {
            second = mins[k];
            break;
        }
    }
    if (!second)
        throw DipDetectionFailed("auto_initialize: no second minimum at least 5 MHz away");

    std::size_t lo = first, hi = *second;
    if (s.frequencies_mhz[lo] > s.frequencies_mhz[hi])
        std::swap(lo, hi);

    const auto contrast_at = [&](std::size_t dip) {
        const double depth = (baseline - smoothed[dip]) / baseline;
        return std::clamp(depth, 1e-4, 0.5);
    };
    // Overlapping dips merge into one broad well, so a raw half-depth
    // crossing can span both; cap the estimate by the center separation.
    const double separation = s.frequencies_mhz[hi] - s.frequencies_mhz[lo];
    const auto width_at = [&](std::size_t dip) {
        const double depth = baseline - smoothed[dip];
        const double w =
            detail::width_from_half_depth(s, smoothed, dip, baseline - 0.5 * depth);
        return std::clamp(std::min(w, 0.9 * separation), 0.5, 40.0);
    };

    DoubleLorentzianParams init;
    init.baseline = baseline;
    init.contrast_minus = contrast_at(lo);
    init.contrast_plus = contrast_at(hi);
    init.f_minus_mhz = s.frequencies_mhz[lo];
    init.f_plus_mhz = s.frequencies_mhz[hi];
    init.fwhm_minus_mhz = width_at(lo);
    init.fwhm_plus_mhz = width_at(hi);
    validate(init);
    return init;
}

/// Least-squares fit of the double-Lorentzian model. Centers are bounded
/// by the sweep range, widths by [0.5, 40] MHz, contrasts by (0, 0.5],
/// baseline by (0, 10 * max intensity]. Standard errors come from
/// SSE/(m-p) * inv(J^T J) at the optimum.
inline FitResult fit_double_lorentzian(const Spectrum& s,
                                       std::optional<DoubleLorentzianParams> init = {}) {
    validate(s);
    const std::size_t m = s.size();
    if (m < 8)
        throw UnderDetermined("fit: " + std::to_string(m) +
                              " points cannot determine 7 parameters");
    const DoubleLorentzianParams start = init ? *init : auto_initialize(s);

    const double f_lo = s.frequencies_mhz.front();
    const double f_hi = s.frequencies_mhz.back();
    const double max_intensity = *std::max_element(s.intensities.begin(), s.intensities.end());

    const std::array<double, 7> packed = detail::pack_params(start);

    LeastSquaresProblem p;
    p.theta0.assign(packed.begin(), packed.end());
    p.lower = {1e-6 * max_intensity, 1e-6, 1e-6, f_lo, f_lo, 0.5, 0.5};
    p.upper = {10.0 * max_intensity, 0.5, 0.5, f_hi, f_hi, 40.0, 40.0};
    p.residual = [&s](std::span<const double> th) {
        const DoubleLorentzianParams q = detail::unpack_params(th);
        std::vector<double> r(s.size());
        for (std::size_t k = 0; k < s.size(); ++k)
            r[k] = eval_double_lorentzian(q, s.frequencies_mhz[k]) - s.intensities[k];
        return r;
    };
    p.jacobian = [&s](std::span<const double> th, std::size_t n_res, std::vector<double>& jac) {
        jac.assign(n_res * 7, 0.0);
        const double b = th[0];
        for (std::size_t k = 0; k < n_res; ++k) {
            const double f = s.frequencies_mhz[k];
            double dip_sum = 0.0;
            for (int side = 0; side < 2; ++side) {
                const double c = th[1 + side];
                const double h = 0.5 * th[5 + side];
                const double d = f - th[3 + side];
                const double denom = d * d + h * h;
                const double g = c * h * h / denom;
                dip_sum += g;
                jac[k * 7 + 1 + side] = -b * h * h / denom;
                jac[k * 7 + 3 + side] = -b * 2.0 * c * h * h * d / (denom * denom);
                jac[k * 7 + 5 + side] = -b * c * h * d * d / (denom * denom);
            }
            jac[k * 7 + 0] = 1.0 - dip_sum;
        }
    };

    LeastSquaresResult lsq;
    try {
        lsq = least_squares(p);
    } catch (const SingularNormalEquations& e) {
        throw FitDiverged(std::string("fit: ") + e.what());
    } catch (const NonFiniteResidual& e) {
        throw FitDiverged(std::string("fit: ") + e.what());
    }
    if (!lsq.report.converged)
        throw FitDiverged("fit: stopped on " + lsq.report.stop_reason + " after " +
                          std::to_string(lsq.report.iterations) + " accepted steps");

    // canonical dip order; the model is symmetric under swapping the triples
    if (lsq.theta[3] > lsq.theta[4]) {
        std::swap(lsq.theta[1], lsq.theta[2]);
        std::swap(lsq.theta[3], lsq.theta[4]);
        std::swap(lsq.theta[5], lsq.theta[6]);
    }
    if (!(lsq.theta[3] < lsq.theta[4]))
        throw FitDiverged("fit: dip centers collapsed");

    FitResult out;
    out.params = detail::unpack_params(lsq.theta);
    validate(out.params);
    out.d_mhz = zfs_from_params(out.params);
    out.sse = lsq.sse;
    out.report = lsq.report;

    // covariance of the estimates from the normal equations at the optimum
    std::vector<double> jac;
    p.jacobian(lsq.theta, m, jac);
    SymMatrix jtj(7);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = i; j < 7; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < m; ++k)
                v += jac[k * 7 + i] * jac[k * 7 + j];
            jtj.set(i, j, v);
        }
    const double sigma2 = lsq.sse / static_cast<double>(m - 7);
    try {
        const CholeskyFactor f = cholesky(jtj, 1e-3 * std::abs(jtj.mean_diagonal()));
        for (std::size_t i = 0; i < 7; ++i) {
            std::vector<double> e(7, 0.0);
            e[i] = 1.0;
            const std::vector<double> col = solve_chol(f, e);
            out.std_errors[i] = std::sqrt(std::max(0.0, sigma2 * col[i]));
        }
    } catch (const NotPositiveDefinite&) {
        out.std_errors.fill(std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

} // namespace ndtherm
