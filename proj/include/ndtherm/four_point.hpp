#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "ndtherm/calibration.hpp"
#include "ndtherm/errors.hpp"
#include "ndtherm/line_shape.hpp"
#include "ndtherm/lorentz_fit.hpp"
#include "ndtherm/spectrum.hpp"

namespace ndtherm {

/// Four probe frequencies, two on each side of the spectrum center.
struct FourPointPattern {
    std::array<double, 4> frequencies_mhz{2854.0, 2856.0, 2884.0, 2886.0};
    double center_mhz = 2870.0;

    std::array<double, 4> offsets_mhz() const {
        return {frequencies_mhz[0] - center_mhz, frequencies_mhz[1] - center_mhz,
                frequencies_mhz[2] - center_mhz, frequencies_mhz[3] - center_mhz};
    }

    static FourPointPattern from_offsets(const std::array<double, 4>& offsets,
                                         double center_mhz = 2870.0) {
        FourPointPattern p;
        p.center_mhz = center_mhz;
        for (std::size_t i = 0; i < 4; ++i)
            p.frequencies_mhz[i] = center_mhz + offsets[i];
        validate(p);
        return p;
    }

    friend void validate(const FourPointPattern& p) {
        for (const double f : p.frequencies_mhz)
            if (!std::isfinite(f))
                throw ValidationError("pattern: frequencies must be finite");
        if (!(p.frequencies_mhz[0] < p.frequencies_mhz[1] &&
              p.frequencies_mhz[1] < p.center_mhz && p.center_mhz < p.frequencies_mhz[2] &&
              p.frequencies_mhz[2] < p.frequencies_mhz[3]))
            throw ValidationError(
                "pattern: needs two ascending points below the center and two above");
    }
};

/// The 15 symmetric probe patterns with offsets on the 2 MHz raster
/// between 10 and 20 MHz from the 2870 MHz center, ordered by index 1-15.
inline std::vector<FourPointPattern> enumerate_four_point_patterns() {
    static constexpr std::array<std::array<double, 4>, 15> offsets{{
        {-20, -18, 18, 20}, {-20, -16, 16, 20}, {-20, -14, 14, 20}, {-20, -12, 12, 20},
        {-20, -10, 10, 20}, {-18, -16, 16, 18}, {-18, -14, 14, 18}, {-18, -12, 12, 18},
        {-18, -10, 10, 18}, {-16, -14, 14, 16}, {-16, -12, 12, 16}, {-16, -10, 10, 16},
        {-14, -12, 12, 14}, {-14, -10, 10, 14}, {-12, -10, 10, 12},
    }};
    std::vector<FourPointPattern> patterns;
    patterns.reserve(offsets.size());
    for (const auto& o : offsets)
        patterns.push_back(FourPointPattern::from_offsets(o));
    return patterns;
}

/// Everything the 4-point estimator needs: the probe points as resolved on
/// the reference grid, the reference intensities and analytic slopes
/// there, the ZFS-temperature law, and the reference temperature.
struct FourPointCalibration {
    FourPointPattern pattern;
    std::array<double, 4> resolved_frequencies_mhz{};
    std::array<double, 4> reference_intensities{};
    std::array<double, 4> slopes{};  // dI/df in intensity per MHz
    CalibrationModel cal;
    double t_ref_k = 0.0;
    DoubleLorentzianParams reference_fit;  // fitted line shape at t_ref
};

namespace detail {

inline void check_slope_signs(const std::array<double, 4>& s) {
    const auto sign = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
    if (sign(s[0]) == 0 || sign(s[0]) != sign(s[1]) || sign(s[2]) != sign(s[3]) ||
        sign(s[0]) == sign(s[2]))
        throw ValidationError(
            "4-point calibration: probe slopes must pair up with opposite signs across "
            "the center (low two on one dip flank, high two on the other)");
}

// Shared tail of both calibrate_four_point overloads: resolve the probe
// points on the reference spectrum, take reference intensities (measured
// when t_ref coincides with the reference temperature, otherwise from the
// fit rigidly shifted to t_ref) and analytic slopes.
inline FourPointCalibration finish_four_point_calibration(const Spectrum& ref_spectrum,
                                                          double ref_temperature_k,
                                                          const DoubleLorentzianParams& ref_fit,
                                                          const FourPointPattern& pattern,
                                                          const CalibrationModel& cal,
                                                          double t_ref_k) {
    if (!std::isfinite(t_ref_k))
        throw ValidationError("4-point calibration: non-finite reference temperature");

    FourPointCalibration out;
    out.pattern = pattern;
    out.cal = cal;
    out.t_ref_k = t_ref_k;

    const Spectrum probe = select_frequencies(
        ref_spectrum, std::span<const double>(pattern.frequencies_mhz));
    for (std::size_t i = 0; i < 4; ++i)
        out.resolved_frequencies_mhz[i] = probe.frequencies_mhz[i];

    const double dt = out.t_ref_k - ref_temperature_k;
    if (dt == 0.0) {
        // measured reference: intensities straight from the data
        for (std::size_t i = 0; i < 4; ++i)
            out.reference_intensities[i] = probe.intensities[i];
        out.reference_fit = ref_fit;
    } else {
        // extrapolated reference: rigid shift of the nearest calibrated fit
        const double delta_d = out.cal.alpha_khz_per_k * dt * 1e-3;
        out.reference_fit = shifted_by_zfs(ref_fit, delta_d);
        for (std::size_t i = 0; i < 4; ++i)
            out.reference_intensities[i] =
                eval_double_lorentzian(out.reference_fit, out.resolved_frequencies_mhz[i]);
    }
    for (std::size_t i = 0; i < 4; ++i)
        out.slopes[i] =
            eval_double_lorentzian_derivative(out.reference_fit, out.resolved_frequencies_mhz[i]);
    check_slope_signs(out.slopes);
    return out;
}

inline std::size_t nearest_temperature_index(const std::vector<double>& temps, double t_ref_k) {
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < temps.size(); ++i)
        if (std::abs(temps[i] - t_ref_k) < std::abs(temps[nearest] - t_ref_k))
            nearest = i;
    return nearest;
}

} // namespace detail

/// Calibrate the 4-point method: fit every calibration spectrum, regress
/// the fitted ZFS against temperature for the linear law, then take
/// reference intensities and analytic slopes at the probe points. The
/// reference spectrum is the one closest to t_ref (default: the lowest
/// calibration temperature); for a t_ref away from any measured
/// temperature the reference curve is the calibrated fit shifted there.
inline FourPointCalibration calibrate_four_point(const std::vector<Spectrum>& calibration_spectra,
                                                 const FourPointPattern& pattern,
                                                 std::optional<double> t_ref_k = {}) {
    validate(pattern);
    if (calibration_spectra.size() < 2)
        throw ValidationError("4-point calibration: needs at least 2 labeled spectra");

    std::vector<double> temps, zfs;
    std::vector<FitResult> fits;
    temps.reserve(calibration_spectra.size());
    for (const Spectrum& s : calibration_spectra) {
        if (!s.true_temperature_k)
            throw ValidationError("4-point calibration: spectra must carry temperature labels");
        fits.push_back(fit_double_lorentzian(s));
        temps.push_back(*s.true_temperature_k);
        zfs.push_back(fits.back().d_mhz);
    }

    const CalibrationModel cal = regress_zfs_vs_temperature(temps, zfs);
    const double t_ref =
        t_ref_k ? *t_ref_k : *std::min_element(temps.begin(), temps.end());
    const std::size_t nearest = detail::nearest_temperature_index(temps, t_ref);
    return detail::finish_four_point_calibration(calibration_spectra[nearest], temps[nearest],
                                                 fits[nearest].params, pattern, cal, t_ref);
}

/// Same calibration with the ZFS-temperature law supplied instead of
/// regressed, so several patterns can share one law. Only the reference
/// spectrum (nearest to t_ref, default lowest temperature) is fitted.
inline FourPointCalibration calibrate_four_point(const std::vector<Spectrum>& calibration_spectra,
                                                 const FourPointPattern& pattern,
                                                 const CalibrationModel& shared_cal,
                                                 std::optional<double> t_ref_k = {}) {
    validate(pattern);
    validate(shared_cal);
    if (calibration_spectra.empty())
        throw ValidationError("4-point calibration: needs at least 1 labeled spectrum");

    std::vector<double> temps;
    temps.reserve(calibration_spectra.size());
    for (const Spectrum& s : calibration_spectra) {
        if (!s.true_temperature_k)
            throw ValidationError("4-point calibration: spectra must carry temperature labels");
        temps.push_back(*s.true_temperature_k);
    }

    const double t_ref =
        t_ref_k ? *t_ref_k : *std::min_element(temps.begin(), temps.end());
    const std::size_t nearest = detail::nearest_temperature_index(temps, t_ref);
    const FitResult ref_fit = fit_double_lorentzian(calibration_spectra[nearest]);
    return detail::finish_four_point_calibration(calibration_spectra[nearest], temps[nearest],
                                                 ref_fit.params, pattern, shared_cal, t_ref);
}

/// Temperature from four probe intensities. A rigid shift of the
/// calibrated spectrum by deltaD changes each probe intensity by
/// -deltaD * slope_i to first order, so the least-squares shift estimate is
/// deltaD = sum_i s_i (I_ref,i - I_i) / sum_i s_i^2.
inline double estimate_four_point(const FourPointCalibration& cal, const Spectrum& s) {
    const Spectrum probe =
        select_frequencies(s, std::span<const double>(cal.resolved_frequencies_mhz));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        if (std::abs(probe.frequencies_mhz[i] - cal.resolved_frequencies_mhz[i]) > 1e-6)
            throw ValidationError("4-point estimate: probe frequency " +
                                  std::to_string(cal.resolved_frequencies_mhz[i]) +
                                  " MHz missing from spectrum");
        num += cal.slopes[i] * (cal.reference_intensities[i] - probe.intensities[i]);
        den += cal.slopes[i] * cal.slopes[i];
    }
    const double delta_d = num / den;
    const double d_ref = temperature_to_zfs(cal.cal, cal.t_ref_k);
    return zfs_to_temperature(cal.cal, d_ref + delta_d);
}

} // namespace ndtherm
