#pragma once

#include <cmath>
#include <span>

#include "ndtherm/errors.hpp"

namespace ndtherm {

/// Linear ZFS-temperature law D(T) = alpha*(T - T0) + D(T0), with alpha in
/// kHz/K and D in MHz. The kHz<->MHz factor lives in the two conversions
/// below and nowhere else.
struct CalibrationModel {
    double alpha_khz_per_k = -74.0;
    double t0_k = 280.0;
    double d_t0_mhz = 2870.0;
};

inline void validate(const CalibrationModel& cal) {
    if (!std::isfinite(cal.alpha_khz_per_k) || cal.alpha_khz_per_k == 0.0)
        throw ValidationError("calibration: alpha must be finite and nonzero");
    if (!std::isfinite(cal.t0_k) || !std::isfinite(cal.d_t0_mhz))
        throw ValidationError("calibration: reference point must be finite");
}

inline double temperature_to_zfs(const CalibrationModel& cal, double t_k) {
    if (!std::isfinite(t_k))
        throw ValidationError("temperature_to_zfs: non-finite temperature");
    return cal.d_t0_mhz + cal.alpha_khz_per_k * (t_k - cal.t0_k) * 1e-3;
}

inline double zfs_to_temperature(const CalibrationModel& cal, double d_mhz) {
    if (!std::isfinite(d_mhz))
        throw ValidationError("zfs_to_temperature: non-finite ZFS");
    validate(cal);
    return cal.t0_k + (d_mhz - cal.d_t0_mhz) * 1e3 / cal.alpha_khz_per_k;
}

/// Ordinary least squares of D against T. The reference point is placed at
/// the mean temperature, where the regression estimate is most precise.
inline CalibrationModel regress_zfs_vs_temperature(std::span<const double> t_k,
                                                   std::span<const double> d_mhz) {
    if (t_k.size() != d_mhz.size() || t_k.size() < 2)
        throw ValidationError("calibration regression: needs >= 2 (T, D) pairs");
    const auto n = static_cast<double>(t_k.size());
    double t_mean = 0.0, d_mean = 0.0;
    for (std::size_t i = 0; i < t_k.size(); ++i) {
        t_mean += t_k[i];
        d_mean += d_mhz[i];
    }
    t_mean /= n;
    d_mean /= n;
    double stt = 0.0, std_ = 0.0;
    for (std::size_t i = 0; i < t_k.size(); ++i) {
        stt += (t_k[i] - t_mean) * (t_k[i] - t_mean);
        std_ += (t_k[i] - t_mean) * (d_mhz[i] - d_mean);
    }
    if (stt <= 0.0)
        throw DegenerateRegression("calibration regression: all temperatures equal");
    const double slope_mhz_per_k = std_ / stt;
    CalibrationModel cal;
    cal.alpha_khz_per_k = slope_mhz_per_k * 1e3;
    cal.t0_k = t_mean;
    cal.d_t0_mhz = d_mean;
    validate(cal);
    return cal;
}

} // namespace ndtherm
