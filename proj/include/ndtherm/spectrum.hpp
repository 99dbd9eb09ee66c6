#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ndtherm/errors.hpp"

namespace ndtherm {

/// One ODMR spectrum: PL intensity sampled on an ascending frequency grid,
/// optionally labeled with the temperature it was acquired at.
struct Spectrum {
    std::vector<double> frequencies_mhz;
    std::vector<double> intensities;
    std::optional<double> true_temperature_k;

    std::size_t size() const { return frequencies_mhz.size(); }
};

inline void validate(const Spectrum& s) {
    if (s.frequencies_mhz.size() != s.intensities.size())
        throw ValidationError("spectrum: frequency and intensity lengths differ");
    if (s.size() < 2)
        throw ValidationError("spectrum: needs at least 2 points");
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = s.frequencies_mhz[i];
        if (!std::isfinite(f) || f <= 0.0)
            throw ValidationError("spectrum: frequencies must be finite and positive");
        if (!std::isfinite(s.intensities[i]))
            throw ValidationError("spectrum: intensities must be finite");
        if (i > 0 && !(s.frequencies_mhz[i - 1] < f))
            throw ValidationError("spectrum: frequencies must be strictly increasing");
    }
    if (s.true_temperature_k && !std::isfinite(*s.true_temperature_k))
        throw ValidationError("spectrum: temperature label must be finite");
}

inline Spectrum make_spectrum(std::vector<double> frequencies_mhz,
                              std::vector<double> intensities,
                              std::optional<double> true_temperature_k = {}) {
    Spectrum s{std::move(frequencies_mhz), std::move(intensities), true_temperature_k};
    validate(s);
    return s;
}

/// Equally spaced microwave sweep, both endpoints included.
struct SweepGrid {
    double f_start_mhz = 2830.0;
    double f_stop_mhz = 2910.0;
    int n_points = 321;

    std::vector<double> frequencies() const {
        if (!(f_start_mhz < f_stop_mhz))
            throw ValidationError("sweep grid: f_start must be below f_stop");
        if (n_points < 2)
            throw ValidationError("sweep grid: needs at least 2 points");
        std::vector<double> f(static_cast<std::size_t>(n_points));
        const double step = (f_stop_mhz - f_start_mhz) / (n_points - 1);
        for (int i = 0; i < n_points; ++i)
            f[static_cast<std::size_t>(i)] = f_start_mhz + step * i;
        f.back() = f_stop_mhz;
        return f;
    }
};

/// Keep n_p points at indices round(j*(L-1)/(n_p-1)); first and last points
/// always survive, ordering and the temperature label are preserved.
inline Spectrum subsample_equally_spaced(const Spectrum& s, int n_p) {
    const std::size_t len = s.size();
    if (n_p < 2 || static_cast<std::size_t>(n_p) > len)
        throw ValidationError("subsample: n_p must be in [2, spectrum length]");
    Spectrum out;
    out.true_temperature_k = s.true_temperature_k;
    out.frequencies_mhz.reserve(static_cast<std::size_t>(n_p));
    out.intensities.reserve(static_cast<std::size_t>(n_p));
    for (int j = 0; j < n_p; ++j) {
        const auto idx = static_cast<std::size_t>(
            std::llround(static_cast<double>(j) * static_cast<double>(len - 1) / (n_p - 1)));
        out.frequencies_mhz.push_back(s.frequencies_mhz[idx]);
        out.intensities.push_back(s.intensities[idx]);
    }
    return out;
}

/// Index of the grid point nearest to target; ties resolve to the lower
/// frequency. Target must lie inside [front, back].
inline std::size_t nearest_index(const Spectrum& s, double target_mhz) {
    if (!std::isfinite(target_mhz) || target_mhz < s.frequencies_mhz.front() ||
        target_mhz > s.frequencies_mhz.back())
        throw ValidationError("select: target frequency " + std::to_string(target_mhz) +
                              " MHz outside spectrum range");
    std::size_t best = 0;
    double best_dist = std::abs(s.frequencies_mhz[0] - target_mhz);
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double d = std::abs(s.frequencies_mhz[i] - target_mhz);
        if (d < best_dist) {  // '<' keeps the lower-frequency point on ties
            best = i;
            best_dist = d;
        }
    }
    return best;
}

/// Pick the grid point nearest each target. Two targets resolving to the
/// same point are rejected; output is sorted ascending.
inline Spectrum select_frequencies(const Spectrum& s, std::span<const double> targets_mhz) {
    if (targets_mhz.empty())
        throw ValidationError("select: no target frequencies given");
    std::vector<std::size_t> indices;
    indices.reserve(targets_mhz.size());
    for (const double t : targets_mhz)
        indices.push_back(nearest_index(s, t));
    std::sort(indices.begin(), indices.end());
    for (std::size_t i = 1; i < indices.size(); ++i)
        if (indices[i] == indices[i - 1])
            throw ValidationError("select: two targets resolve to the same grid point at " +
                                  std::to_string(s.frequencies_mhz[indices[i]]) + " MHz");
    Spectrum out;
    out.true_temperature_k = s.true_temperature_k;
    for (const std::size_t idx : indices) {
        out.frequencies_mhz.push_back(s.frequencies_mhz[idx]);
        out.intensities.push_back(s.intensities[idx]);
    }
    return out;
}

} // namespace ndtherm
