#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "ndtherm/calibration.hpp"
#include "ndtherm/line_shape.hpp"
#include "ndtherm/rng.hpp"
#include "ndtherm/spectrum.hpp"

namespace ndtherm {

/// Additive i.i.d. Gaussian intensity noise. One stored spectrum is the
/// average of n_sweeps sweeps, so the effective per-point std is
/// sigma_per_sweep / sqrt(n_sweeps).
struct NoiseModel {
    double sigma_per_sweep = 0.0025;
    int n_sweeps = 100;
    std::uint64_t seed = 4;

    double effective_std() const { return sigma_per_sweep / std::sqrt(static_cast<double>(n_sweeps)); }
};

inline void validate(const NoiseModel& m) {
    if (!(m.sigma_per_sweep >= 0.0) || !std::isfinite(m.sigma_per_sweep))
        throw ValidationError("noise model: sigma_per_sweep must be >= 0");
    if (m.n_sweeps < 1)
        throw ValidationError("noise model: n_sweeps must be positive");
}

/// Everything needed to generate a labeled synthetic dataset: the sweep
/// grid, the line shape at the calibration reference temperature, the
/// ZFS-temperature law, the set temperatures, and the noise model.
struct ScenarioConfig {
    SweepGrid grid;
    DoubleLorentzianParams line_shape;
    CalibrationModel cal;
    std::vector<double> temperatures_k;
    NoiseModel noise;
    int replicates = 2;
};

inline void validate(const ScenarioConfig& cfg) {
    (void)cfg.grid.frequencies();
    validate(cfg.line_shape);
    validate(cfg.cal);
    validate(cfg.noise);
    if (cfg.temperatures_k.empty())
        throw ValidationError("scenario: temperature list must not be empty");
    for (const double t : cfg.temperatures_k)
        if (!std::isfinite(t))
            throw ValidationError("scenario: temperatures must be finite");
    if (cfg.replicates < 1)
        throw ValidationError("scenario: replicates must be >= 1");
}

/// The stock scenario: 2830-2910 MHz in 321 steps, 280-285 K in 0.5 K
/// increments, two replicates per temperature, alpha = -74 kHz/K with
/// D(280 K) = 2870 MHz so the spectrum center sits near 2870 MHz.
inline ScenarioConfig default_scenario(std::uint64_t seed = 4) {
    ScenarioConfig cfg;
    cfg.grid = SweepGrid{2830.0, 2910.0, 321};
    cfg.line_shape = DoubleLorentzianParams{};
    cfg.cal = CalibrationModel{};
    for (int i = 0; i <= 10; ++i)
        cfg.temperatures_k.push_back(280.0 + 0.5 * i);
    cfg.noise = NoiseModel{};
    cfg.noise.seed = seed;
    cfg.replicates = 2;
    return cfg;
}

/// One synthetic spectrum at temperature t_k. Both dip centers shift
/// rigidly by alpha*(t_k - T0); contrasts and widths stay fixed. The noise
/// stream is keyed on (seed, t_k, replicate_index) only.
inline Spectrum synth_spectrum(const ScenarioConfig& cfg, double t_k, int replicate_index) {
    validate(cfg);
    if (!std::isfinite(t_k))
        throw ValidationError("synth: non-finite temperature");
    const double delta_d =
        temperature_to_zfs(cfg.cal, t_k) - temperature_to_zfs(cfg.cal, cfg.cal.t0_k);
    const DoubleLorentzianParams shape = shifted_by_zfs(cfg.line_shape, delta_d);

    Spectrum s;
    s.frequencies_mhz = cfg.grid.frequencies();
    s.intensities.reserve(s.frequencies_mhz.size());
    for (const double f : s.frequencies_mhz)
        s.intensities.push_back(eval_double_lorentzian(shape, f));

    const double sigma = cfg.noise.effective_std();
    if (sigma > 0.0) {
        GaussianStream rng(mix_seed(cfg.noise.seed, std::bit_cast<std::uint64_t>(t_k),
                                    static_cast<std::uint64_t>(replicate_index)));
        for (double& v : s.intensities)
            v += sigma * rng.normal();
    }
    s.true_temperature_k = t_k;
    return s;
}

/// Temperature-major, replicate-minor: |temperatures| * replicates spectra.
inline std::vector<Spectrum> synth_dataset(const ScenarioConfig& cfg) {
    validate(cfg);
    std::vector<Spectrum> out;
    out.reserve(cfg.temperatures_k.size() * static_cast<std::size_t>(cfg.replicates));
    for (const double t : cfg.temperatures_k)
        for (int r = 0; r < cfg.replicates; ++r)
            out.push_back(synth_spectrum(cfg, t, r));
    return out;
}

/// Every n-th replicate of each temperature, e.g. 0 -> Data #1, 1 -> Data #2.
inline std::vector<Spectrum> replicate_slice(const std::vector<Spectrum>& dataset,
                                             int replicate_index, int replicates) {
    if (replicates < 1 || replicate_index < 0 || replicate_index >= replicates)
        throw ValidationError("replicate_slice: index out of range");
    std::vector<Spectrum> out;
    for (std::size_t i = static_cast<std::size_t>(replicate_index); i < dataset.size();
         i += static_cast<std::size_t>(replicates))
        out.push_back(dataset[i]);
    return out;
}

} // namespace ndtherm
