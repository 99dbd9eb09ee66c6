#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ndtherm/calibration.hpp"
#include "ndtherm/errors.hpp"
#include "ndtherm/four_point.hpp"
#include "ndtherm/gpr.hpp"
#include "ndtherm/lorentz_fit.hpp"
#include "ndtherm/spectrum.hpp"
#include "ndtherm/synth.hpp"

namespace ndtherm {

enum class MethodId { FourPoint, LorentzFit, Gpr };

inline const char* method_name(MethodId m) {
    switch (m) {
    case MethodId::FourPoint: return "four_point";
    case MethodId::LorentzFit: return "lorentz_fit";
    case MethodId::Gpr: return "gpr";
    }
    return "unknown";
}

inline MethodId method_from_name(const std::string& name) {
    if (name == "four_point") return MethodId::FourPoint;
    if (name == "lorentz_fit") return MethodId::LorentzFit;
    if (name == "gpr") return MethodId::Gpr;
    throw ValidationError("unknown method name '" + name +
                          "' (expected four_point, lorentz_fit, or gpr)");
}

/// Which frequency points a benchmark run feeds the estimators: the whole
/// sweep, n_p equally spaced points, or a 4-point probe pattern.
struct PointSelection {
    enum class Kind { Full, EquallySpaced, Pattern };

    Kind kind = Kind::Full;
    int n_p = 0;  // resolved point count; 0 until a run resolves Full
    std::optional<FourPointPattern> pattern;

    static PointSelection full() { return {}; }

    static PointSelection equally_spaced(int n_p) {
        if (n_p < 2)
            throw ValidationError("point selection: n_p must be at least 2");
        PointSelection s;
        s.kind = Kind::EquallySpaced;
        s.n_p = n_p;
        return s;
    }

    static PointSelection from_pattern(const FourPointPattern& p) {
        validate(p);
        PointSelection s;
        s.kind = Kind::Pattern;
        s.n_p = 4;
        s.pattern = p;
        return s;
    }

    std::string describe() const {
        switch (kind) {
        case Kind::Full:
            return "full";
        case Kind::EquallySpaced:
            return "equally_spaced(" + std::to_string(n_p) + ")";
        case Kind::Pattern: {
            std::string out = "pattern(";
            const auto offsets = pattern->offsets_mhz();
            for (std::size_t i = 0; i < 4; ++i) {
                if (i) out += ",";
                // offsets are integral MHz in every built-in pattern
                out += std::to_string(static_cast<long long>(std::llround(offsets[i])));
            }
            return out + ")";
        }
        }
        return "unknown";
    }
};

/// One temperature cell of a benchmark run. Failed estimates keep their
/// slot with the error recorded, so nothing drops out silently.
struct EstimateCell {
    double t_true_k = std::numeric_limits<double>::quiet_NaN();
    double t_est_k = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> t_std_k;  // predictive std, Gpr only
    bool success = false;
    std::string error;  // "<ErrorName>: <message>" when failed
};

/// Result of one (method, point selection) run over a test set. rmse_k is
/// taken over the successful cells only; success_count says how many that
/// is. seed and scenario_id are echoes the caller stamps in, alpha_khz_per_k
/// echoes the calibration law the run used (absent for Gpr).
struct BenchmarkReport {
    MethodId method = MethodId::Gpr;
    PointSelection selection;
    std::vector<EstimateCell> estimates;
    double rmse_k = std::numeric_limits<double>::quiet_NaN();
    int success_count = 0;
    std::uint64_t seed = 0;
    std::string scenario_id;
    std::optional<double> alpha_khz_per_k;
    std::string note;  // free-text diagnostics, e.g. partial calibration failures
};

/// Thrown when every temperature in a run failed; carries the flagged
/// report so the evidence survives the unwind.
class AllEstimatesFailed : public Error {
public:
    AllEstimatesFailed(const std::string& what, BenchmarkReport report_)
        : Error(what), report(std::move(report_)) {}
    const char* name() const noexcept override { return "AllEstimatesFailed"; }

    BenchmarkReport report;
};

/// Root-mean-square error over (T_true, T_est) pairs, in K.
inline double rmse(std::span<const std::pair<double, double>> pairs) {
    if (pairs.empty())
        throw ValidationError("rmse: empty input");
    double acc = 0.0;
    for (const auto& [t_true, t_est] : pairs) {
        if (!std::isfinite(t_true) || !std::isfinite(t_est))
            throw ValidationError("rmse: non-finite entry");
        const double e = t_est - t_true;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(pairs.size()));
}

inline double rmse(const std::vector<std::pair<double, double>>& pairs) {
    return rmse(std::span<const std::pair<double, double>>(pairs));
}

/// rmse_k of a report recomputed from its successful cells; NaN when none
/// succeeded. Reports built by this module store exactly this value.
inline double recompute_rmse(const BenchmarkReport& r) {
    std::vector<std::pair<double, double>> pairs;
    for (const EstimateCell& c : r.estimates)
        if (c.success)
            pairs.emplace_back(c.t_true_k, c.t_est_k);
    if (pairs.empty())
        return std::numeric_limits<double>::quiet_NaN();
    return rmse(pairs);
}

namespace detail {

inline std::string describe_error(const Error& e) {
    return std::string(e.name()) + ": " + e.what();
}

inline Spectrum reduce_spectrum(const Spectrum& s, const PointSelection& sel) {
    switch (sel.kind) {
    case PointSelection::Kind::Full:
        return s;
    case PointSelection::Kind::EquallySpaced:
        return subsample_equally_spaced(s, sel.n_p);
    case PointSelection::Kind::Pattern:
        return select_frequencies(
            s, std::span<const double>(sel.pattern->frequencies_mhz));
    }
    throw InternalError("point selection: unhandled kind");
}

inline std::vector<Spectrum> reduce_set(const std::vector<Spectrum>& set,
                                        const PointSelection& sel) {
    std::vector<Spectrum> out;
    out.reserve(set.size());
    for (const Spectrum& s : set)
        out.push_back(reduce_spectrum(s, sel));
    return out;
}

inline void check_benchmark_inputs(const std::vector<Spectrum>& train,
                                   const std::vector<Spectrum>& test) {
    if (train.empty() || test.empty())
        throw ValidationError("benchmark: train and test sets must be non-empty");
    for (const Spectrum& s : train)
        if (s.frequencies_mhz != train.front().frequencies_mhz)
            throw GridMismatch("benchmark: training spectra on different grids");
    for (const Spectrum& s : test) {
        if (s.frequencies_mhz != train.front().frequencies_mhz)
            throw GridMismatch("benchmark: test spectra not on the training grid");
        if (!s.true_temperature_k)
            throw ValidationError("benchmark: test spectra must carry temperature labels");
    }
}

// Fill success_count and rmse_k; throw AllEstimatesFailed when nothing
// succeeded, with the flagged report attached.
inline BenchmarkReport finalize_report(BenchmarkReport r) {
    r.success_count = 0;
    for (const EstimateCell& c : r.estimates)
        if (c.success)
            ++r.success_count;
    r.rmse_k = recompute_rmse(r);
    if (r.success_count == 0) {
        const std::string first =
            r.estimates.empty() ? std::string("no estimates") : r.estimates.front().error;
        const std::string what = std::string(method_name(r.method)) + " at " +
                                 r.selection.describe() +
                                 ": every temperature failed (first: " + first + ")";
        throw AllEstimatesFailed(what, std::move(r));
    }
    return r;
}

inline void fail_all_cells(BenchmarkReport& r, const std::vector<Spectrum>& test,
                           const std::string& error) {
    r.estimates.clear();
    for (const Spectrum& s : test) {
        EstimateCell c;
        c.t_true_k = *s.true_temperature_k;
        c.success = false;
        c.error = error;
        r.estimates.push_back(std::move(c));
    }
}

// Linear ZFS-temperature law from fitting each labeled spectrum, shared by
// the lorentz_fit benchmark branch and the pattern study. Spectra whose fit
// diverges are skipped as long as two or more remain for the regression.
struct CalibrationLaw {
    CalibrationModel cal;
    int n_fit_failures = 0;
};

inline CalibrationLaw fit_calibration_law(const std::vector<Spectrum>& spectra) {
    std::vector<double> temps, zfs;
    int failures = 0;
    std::string first_error;
    for (const Spectrum& s : spectra) {
        if (!s.true_temperature_k)
            throw ValidationError("calibration: spectra must carry temperature labels");
        try {
            const FitResult fit = fit_double_lorentzian(s);
            temps.push_back(*s.true_temperature_k);
            zfs.push_back(fit.d_mhz);
        } catch (const Error& e) {
            ++failures;
            if (first_error.empty())
                first_error = describe_error(e);
        }
    }
    if (temps.size() < 2) {
        if (!first_error.empty())
            throw FitDiverged("calibration: fewer than 2 spectra fitted (first failure: " +
                              first_error + ")");
        throw ValidationError("calibration: needs at least 2 labeled spectra");
    }
    CalibrationLaw law;
    law.cal = regress_zfs_vs_temperature(temps, zfs);
    law.n_fit_failures = failures;
    return law;
}

inline BenchmarkReport run_four_point(const std::vector<Spectrum>& train,
                                      const std::vector<Spectrum>& test,
                                      const PointSelection& selection,
                                      const std::optional<CalibrationModel>& shared_cal) {
    BenchmarkReport r;
    r.method = MethodId::FourPoint;
    r.selection = selection;

    FourPointCalibration cal;
    try {
        FourPointPattern pattern;
        if (selection.kind == PointSelection::Kind::Pattern) {
            pattern = *selection.pattern;
        } else {
            // the method probes exactly four frequencies; accept any other
            // selection only if it resolves to a valid 4-point pattern
            const Spectrum reduced = reduce_spectrum(train.front(), selection);
            if (reduced.frequencies_mhz.size() != 4)
                throw ValidationError("4-point method: selection " + selection.describe() +
                                      " resolves to " +
                                      std::to_string(reduced.frequencies_mhz.size()) +
                                      " points, needs exactly 4");
            for (std::size_t i = 0; i < 4; ++i)
                pattern.frequencies_mhz[i] = reduced.frequencies_mhz[i];
            validate(pattern);
        }
        // calibration always sees the complete training spectra: the probe
        // slopes come from a full-resolution fit even when the test side
        // measures only the four points
        cal = shared_cal ? calibrate_four_point(train, pattern, *shared_cal)
                         : calibrate_four_point(train, pattern);
    } catch (const Error& e) {
        fail_all_cells(r, test, describe_error(e));
        return finalize_report(std::move(r));  // always throws AllEstimatesFailed
    }
    r.alpha_khz_per_k = cal.cal.alpha_khz_per_k;

    for (const Spectrum& s : test) {
        EstimateCell c;
        c.t_true_k = *s.true_temperature_k;
        try {
            c.t_est_k = estimate_four_point(cal, s);
            c.success = true;
        } catch (const Error& e) {
            c.error = describe_error(e);
        }
        r.estimates.push_back(std::move(c));
    }
    return finalize_report(std::move(r));
}

inline BenchmarkReport run_lorentz_fit(const std::vector<Spectrum>& train,
                                       const std::vector<Spectrum>& test,
                                       const PointSelection& selection) {
    BenchmarkReport r;
    r.method = MethodId::LorentzFit;
    r.selection = selection;

    CalibrationLaw law;
    try {
        law = fit_calibration_law(reduce_set(train, selection));
    } catch (const Error& e) {
        fail_all_cells(r, test, describe_error(e));
        return finalize_report(std::move(r));  // always throws AllEstimatesFailed
    }
    r.alpha_khz_per_k = law.cal.alpha_khz_per_k;
    if (law.n_fit_failures > 0)
        r.note = std::to_string(law.n_fit_failures) + " calibration fit(s) failed";

    for (const Spectrum& s : test) {
        EstimateCell c;
        c.t_true_k = *s.true_temperature_k;
        try {
            const FitResult fit = fit_double_lorentzian(reduce_spectrum(s, selection));
            c.t_est_k = zfs_to_temperature(law.cal, fit.d_mhz);
            c.success = true;
        } catch (const Error& e) {
            c.error = describe_error(e);
        }
        r.estimates.push_back(std::move(c));
    }
    return finalize_report(std::move(r));
}

inline BenchmarkReport run_gpr(const std::vector<Spectrum>& train,
                               const std::vector<Spectrum>& test,
                               const PointSelection& selection) {
    BenchmarkReport r;
    r.method = MethodId::Gpr;
    r.selection = selection;

    GprModel model;
    try {
        model = ndtherm::train(reduce_set(train, selection));
    } catch (const Error& e) {
        fail_all_cells(r, test, describe_error(e));
        return finalize_report(std::move(r));  // always throws AllEstimatesFailed
    }

    for (const Spectrum& s : test) {
        EstimateCell c;
        c.t_true_k = *s.true_temperature_k;
        try {
            const Prediction p = predict(model, reduce_spectrum(s, selection));
            c.t_est_k = p.mean_k;
            c.t_std_k = p.std_k;
            c.success = true;
        } catch (const Error& e) {
            c.error = describe_error(e);
        }
        r.estimates.push_back(std::move(c));
    }
    return finalize_report(std::move(r));
}

} // namespace detail

/// Run one estimator end to end: calibrate or train on the training set,
/// estimate every test spectrum, and report per-temperature results with
/// RMSE over the successes. Throws AllEstimatesFailed (report attached)
/// when no temperature survives.
inline BenchmarkReport run_method(MethodId method, const std::vector<Spectrum>& train,
                                  const std::vector<Spectrum>& test,
                                  PointSelection selection) {
    detail::check_benchmark_inputs(train, test);
    if (selection.kind == PointSelection::Kind::Full)
        selection.n_p = static_cast<int>(train.front().frequencies_mhz.size());

    switch (method) {
    case MethodId::FourPoint:
        return detail::run_four_point(train, test, selection, {});
    case MethodId::LorentzFit:
        return detail::run_lorentz_fit(train, test, selection);
    case MethodId::Gpr:
        return detail::run_gpr(train, test, selection);
    }
    throw InternalError("run_method: unhandled method");
}

inline BenchmarkReport run_method(MethodId method, const std::vector<Spectrum>& train,
                                  const std::vector<Spectrum>& test, int n_p) {
    return run_method(method, train, test, PointSelection::equally_spaced(n_p));
}

inline BenchmarkReport run_method(MethodId method, const std::vector<Spectrum>& train,
                                  const std::vector<Spectrum>& test,
                                  const FourPointPattern& pattern) {
    return run_method(method, train, test, PointSelection::from_pattern(pattern));
}

/// One report per (n_p, method), n_p-major, in the given order. n_p = 4 is
/// run on the standard probe pattern (offsets -16,-14,+14,+16) instead of
/// equal spacing, which would put two of four points on the flat sweep
/// edges. Runs where every temperature fails are returned flagged, not
/// dropped.
inline std::vector<BenchmarkReport> sweep_np(const std::vector<MethodId>& methods,
                                             const std::vector<Spectrum>& train,
                                             const std::vector<Spectrum>& test,
                                             const std::vector<int>& np_values) {
    if (methods.empty())
        throw ValidationError("sweep_np: no methods given");
    if (np_values.empty())
        throw ValidationError("sweep_np: no n_p values given");
    for (const int n_p : np_values)
        if (n_p < 2)
            throw ValidationError("sweep_np: every n_p must be at least 2");

    std::vector<BenchmarkReport> reports;
    reports.reserve(methods.size() * np_values.size());
    for (const int n_p : np_values) {
        const PointSelection selection =
            n_p == 4 ? PointSelection::from_pattern(FourPointPattern{})
                     : PointSelection::equally_spaced(n_p);
        for (const MethodId method : methods) {
            try {
                reports.push_back(run_method(method, train, test, selection));
            } catch (const AllEstimatesFailed& e) {
                reports.push_back(e.report);
            }
        }
    }
    return reports;
}

/// One pattern-study row: both estimators on the same 4 probe frequencies.
struct PatternStudyRow {
    int index = 0;  // 1-based, matching the standard pattern ordering
    FourPointPattern pattern;
    double rmse_gpr_k = std::numeric_limits<double>::quiet_NaN();
    double rmse_fourpoint_k = std::numeric_limits<double>::quiet_NaN();
    BenchmarkReport gpr;
    BenchmarkReport fourpoint;
};

/// Run GPR and the 4-point method over the 15 standard probe patterns.
/// The 4-point branch uses one ZFS-temperature law for all patterns:
/// either the supplied one or, by default, the law regressed from fitting
/// every training spectrum once.
inline std::vector<PatternStudyRow> pattern_study(
    const std::vector<Spectrum>& train, const std::vector<Spectrum>& test,
    std::optional<CalibrationModel> shared_cal = {}) {
    detail::check_benchmark_inputs(train, test);
    if (!shared_cal)
        shared_cal = detail::fit_calibration_law(train).cal;

    std::vector<PatternStudyRow> rows;
    const std::vector<FourPointPattern> patterns = enumerate_four_point_patterns();
    rows.reserve(patterns.size());
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        PatternStudyRow row;
        row.index = static_cast<int>(i) + 1;
        row.pattern = patterns[i];
        const PointSelection selection = PointSelection::from_pattern(patterns[i]);
        try {
            row.fourpoint = detail::run_four_point(train, test, selection, shared_cal);
        } catch (const AllEstimatesFailed& e) {
            row.fourpoint = e.report;
        }
        try {
            row.gpr = detail::run_gpr(train, test, selection);
        } catch (const AllEstimatesFailed& e) {
            row.gpr = e.report;
        }
        row.rmse_gpr_k = row.gpr.rmse_k;
        row.rmse_fourpoint_k = row.fourpoint.rmse_k;
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Reference RMSE values for the 15 probe patterns measured on the
/// original experimental dataset (GPR, 4-point), in K. Included in report
/// output for context only; synthetic runs are not expected to reproduce
/// them.
inline const std::array<std::pair<double, double>, 15>& pattern_reference_rmse() {
    static const std::array<std::pair<double, double>, 15> table{{
        {1.5960, 3.8031}, {1.2137, 3.4996}, {1.0409, 2.3711}, {0.8251, 2.5814},
        {1.3989, 3.8989}, {1.5120, 1.0629}, {0.8915, 0.3540}, {0.8109, 0.6848},
        {1.3751, 1.3421}, {0.6561, 0.8920}, {0.7113, 0.9174}, {1.2496, 1.3424},
        {0.7879, 0.9265}, {0.9715, 1.0014}, {0.7055, 1.1040},
    }};
    return table;
}

struct HistogramBin {
    double bin_lower = 0.0;
    int count = 0;
};

/// Fixed-width histogram with edges on multiples of bin_width. A value
/// exactly on an edge counts toward the upper bin; empty bins are omitted.
inline std::vector<HistogramBin> histogram(std::span<const double> values,
                                           double bin_width = 0.25) {
    if (values.empty())
        throw ValidationError("histogram: empty input");
    if (!std::isfinite(bin_width) || bin_width <= 0.0)
        throw ValidationError("histogram: bin width must be positive");

    std::map<long long, int> bins;
    for (const double v : values) {
        if (!std::isfinite(v))
            throw ValidationError("histogram: non-finite value");
        bins[static_cast<long long>(std::floor(v / bin_width))]++;
    }
    std::vector<HistogramBin> out;
    out.reserve(bins.size());
    for (const auto& [k, count] : bins)
        out.push_back({static_cast<double>(k) * bin_width, count});
    return out;
}

inline std::vector<HistogramBin> histogram(const std::vector<double>& values,
                                           double bin_width = 0.25) {
    return histogram(std::span<const double>(values), bin_width);
}

namespace detail {

struct MeanStd {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std = std::numeric_limits<double>::quiet_NaN();
    int n = 0;
};

// Sample mean and (n-1)-normalized std over the finite entries.
inline MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    double sum = 0.0;
    for (const double v : values)
        if (std::isfinite(v)) {
            sum += v;
            ++out.n;
        }
    if (out.n == 0)
        return out;
    out.mean = sum / out.n;
    if (out.n == 1) {
        out.std = 0.0;
        return out;
    }
    double acc = 0.0;
    for (const double v : values)
        if (std::isfinite(v))
            acc += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(acc / (out.n - 1));
    return out;
}

struct SeededData {
    std::uint64_t seed = 0;
    std::vector<Spectrum> train;
    std::vector<Spectrum> test;
};

// Synthesize the scenario with the k-th derived seed and split replicates
// into train (replicate 0) and test (replicate 1).
inline SeededData synthesize_split(const ScenarioConfig& base, int k) {
    ScenarioConfig cfg = base;
    cfg.noise.seed = base.noise.seed + static_cast<std::uint64_t>(k);
    if (cfg.replicates < 2)
        throw ValidationError("monte carlo: scenario needs at least 2 replicates");
    const std::vector<Spectrum> all = synth_dataset(cfg);
    SeededData out;
    out.seed = cfg.noise.seed;
    out.train = replicate_slice(all, 0, cfg.replicates);
    out.test = replicate_slice(all, 1, cfg.replicates);
    return out;
}

} // namespace detail

/// Aggregate of one (method, n_p) cell across Monte-Carlo seeds. Per-seed
/// RMSEs are kept (NaN where the whole run failed) so downstream
/// histograms and tests see the raw evidence.
struct MonteCarloNpCell {
    MethodId method = MethodId::Gpr;
    PointSelection selection;
    int n_seeds = 0;
    int n_failed_seeds = 0;      // seeds where no temperature succeeded
    int min_success_count = 0;   // fewest successful temperatures in any seed
    double rmse_mean_k = std::numeric_limits<double>::quiet_NaN();
    double rmse_std_k = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> rmse_per_seed_k;
    std::vector<BenchmarkReport> reports;  // one per seed, aligned with rmse_per_seed_k
};

/// Repeat sweep_np over n_seeds derived scenarios (base seed, base+1, ...),
/// training on replicate 0 and testing on replicate 1 of each, and report
/// mean/std of RMSE per (n_p, method) cell.
inline std::vector<MonteCarloNpCell> monte_carlo_sweep_np(const ScenarioConfig& base,
                                                          const std::vector<MethodId>& methods,
                                                          const std::vector<int>& np_values,
                                                          int n_seeds) {
    if (n_seeds < 1)
        throw ValidationError("monte carlo: n_seeds must be at least 1");
    if (methods.empty() || np_values.empty())
        throw ValidationError("monte carlo: no methods or n_p values given");

    std::vector<MonteCarloNpCell> cells;
    for (int k = 0; k < n_seeds; ++k) {
        const detail::SeededData data = detail::synthesize_split(base, k);
        std::vector<BenchmarkReport> reports =
            sweep_np(methods, data.train, data.test, np_values);
        if (k == 0) {
            cells.resize(reports.size());
            for (std::size_t i = 0; i < reports.size(); ++i) {
                cells[i].method = reports[i].method;
                cells[i].selection = reports[i].selection;
                cells[i].min_success_count = reports[i].success_count;
            }
        }
        for (std::size_t i = 0; i < reports.size(); ++i) {
            reports[i].seed = data.seed;
            cells[i].rmse_per_seed_k.push_back(reports[i].rmse_k);
            cells[i].min_success_count =
                std::min(cells[i].min_success_count, reports[i].success_count);
            if (reports[i].success_count == 0)
                ++cells[i].n_failed_seeds;
            cells[i].reports.push_back(std::move(reports[i]));
        }
    }
    for (MonteCarloNpCell& cell : cells) {
        cell.n_seeds = n_seeds;
        const detail::MeanStd agg = detail::mean_std(cell.rmse_per_seed_k);
        cell.rmse_mean_k = agg.mean;
        cell.rmse_std_k = agg.std;
    }
    return cells;
}

/// Aggregate of one probe pattern across Monte-Carlo seeds.
struct MonteCarloPatternRow {
    int index = 0;
    FourPointPattern pattern;
    int n_seeds = 0;
    int n_failed_gpr = 0;
    int n_failed_fourpoint = 0;
    double rmse_gpr_mean_k = std::numeric_limits<double>::quiet_NaN();
    double rmse_gpr_std_k = std::numeric_limits<double>::quiet_NaN();
    double rmse_fourpoint_mean_k = std::numeric_limits<double>::quiet_NaN();
    double rmse_fourpoint_std_k = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> rmse_gpr_per_seed_k;
    std::vector<double> rmse_fourpoint_per_seed_k;
    std::vector<BenchmarkReport> gpr_reports;        // one per seed
    std::vector<BenchmarkReport> fourpoint_reports;  // one per seed
};

/// Repeat pattern_study over n_seeds derived scenarios and report mean/std
/// of RMSE per pattern for both methods.
inline std::vector<MonteCarloPatternRow> monte_carlo_pattern_study(const ScenarioConfig& base,
                                                                   int n_seeds) {
    if (n_seeds < 1)
        throw ValidationError("monte carlo: n_seeds must be at least 1");

    std::vector<MonteCarloPatternRow> rows;
    for (int k = 0; k < n_seeds; ++k) {
        const detail::SeededData data = detail::synthesize_split(base, k);
        std::vector<PatternStudyRow> study = pattern_study(data.train, data.test);
        if (k == 0) {
            rows.resize(study.size());
            for (std::size_t i = 0; i < study.size(); ++i) {
                rows[i].index = study[i].index;
                rows[i].pattern = study[i].pattern;
            }
        }
        for (std::size_t i = 0; i < study.size(); ++i) {
            study[i].gpr.seed = data.seed;
            study[i].fourpoint.seed = data.seed;
            rows[i].rmse_gpr_per_seed_k.push_back(study[i].rmse_gpr_k);
            rows[i].rmse_fourpoint_per_seed_k.push_back(study[i].rmse_fourpoint_k);
            if (study[i].gpr.success_count == 0)
                ++rows[i].n_failed_gpr;
            if (study[i].fourpoint.success_count == 0)
                ++rows[i].n_failed_fourpoint;
            rows[i].gpr_reports.push_back(std::move(study[i].gpr));
            rows[i].fourpoint_reports.push_back(std::move(study[i].fourpoint));
        }
    }
    for (MonteCarloPatternRow& row : rows) {
        row.n_seeds = n_seeds;
        const detail::MeanStd g = detail::mean_std(row.rmse_gpr_per_seed_k);
        const detail::MeanStd f = detail::mean_std(row.rmse_fourpoint_per_seed_k);
        row.rmse_gpr_mean_k = g.mean;
        row.rmse_gpr_std_k = g.std;
        row.rmse_fourpoint_mean_k = f.mean;
        row.rmse_fourpoint_std_k = f.std;
    }
    return rows;
}

} // namespace ndtherm
