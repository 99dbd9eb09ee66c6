#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "ndtherm/benchmark.hpp"
#include "ndtherm/calibration.hpp"
#include "ndtherm/errors.hpp"
#include "ndtherm/four_point.hpp"
#include "ndtherm/gpr.hpp"
#include "ndtherm/line_shape.hpp"
#include "ndtherm/spectrum.hpp"
#include "ndtherm/synth.hpp"

namespace ndtherm {

/// Shortest decimal form that parses back to the same double; "nan"/"inf"
/// for the non-finite values.
inline std::string format_double(double v) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace detail {

inline double parse_double_field(std::string_view text, const std::string& context) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw IoError(context + ": cannot parse '" + std::string(text) + "' as a number");
    return v;
}

inline std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return line;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Spectrum CSV: optional '#' comments, then the header
// "frequency_mhz,intensity", one ascending-frequency row per point. A
// "# true_temperature_k=<value>" comment carries the label.
// ---------------------------------------------------------------------------

inline void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
    validate(s);
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    if (s.true_temperature_k)
        out << "# true_temperature_k=" << format_double(*s.true_temperature_k) << "\n";
    out << "frequency_mhz,intensity\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << format_double(s.frequencies_mhz[i]) << "," << format_double(s.intensities[i])
            << "\n";
    if (!out)
        throw IoError("write failed for " + path.string());
}

inline Spectrum read_spectrum_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string() + " for reading");

    Spectrum s;
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    static constexpr std::string_view label_key = "true_temperature_k=";
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = detail::strip_cr(raw);
        const std::string context = path.string() + ":" + std::to_string(line_no);
        if (line.empty())
            continue;
        if (line.front() == '#') {
            if (header_seen)
                throw IoError(context + ": comments are only allowed before the header");
            std::string_view body = line.substr(1);
            while (!body.empty() && body.front() == ' ')
                body.remove_prefix(1);
            if (body.substr(0, label_key.size()) == label_key)
                s.true_temperature_k =
                    detail::parse_double_field(body.substr(label_key.size()), context);
            continue;
        }
        if (!header_seen) {
            if (line != "frequency_mhz,intensity")
                throw IoError(context + ": expected header 'frequency_mhz,intensity'");
            header_seen = true;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos)
            throw IoError(context + ": expected 'frequency,intensity'");
        s.frequencies_mhz.push_back(
            detail::parse_double_field(line.substr(0, comma), context));
        s.intensities.push_back(
            detail::parse_double_field(line.substr(comma + 1), context));
    }
    if (!header_seen)
        throw IoError(path.string() + ": missing 'frequency_mhz,intensity' header");
    try {
        validate(s);
    } catch (const ValidationError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return s;
}

// ---------------------------------------------------------------------------
// JSON conversions. Configs deserialize section by section: an absent
// section keeps its default, a present one may set any subset of fields,
// and unknown keys are rejected so typos fail loudly.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& section) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) {
            std::string expected;
            for (const char* k : allowed) {
                if (!expected.empty())
                    expected += ", ";
                expected += k;
            }
            throw ConfigError("unknown key '" + item.key() + "' in " + section +
                              " (expected one of: " + expected + ")");
        }
    }
}

} // namespace detail

inline void to_json(nlohmann::json& j, const SweepGrid& g) {
    j = {{"f_start_mhz", g.f_start_mhz},
         {"f_stop_mhz", g.f_stop_mhz},
         {"n_points", g.n_points}};
}

inline void from_json(const nlohmann::json& j, SweepGrid& g) {
    detail::check_keys(j, {"f_start_mhz", "f_stop_mhz", "n_points"}, "grid");
    g.f_start_mhz = j.value("f_start_mhz", g.f_start_mhz);
    g.f_stop_mhz = j.value("f_stop_mhz", g.f_stop_mhz);
    g.n_points = j.value("n_points", g.n_points);
}

inline void to_json(nlohmann::json& j, const DoubleLorentzianParams& p) {
    j = {{"baseline", p.baseline},
         {"contrast_minus", p.contrast_minus},
         {"contrast_plus", p.contrast_plus},
         {"f_minus_mhz", p.f_minus_mhz},
         {"f_plus_mhz", p.f_plus_mhz},
         {"fwhm_minus_mhz", p.fwhm_minus_mhz},
         {"fwhm_plus_mhz", p.fwhm_plus_mhz}};
}

inline void from_json(const nlohmann::json& j, DoubleLorentzianParams& p) {
    detail::check_keys(j,
                       {"baseline", "contrast_minus", "contrast_plus", "f_minus_mhz",
                        "f_plus_mhz", "fwhm_minus_mhz", "fwhm_plus_mhz"},
                       "line_shape");
    p.baseline = j.value("baseline", p.baseline);
    p.contrast_minus = j.value("contrast_minus", p.contrast_minus);
    p.contrast_plus = j.value("contrast_plus", p.contrast_plus);
    p.f_minus_mhz = j.value("f_minus_mhz", p.f_minus_mhz);
    p.f_plus_mhz = j.value("f_plus_mhz", p.f_plus_mhz);
    p.fwhm_minus_mhz = j.value("fwhm_minus_mhz", p.fwhm_minus_mhz);
    p.fwhm_plus_mhz = j.value("fwhm_plus_mhz", p.fwhm_plus_mhz);
}

inline void to_json(nlohmann::json& j, const CalibrationModel& c) {
    j = {{"alpha_khz_per_k", c.alpha_khz_per_k}, {"t0_k", c.t0_k}, {"d_t0_mhz", c.d_t0_mhz}};
}

inline void from_json(const nlohmann::json& j, CalibrationModel& c) {
    detail::check_keys(j, {"alpha_khz_per_k", "t0_k", "d_t0_mhz"}, "cal");
    c.alpha_khz_per_k = j.value("alpha_khz_per_k", c.alpha_khz_per_k);
    c.t0_k = j.value("t0_k", c.t0_k);
    c.d_t0_mhz = j.value("d_t0_mhz", c.d_t0_mhz);
}

inline void to_json(nlohmann::json& j, const NoiseModel& n) {
    j = {{"sigma_per_sweep", n.sigma_per_sweep},
         {"n_sweeps", n.n_sweeps},
         {"seed", n.seed}};
}

inline void from_json(const nlohmann::json& j, NoiseModel& n) {
    detail::check_keys(j, {"sigma_per_sweep", "n_sweeps", "seed"}, "noise");
    n.sigma_per_sweep = j.value("sigma_per_sweep", n.sigma_per_sweep);
    n.n_sweeps = j.value("n_sweeps", n.n_sweeps);
    n.seed = j.value("seed", n.seed);
}

inline void to_json(nlohmann::json& j, const ScenarioConfig& cfg) {
    j = {{"grid", cfg.grid},
         {"line_shape", cfg.line_shape},
         {"cal", cfg.cal},
         {"temperatures_k", cfg.temperatures_k},
         {"noise", cfg.noise},
         {"replicates", cfg.replicates}};
}

inline void from_json(const nlohmann::json& j, ScenarioConfig& cfg) {
    detail::check_keys(
        j, {"grid", "line_shape", "cal", "temperatures_k", "noise", "replicates"},
        "scenario");
    if (j.contains("grid"))
        j.at("grid").get_to(cfg.grid);
    if (j.contains("line_shape"))
        j.at("line_shape").get_to(cfg.line_shape);
    if (j.contains("cal"))
        j.at("cal").get_to(cfg.cal);
    if (j.contains("temperatures_k"))
        j.at("temperatures_k").get_to(cfg.temperatures_k);
    if (j.contains("noise"))
        j.at("noise").get_to(cfg.noise);
    cfg.replicates = j.value("replicates", cfg.replicates);
}

inline void to_json(nlohmann::json& j, const GprHyperparams& h) {
    j = {{"log_lengthscale", h.log_lengthscale},
         {"log_signal_variance", h.log_signal_variance},
         {"log_noise_variance", h.log_noise_variance}};
}

inline void from_json(const nlohmann::json& j, GprHyperparams& h) {
    detail::check_keys(j, {"log_lengthscale", "log_signal_variance", "log_noise_variance"},
                       "hyperparams");
    h.log_lengthscale = j.value("log_lengthscale", h.log_lengthscale);
    h.log_signal_variance = j.value("log_signal_variance", h.log_signal_variance);
    h.log_noise_variance = j.value("log_noise_variance", h.log_noise_variance);
}

inline void to_json(nlohmann::json& j, const FourPointPattern& p) {
    j = {{"frequencies_mhz", p.frequencies_mhz}, {"center_mhz", p.center_mhz}};
}

inline void from_json(const nlohmann::json& j, FourPointPattern& p) {
    detail::check_keys(j, {"frequencies_mhz", "center_mhz"}, "pattern");
    j.at("frequencies_mhz").get_to(p.frequencies_mhz);
    p.center_mhz = j.value("center_mhz", p.center_mhz);
    validate(p);
}

// ---------------------------------------------------------------------------
// Generic JSON file helpers.
// ---------------------------------------------------------------------------

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string() + " for reading");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": malformed JSON (" + e.what() + ")");
    }
}

/// Like read_json_file, but a parse failure is a configuration error (the
/// user wrote the file) rather than an I/O error. Missing or unreadable
/// files are still I/O errors.
inline nlohmann::json read_json_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string() + " for reading");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": malformed JSON (" + e.what() + ")");
    }
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out)
        throw IoError("write failed for " + path.string());
}

/// Parse a ScenarioConfig from a JSON document (the "scenario" object of a
/// run config or manifest). Unknown keys and invalid values are
/// configuration errors.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    ScenarioConfig cfg = default_scenario();
    try {
        j.get_to(cfg);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

// ---------------------------------------------------------------------------
// GPR model persistence. Version field is mandatory; matrices are stored
// row-major, and reloading reproduces predictions exactly (the JSON number
// writer emits shortest round-trip decimals).
// ---------------------------------------------------------------------------

inline constexpr int kGprModelVersion = 1;

inline void save_gpr_model(const std::filesystem::path& path, const GprModel& m) {
    nlohmann::json j{{"version", kGprModelVersion},
                     {"n", m.n},
                     {"d", m.d},
                     {"x", m.x},
                     {"y", m.y},
                     {"x_mean", m.x_mean},
                     {"x_std", m.x_std},
                     {"y_mean", m.y_mean},
                     {"y_std", m.y_std},
                     {"hyperparams", m.hyper},
                     {"chol", nlohmann::json{{"n", m.chol.n},
                                             {"lower", m.chol.lower},
                                             {"jitter_used", m.chol.jitter_used}}},
                     {"weights", m.weights},
                     {"grid_mhz", m.grid_mhz}};
    write_json_file(path, j);
}

inline GprModel load_gpr_model(const std::filesystem::path& path) {
    const nlohmann::json j = read_json_file(path);
    GprModel m;
    try {
        if (!j.contains("version"))
            throw IoError(path.string() + ": model file has no version field");
        if (j.at("version").get<int>() != kGprModelVersion)
            throw IoError(path.string() + ": unsupported model version " +
                          j.at("version").dump());
        j.at("n").get_to(m.n);
        j.at("d").get_to(m.d);
        j.at("x").get_to(m.x);
        j.at("y").get_to(m.y);
        j.at("x_mean").get_to(m.x_mean);
        j.at("x_std").get_to(m.x_std);
        j.at("y_mean").get_to(m.y_mean);
        j.at("y_std").get_to(m.y_std);
        j.at("hyperparams").get_to(m.hyper);
        const nlohmann::json& c = j.at("chol");
        c.at("n").get_to(m.chol.n);
        c.at("lower").get_to(m.chol.lower);
        c.at("jitter_used").get_to(m.chol.jitter_used);
        j.at("weights").get_to(m.weights);
        j.at("grid_mhz").get_to(m.grid_mhz);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": model file corrupt (" + e.what() + ")");
    }
    if (m.x.size() != m.n * m.d || m.y.size() != m.n || m.x_mean.size() != m.d ||
        m.x_std.size() != m.d || m.chol.n != m.n || m.chol.lower.size() != m.n * m.n ||
        m.weights.size() != m.n || m.grid_mhz.size() != m.d)
        throw IoError(path.string() + ": model file corrupt (inconsistent array sizes)");
    validate(m.hyper);
    return m;
}

// ---------------------------------------------------------------------------
// 4-point calibration and plain calibration-law persistence.
// ---------------------------------------------------------------------------

inline constexpr int kCalibrationVersion = 1;

inline void save_four_point_calibration(const std::filesystem::path& path,
                                        const FourPointCalibration& c) {
    nlohmann::json j{{"version", kCalibrationVersion},
                     {"pattern", c.pattern},
                     {"resolved_frequencies_mhz", c.resolved_frequencies_mhz},
                     {"reference_intensities", c.reference_intensities},
                     {"slopes", c.slopes},
                     {"cal", c.cal},
                     {"t_ref_k", c.t_ref_k},
                     {"reference_fit", c.reference_fit}};
    write_json_file(path, j);
}

inline FourPointCalibration load_four_point_calibration(const std::filesystem::path& path) {
    const nlohmann::json j = read_json_file(path);
    FourPointCalibration c;
    try {
        if (!j.contains("version"))
            throw IoError(path.string() + ": calibration file has no version field");
        if (j.at("version").get<int>() != kCalibrationVersion)
            throw IoError(path.string() + ": unsupported calibration version " +
                          j.at("version").dump());
        j.at("pattern").get_to(c.pattern);
        j.at("resolved_frequencies_mhz").get_to(c.resolved_frequencies_mhz);
        j.at("reference_intensities").get_to(c.reference_intensities);
        j.at("slopes").get_to(c.slopes);
        j.at("cal").get_to(c.cal);
        j.at("t_ref_k").get_to(c.t_ref_k);
        j.at("reference_fit").get_to(c.reference_fit);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": calibration file corrupt (" + e.what() + ")");
    }
    validate(c.cal);
    detail::check_slope_signs(c.slopes);
    return c;
}

inline void save_calibration_model(const std::filesystem::path& path,
                                   const CalibrationModel& cal) {
    nlohmann::json j{{"version", kCalibrationVersion}, {"cal", cal}};
    write_json_file(path, j);
}

inline CalibrationModel load_calibration_model(const std::filesystem::path& path) {
    const nlohmann::json j = read_json_file(path);
    CalibrationModel cal;
    try {
        if (!j.contains("version"))
            throw IoError(path.string() + ": calibration file has no version field");
        j.at("cal").get_to(cal);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": calibration file corrupt (" + e.what() + ")");
    }
    validate(cal);
    return cal;
}

// ---------------------------------------------------------------------------
// Benchmark report serialization (write-only: reports are run artifacts).
// NaN RMSE values of fully failed runs serialize as JSON null.
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const PointSelection& s) {
    j = nlohmann::json{{"n_p", s.n_p}, {"description", s.describe()}};
    switch (s.kind) {
    case PointSelection::Kind::Full:
        j["kind"] = "full";
        break;
    case PointSelection::Kind::EquallySpaced:
        j["kind"] = "equally_spaced";
        break;
    case PointSelection::Kind::Pattern:
        j["kind"] = "pattern";
        j["pattern"] = *s.pattern;
        break;
    }
}

inline void to_json(nlohmann::json& j, const EstimateCell& c) {
    j = nlohmann::json{{"t_true_k", c.t_true_k},
                       {"t_est_k", c.t_est_k},
                       {"success", c.success},
                       {"error", c.error}};
    if (c.t_std_k)
        j["t_std_k"] = *c.t_std_k;
}

inline void to_json(nlohmann::json& j, const BenchmarkReport& r) {
    j = nlohmann::json{{"method", method_name(r.method)},
                       {"selection", r.selection},
                       {"estimates", r.estimates},
                       {"rmse_k", r.rmse_k},
                       {"success_count", r.success_count},
                       {"seed", r.seed},
                       {"scenario_id", r.scenario_id},
                       {"note", r.note}};
    if (r.alpha_khz_per_k)
        j["alpha_khz_per_k"] = *r.alpha_khz_per_k;
}

inline void to_json(nlohmann::json& j, const HistogramBin& b) {
    j = {{"bin_lower", b.bin_lower}, {"count", b.count}};
}

inline void to_json(nlohmann::json& j, const MonteCarloNpCell& c) {
    j = nlohmann::json{{"method", method_name(c.method)},
                       {"selection", c.selection},
                       {"n_seeds", c.n_seeds},
                       {"n_failed_seeds", c.n_failed_seeds},
                       {"min_success_count", c.min_success_count},
                       {"rmse_mean_k", c.rmse_mean_k},
                       {"rmse_std_k", c.rmse_std_k},
                       {"rmse_per_seed_k", c.rmse_per_seed_k},
                       {"reports", c.reports}};
}

inline void to_json(nlohmann::json& j, const MonteCarloPatternRow& r) {
    j = nlohmann::json{{"index", r.index},
                       {"pattern", r.pattern},
                       {"offsets_mhz", r.pattern.offsets_mhz()},
                       {"n_seeds", r.n_seeds},
                       {"n_failed_gpr", r.n_failed_gpr},
                       {"n_failed_fourpoint", r.n_failed_fourpoint},
                       {"rmse_gpr_mean_k", r.rmse_gpr_mean_k},
                       {"rmse_gpr_std_k", r.rmse_gpr_std_k},
                       {"rmse_fourpoint_mean_k", r.rmse_fourpoint_mean_k},
                       {"rmse_fourpoint_std_k", r.rmse_fourpoint_std_k},
                       {"rmse_gpr_per_seed_k", r.rmse_gpr_per_seed_k},
                       {"rmse_fourpoint_per_seed_k", r.rmse_fourpoint_per_seed_k},
                       {"gpr_reports", r.gpr_reports},
                       {"fourpoint_reports", r.fourpoint_reports}};
    if (r.index >= 1 && r.index <= 15) {
        const auto& ref = pattern_reference_rmse()[static_cast<std::size_t>(r.index) - 1];
        j["reference_rmse_gpr_k"] = ref.first;
        j["reference_rmse_four_point_k"] = ref.second;
    }
}

/// The 15 standard probe patterns as a JSON array (offsets, absolute
/// frequencies, and the reference RMSE values for context).
inline nlohmann::json patterns_to_json() {
    nlohmann::json arr = nlohmann::json::array();
    const std::vector<FourPointPattern> patterns = enumerate_four_point_patterns();
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        const auto& ref = pattern_reference_rmse()[i];
        arr.push_back({{"index", i + 1},
                       {"offsets_mhz", patterns[i].offsets_mhz()},
                       {"frequencies_mhz", patterns[i].frequencies_mhz},
                       {"center_mhz", patterns[i].center_mhz},
                       {"reference_rmse_gpr_k", ref.first},
                       {"reference_rmse_four_point_k", ref.second}});
    }
    return arr;
}

// ---------------------------------------------------------------------------
// Plot-data CSVs. Column orders are part of the format contract.
// ---------------------------------------------------------------------------

inline void write_rmse_vs_np_csv(const std::filesystem::path& path,
                                 const std::vector<MonteCarloNpCell>& cells) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << "method,n_p,rmse_mean,rmse_std\n";
    for (const MonteCarloNpCell& c : cells)
        out << method_name(c.method) << "," << c.selection.n_p << ","
            << format_double(c.rmse_mean_k) << "," << format_double(c.rmse_std_k) << "\n";
    if (!out)
        throw IoError("write failed for " + path.string());
}

inline void write_pattern_rmse_csv(const std::filesystem::path& path,
                                   const std::vector<MonteCarloPatternRow>& rows) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << "index,offsets,rmse_gpr,rmse_fourpoint\n";
    for (const MonteCarloPatternRow& r : rows) {
        out << r.index << ",";
        const auto offsets = r.pattern.offsets_mhz();
        for (std::size_t i = 0; i < offsets.size(); ++i)
            out << (i ? " " : "") << format_double(offsets[i]);
        out << "," << format_double(r.rmse_gpr_mean_k) << ","
            << format_double(r.rmse_fourpoint_mean_k) << "\n";
    }
    if (!out)
        throw IoError("write failed for " + path.string());
}

inline void write_histogram_csv(
    const std::filesystem::path& path,
    const std::vector<std::pair<MethodId, std::vector<HistogramBin>>>& histograms) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << "method,bin_lower,count\n";
    for (const auto& [method, bins] : histograms)
        for (const HistogramBin& b : bins)
            out << method_name(method) << "," << format_double(b.bin_lower) << "," << b.count
                << "\n";
    if (!out)
        throw IoError("write failed for " + path.string());
}

} // namespace ndtherm
