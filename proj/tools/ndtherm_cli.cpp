// ndtherm command line: simulate datasets, train/calibrate estimators,
// estimate single spectra, and run benchmark studies.
//
// Exit codes: 0 success, 1 runtime or I/O error, 2 configuration error,
// 3 run completed but some benchmark cells failed (report still written).
// Results go to standard output as JSON lines; human-readable summaries
// go to standard error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ndtherm/benchmark.hpp"
#include "ndtherm/calibration.hpp"
#include "ndtherm/errors.hpp"
#include "ndtherm/four_point.hpp"
#include "ndtherm/gpr.hpp"
#include "ndtherm/io.hpp"
#include "ndtherm/lorentz_fit.hpp"
#include "ndtherm/spectrum.hpp"
#include "ndtherm/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

struct BenchmarkParams {
    int n_seeds = 20;
    std::vector<int> np_values{4, 11, 41, 161, 321};
    std::vector<ndtherm::MethodId> methods{ndtherm::MethodId::LorentzFit,
                                           ndtherm::MethodId::Gpr};
    double bin_width_k = 0.25;
    bool pattern_study = true;
};

struct RunConfig {
    ndtherm::ScenarioConfig scenario = ndtherm::default_scenario();
    BenchmarkParams benchmark;
};

// A run config is one JSON document with the same top-level schema as the
// simulate manifest, so a manifest can be fed straight back in as a config.
RunConfig load_run_config(const std::optional<std::string>& config_path,
                          std::optional<std::uint64_t> seed_override) {
    RunConfig rc;
    if (config_path) {
        const json j = ndtherm::read_json_config(*config_path);
        if (!j.is_object())
            throw ndtherm::ConfigError(*config_path + ": top level must be a JSON object");
        ndtherm::detail::check_keys(
            j, {"version", "scenario", "noise_effective_std", "files", "benchmark"},
            "run config");
        if (j.contains("scenario"))
            rc.scenario = ndtherm::scenario_from_json(j.at("scenario"));
        if (j.contains("benchmark")) {
            const json& b = j.at("benchmark");
            ndtherm::detail::check_keys(
                b, {"n_seeds", "np_values", "methods", "bin_width_k", "pattern_study"},
                "benchmark");
            try {
                rc.benchmark.n_seeds = b.value("n_seeds", rc.benchmark.n_seeds);
                if (b.contains("np_values"))
                    b.at("np_values").get_to(rc.benchmark.np_values);
                if (b.contains("methods")) {
                    rc.benchmark.methods.clear();
                    for (const auto& name : b.at("methods"))
                        rc.benchmark.methods.push_back(
                            ndtherm::method_from_name(name.get<std::string>()));
                }
                rc.benchmark.bin_width_k = b.value("bin_width_k", rc.benchmark.bin_width_k);
                rc.benchmark.pattern_study =
                    b.value("pattern_study", rc.benchmark.pattern_study);
            } catch (const json::exception& e) {
                throw ndtherm::ConfigError(std::string("benchmark: ") + e.what());
            }
        }
    }
    if (seed_override)
        rc.scenario.noise.seed = *seed_override;
    validate(rc.scenario);
    if (rc.benchmark.n_seeds < 1)
        throw ndtherm::ConfigError("benchmark: n_seeds must be at least 1");
    if (!(rc.benchmark.bin_width_k > 0.0))
        throw ndtherm::ConfigError("benchmark: bin_width_k must be positive");
    return rc;
}

// Load the spectra a manifest points at, keeping one replicate (1-based)
// or all of them when replicate == 0. Paths are relative to the manifest.
std::vector<ndtherm::Spectrum> load_manifest_spectra(const fs::path& manifest_path,
                                                     int replicate) {
    const json j = ndtherm::read_json_file(manifest_path);
    if (!j.contains("files") || !j.at("files").is_array())
        throw ndtherm::ConfigError(manifest_path.string() +
                                   ": manifest has no 'files' array");
    const fs::path dir = manifest_path.parent_path();
    std::vector<ndtherm::Spectrum> spectra;
    for (const json& entry : j.at("files")) {
        int rep = 0;
        std::string rel;
        try {
            rep = entry.at("replicate").get<int>();
            rel = entry.at("path").get<std::string>();
        } catch (const json::exception& e) {
            throw ndtherm::ConfigError(manifest_path.string() + ": bad file entry (" +
                                       e.what() + ")");
        }
        if (replicate != 0 && rep != replicate)
            continue;
        spectra.push_back(ndtherm::read_spectrum_csv(dir / rel));
    }
    if (spectra.empty())
        throw ndtherm::ConfigError(manifest_path.string() + ": no spectra match replicate " +
                                   std::to_string(replicate));
    return spectra;
}

ndtherm::FourPointPattern pattern_by_index(int index) {
    const auto patterns = ndtherm::enumerate_four_point_patterns();
    if (index < 1 || index > static_cast<int>(patterns.size()))
        throw ndtherm::ConfigError("pattern index must be in [1, " +
                                   std::to_string(patterns.size()) + "]");
    return patterns[static_cast<std::size_t>(index) - 1];
}

void emit(const json& j) { std::cout << j.dump() << "\n"; }

int cmd_simulate(const std::optional<std::string>& config, const std::string& out,
                 std::optional<std::uint64_t> seed) {
    const RunConfig rc = load_run_config(config, seed);
    const std::vector<ndtherm::Spectrum> data = ndtherm::synth_dataset(rc.scenario);

    fs::create_directories(out);
    json files = json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int rep = static_cast<int>(i % static_cast<std::size_t>(rc.scenario.replicates)) + 1;
        const double t_k = *data[i].true_temperature_k;
        const std::string name = "spectrum_" + ndtherm::format_double(t_k) + "K_rep" +
                                 std::to_string(rep) + ".csv";
        ndtherm::write_spectrum_csv(fs::path(out) / name, data[i]);
        files.push_back({{"temperature_k", t_k}, {"replicate", rep}, {"path", name}});
    }
    const json manifest{{"version", kManifestVersion},
                        {"scenario", rc.scenario},
                        {"noise_effective_std", rc.scenario.noise.effective_std()},
                        {"files", files}};
    const fs::path manifest_path = fs::path(out) / "manifest.json";
    ndtherm::write_json_file(manifest_path, manifest);

    emit({{"manifest", manifest_path.string()}, {"n_files", data.size()}});
    std::cerr << "wrote " << data.size() << " spectra and " << manifest_path.string()
              << "\n";
    return 0;
}

int cmd_train_gpr(const std::string& manifest, const std::string& out, int replicate,
                  int n_p, int pattern_index) {
    if (n_p != 0 && pattern_index != 0)
        throw ndtherm::ConfigError("--np and --pattern-index are mutually exclusive");
    const std::vector<ndtherm::Spectrum> spectra = load_manifest_spectra(manifest, replicate);

    ndtherm::GprModel model;
    if (pattern_index != 0) {
        const ndtherm::FourPointPattern pattern = pattern_by_index(pattern_index);
        model = ndtherm::train_subsampled(
            spectra, std::span<const double>(pattern.frequencies_mhz));
    } else if (n_p != 0) {
        model = ndtherm::train_subsampled(spectra, n_p);
    } else {
        model = ndtherm::train(spectra);
    }

    fs::create_directories(out);
    const fs::path path = fs::path(out) / "gpr_model.json";
    ndtherm::save_gpr_model(path, model);

    emit({{"model", path.string()},
          {"n_p", model.d},
          {"n_train", model.n},
          {"hyperparams", model.hyper}});
    std::cerr << "trained GPR on " << model.n << " spectra at " << model.d
              << " points, model in " << path.string() << "\n";
    return 0;
}

int cmd_calibrate_4point(const std::string& manifest, const std::string& out, int replicate,
                         int pattern_index, std::optional<double> t_ref) {
    const std::vector<ndtherm::Spectrum> spectra = load_manifest_spectra(manifest, replicate);
    const ndtherm::FourPointPattern pattern = pattern_by_index(pattern_index);
    const ndtherm::FourPointCalibration cal =
        ndtherm::calibrate_four_point(spectra, pattern, t_ref);

    fs::create_directories(out);
    const fs::path path = fs::path(out) / "four_point_calibration.json";
    ndtherm::save_four_point_calibration(path, cal);

    emit({{"calibration", path.string()},
          {"pattern_index", pattern_index},
          {"alpha_khz_per_k", cal.cal.alpha_khz_per_k},
          {"t_ref_k", cal.t_ref_k}});
    std::cerr << "4-point calibration from " << spectra.size() << " spectra (alpha = "
              << cal.cal.alpha_khz_per_k << " kHz/K), written to " << path.string() << "\n";
    return 0;
}

int cmd_calibrate_fit(const std::string& manifest, const std::string& out, int replicate) {
    const std::vector<ndtherm::Spectrum> spectra = load_manifest_spectra(manifest, replicate);

    std::vector<double> ts, ds;
    int n_failures = 0;
    std::string first_error;
    for (const ndtherm::Spectrum& s : spectra) {
        if (!s.true_temperature_k)
            throw ndtherm::ValidationError("calibration spectra must carry temperature labels");
        try {
            const ndtherm::FitResult fit = ndtherm::fit_double_lorentzian(s);
            ts.push_back(*s.true_temperature_k);
            ds.push_back(fit.d_mhz);
        } catch (const ndtherm::Error& e) {
            ++n_failures;
            if (first_error.empty())
                first_error = ndtherm::detail::describe_error(e);
        }
    }
    if (ts.size() < 2)
        throw ndtherm::FitDiverged("calibration needs at least 2 successful fits" +
                                   (first_error.empty() ? "" : "; first failure: " + first_error));
    const ndtherm::CalibrationModel law = ndtherm::regress_zfs_vs_temperature(ts, ds);

    fs::create_directories(out);
    const fs::path path = fs::path(out) / "calibration.json";
    ndtherm::save_calibration_model(path, law);

    emit({{"calibration", path.string()},
          {"alpha_khz_per_k", law.alpha_khz_per_k},
          {"t0_k", law.t0_k},
          {"d_t0_mhz", law.d_t0_mhz},
          {"n_fit_failures", n_failures}});
    std::cerr << "fit calibration from " << ts.size() << " spectra (alpha = "
              << law.alpha_khz_per_k << " kHz/K), written to " << path.string() << "\n";
    return 0;
}

int cmd_estimate(const std::string& method, const std::string& model_path,
                 const std::string& spectrum_path) {
    const ndtherm::Spectrum s = ndtherm::read_spectrum_csv(spectrum_path);

    json result;
    if (method == "gpr") {
        const ndtherm::GprModel model = ndtherm::load_gpr_model(model_path);
        const ndtherm::Spectrum probe =
            s.frequencies_mhz == model.grid_mhz
                ? s
                : ndtherm::select_frequencies(s, std::span<const double>(model.grid_mhz));
        const ndtherm::Prediction p = ndtherm::predict(model, probe);
        result = {{"method", "gpr"}, {"t_est_k", p.mean_k}, {"t_std_k", p.std_k}};
    } else if (method == "fourpoint") {
        const ndtherm::FourPointCalibration cal =
            ndtherm::load_four_point_calibration(model_path);
        result = {{"method", "four_point"},
                  {"t_est_k", ndtherm::estimate_four_point(cal, s)}};
    } else {
        const ndtherm::CalibrationModel law = ndtherm::load_calibration_model(model_path);
        const ndtherm::FitResult fit = ndtherm::fit_double_lorentzian(s);
        result = {{"method", "lorentz_fit"},
                  {"t_est_k", ndtherm::zfs_to_temperature(law, fit.d_mhz)},
                  {"d_mhz", fit.d_mhz}};
    }

    emit(result);
    std::cerr << "estimated " << result.at("t_est_k").get<double>() << " K\n";
    return 0;
}

bool cell_has_failures(const ndtherm::MonteCarloNpCell& c) {
    if (c.n_failed_seeds > 0)
        return true;
    for (const ndtherm::BenchmarkReport& r : c.reports)
        if (r.success_count < r.estimates.size())
            return true;
    return false;
}

bool row_has_failures(const ndtherm::MonteCarloPatternRow& r) {
    if (r.n_failed_gpr > 0 || r.n_failed_fourpoint > 0)
        return true;
    for (const auto* reports : {&r.gpr_reports, &r.fourpoint_reports})
        for (const ndtherm::BenchmarkReport& rep : *reports)
            if (rep.success_count < rep.estimates.size())
                return true;
    return false;
}

int cmd_benchmark(const std::optional<std::string>& config, const std::string& out,
                  std::optional<std::uint64_t> seed) {
    const RunConfig rc = load_run_config(config, seed);
    const BenchmarkParams& bp = rc.benchmark;

    std::cerr << "running N_p sweep over " << bp.np_values.size() << " point counts, "
              << bp.methods.size() << " methods, " << bp.n_seeds << " seeds\n";
    const std::vector<ndtherm::MonteCarloNpCell> cells =
        ndtherm::monte_carlo_sweep_np(rc.scenario, bp.methods, bp.np_values, bp.n_seeds);

    std::vector<ndtherm::MonteCarloPatternRow> rows;
    if (bp.pattern_study) {
        std::cerr << "running 15-pattern study, " << bp.n_seeds << " seeds\n";
        rows = ndtherm::monte_carlo_pattern_study(rc.scenario, bp.n_seeds);
    }

    int n_failed_cells = 0;
    for (const auto& c : cells)
        if (cell_has_failures(c))
            ++n_failed_cells;
    for (const auto& r : rows)
        if (row_has_failures(r))
            ++n_failed_cells;

    fs::create_directories(out);
    std::vector<std::string> written;
    const fs::path np_csv = fs::path(out) / "rmse_vs_np.csv";
    ndtherm::write_rmse_vs_np_csv(np_csv, cells);
    written.push_back(np_csv.string());

    std::vector<std::pair<ndtherm::MethodId, std::vector<ndtherm::HistogramBin>>> histograms;
    if (!rows.empty()) {
        const fs::path pat_csv = fs::path(out) / "pattern_rmse.csv";
        ndtherm::write_pattern_rmse_csv(pat_csv, rows);
        written.push_back(pat_csv.string());

        std::vector<double> gpr_means, fp_means;
        for (const auto& r : rows) {
            if (std::isfinite(r.rmse_gpr_mean_k))
                gpr_means.push_back(r.rmse_gpr_mean_k);
            if (std::isfinite(r.rmse_fourpoint_mean_k))
                fp_means.push_back(r.rmse_fourpoint_mean_k);
        }
        if (!gpr_means.empty())
            histograms.emplace_back(ndtherm::MethodId::Gpr,
                                    ndtherm::histogram(gpr_means, bp.bin_width_k));
        if (!fp_means.empty())
            histograms.emplace_back(ndtherm::MethodId::FourPoint,
                                    ndtherm::histogram(fp_means, bp.bin_width_k));
        const fs::path hist_csv = fs::path(out) / "histogram.csv";
        ndtherm::write_histogram_csv(hist_csv, histograms);
        written.push_back(hist_csv.string());
    }

    json jhist = json::array();
    for (const auto& [method, bins] : histograms)
        jhist.push_back({{"method", ndtherm::method_name(method)}, {"bins", bins}});
    const json report{{"version", kManifestVersion},
                      {"scenario", rc.scenario},
                      {"n_seeds", bp.n_seeds},
                      {"bin_width_k", bp.bin_width_k},
                      {"np_cells", cells},
                      {"pattern_rows", rows},
                      {"histograms", jhist},
                      {"n_failed_cells", n_failed_cells}};
    const fs::path report_path = fs::path(out) / "report.json";
    ndtherm::write_json_file(report_path, report);

    for (const auto& c : cells)
        std::cerr << "  " << ndtherm::method_name(c.method) << " @ " << c.selection.describe()
                  << ": mean RMSE " << ndtherm::format_double(c.rmse_mean_k) << " K ("
                  << c.n_failed_seeds << "/" << c.n_seeds << " seeds failed)\n";
    if (n_failed_cells > 0)
        std::cerr << n_failed_cells << " cell(s) had failures; see " << report_path.string()
                  << "\n";

    emit({{"report", report_path.string()},
          {"csv", written},
          {"n_failed_cells", n_failed_cells}});
    return n_failed_cells > 0 ? 3 : 0;
}

int cmd_patterns() {
    emit(ndtherm::patterns_to_json());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"NV-center ODMR thermometry: simulate, calibrate, estimate, benchmark"};
    app.require_subcommand(1);

    std::optional<std::string> config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string manifest;
    std::string method;
    std::string model_path;
    std::string spectrum_path;
    int replicate = 1;
    int tg_np = 0;
    int tg_pattern = 0;
    int c4_pattern = 10;
    std::optional<double> t_ref;

    CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic labeled dataset");
    sim->add_option("--config", config, "run config JSON (defaults to the stock scenario)");
    sim->add_option("--out", out, "output directory")->required();
    sim->add_option("--seed", seed, "override the config noise seed");

    CLI::App* tg = app.add_subcommand("train-gpr", "Train a GPR model from a manifest");
    tg->add_option("manifest", manifest, "manifest JSON from simulate")->required();
    tg->add_option("--out", out, "output directory")->required();
    tg->add_option("--replicate", replicate, "1-based replicate to train on, 0 for all");
    tg->add_option("--np", tg_np, "subsample to this many equally spaced points");
    tg->add_option("--pattern-index", tg_pattern,
                   "train on the 4 points of this pattern (1-15)");

    CLI::App* c4 = app.add_subcommand("calibrate-4point",
                                      "Calibrate the 4-point estimator from a manifest");
    c4->add_option("manifest", manifest, "manifest JSON from simulate")->required();
    c4->add_option("--out", out, "output directory")->required();
    c4->add_option("--replicate", replicate, "1-based replicate to calibrate on, 0 for all");
    c4->add_option("--pattern-index", c4_pattern, "probe pattern index (1-15)");
    c4->add_option("--t-ref", t_ref,
                   "reference temperature (defaults to the lowest calibration temperature)");

    CLI::App* cf = app.add_subcommand(
        "calibrate-fit", "Fit the ZFS-temperature law by double-Lorentzian fitting");
    cf->add_option("manifest", manifest, "manifest JSON from simulate")->required();
    cf->add_option("--out", out, "output directory")->required();
    cf->add_option("--replicate", replicate, "1-based replicate to calibrate on, 0 for all");

    CLI::App* est = app.add_subcommand("estimate", "Estimate temperature from one spectrum");
    est->add_option("--method", method, "estimator to use")
        ->required()
        ->check(CLI::IsMember({"fourpoint", "fit", "gpr"}));
    est->add_option("--model", model_path, "model or calibration JSON")->required();
    est->add_option("spectrum", spectrum_path, "spectrum CSV")->required();

    CLI::App* bench = app.add_subcommand("benchmark", "Run the N_p sweep and pattern study");
    bench->add_option("--config", config, "run config JSON (defaults to the stock study)");
    bench->add_option("--out", out, "output directory")->required();
    bench->add_option("--seed", seed, "override the config noise seed");

    CLI::App* pat = app.add_subcommand("patterns", "Print the 15 standard probe patterns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(config, out, seed);
        if (tg->parsed())
            return cmd_train_gpr(manifest, out, replicate, tg_np, tg_pattern);
        if (c4->parsed())
            return cmd_calibrate_4point(manifest, out, replicate, c4_pattern, t_ref);
        if (cf->parsed())
            return cmd_calibrate_fit(manifest, out, replicate);
        if (est->parsed())
            return cmd_estimate(method, model_path, spectrum_path);
        if (bench->parsed())
            return cmd_benchmark(config, out, seed);
        if (pat->parsed())
            return cmd_patterns();
    } catch (const ndtherm::ConfigError& e) {
        std::cerr << "ConfigError: " << e.what() << "\n";
        return 2;
    } catch (const ndtherm::ValidationError& e) {
        std::cerr << "ValidationError: " << e.what() << "\n";
        return 2;
    } catch (const ndtherm::Error& e) {
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
