#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "ndtherm/benchmark.hpp"

using namespace ndtherm;
using Catch::Approx;

namespace {

struct SharedData {
    ScenarioConfig cfg;
    std::vector<Spectrum> train;
    std::vector<Spectrum> test;
};

const SharedData& seeded_data() {
    static const SharedData data = [] {
        SharedData d;
        d.cfg = default_scenario();
        const std::vector<Spectrum> all = synth_dataset(d.cfg);
        d.train = replicate_slice(all, 0, d.cfg.replicates);
        d.test = replicate_slice(all, 1, d.cfg.replicates);
        return d;
    }();
    return data;
}

} // namespace

TEST_CASE("rmse hand oracles", "[benchmark]") {
    const std::vector<std::pair<double, double>> pairs{{280.0, 281.0}, {282.0, 282.0}};
    REQUIRE(rmse(pairs) == Approx(std::sqrt(0.5)).epsilon(1e-15));

    const std::vector<std::pair<double, double>> single{{280.0, 279.25}};
    REQUIRE(rmse(single) == Approx(0.75).epsilon(1e-15));

    REQUIRE_THROWS_AS(rmse(std::vector<std::pair<double, double>>{}), ValidationError);
    const std::vector<std::pair<double, double>> bad{
        {280.0, std::numeric_limits<double>::quiet_NaN()}};
    REQUIRE_THROWS_AS(rmse(bad), ValidationError);
}

TEST_CASE("histogram binning", "[benchmark]") {
    SECTION("edges on multiples of the width, upper-bin ties") {
        const std::vector<double> values{0.1, 0.15, 0.4};
        const std::vector<HistogramBin> bins = histogram(values, 0.2);
        REQUIRE(bins.size() == 2);
        REQUIRE(bins[0].bin_lower == 0.0);
        REQUIRE(bins[0].count == 2);
        REQUIRE(bins[1].bin_lower == Approx(0.4));
        REQUIRE(bins[1].count == 1);
    }
    SECTION("negative values land in negative bins") {
        const std::vector<double> values{-0.1};
        const std::vector<HistogramBin> bins = histogram(values, 0.25);
        REQUIRE(bins.size() == 1);
        REQUIRE(bins[0].bin_lower == -0.25);
    }
    SECTION("input validation") {
        REQUIRE_THROWS_AS(histogram(std::vector<double>{}), ValidationError);
        REQUIRE_THROWS_AS(histogram(std::vector<double>{1.0}, 0.0), ValidationError);
        REQUIRE_THROWS_AS(
            histogram(std::vector<double>{std::numeric_limits<double>::infinity()}),
            ValidationError);
    }
}

TEST_CASE("method names round trip", "[benchmark]") {
    for (const MethodId m : {MethodId::FourPoint, MethodId::LorentzFit, MethodId::Gpr})
        REQUIRE(method_from_name(method_name(m)) == m);
    REQUIRE_THROWS_AS(method_from_name("splines"), ValidationError);
}

TEST_CASE("point selection descriptions", "[benchmark]") {
    REQUIRE(PointSelection::full().describe() == "full");
    REQUIRE(PointSelection::equally_spaced(41).describe() == "equally_spaced(41)");
    REQUIRE(PointSelection::from_pattern(FourPointPattern{}).describe() ==
            "pattern(-16,-14,14,16)");
    REQUIRE_THROWS_AS(PointSelection::equally_spaced(1), ValidationError);
}

TEST_CASE("gpr run on the full sweep", "[benchmark][slow]") {
    const SharedData& d = seeded_data();
    const BenchmarkReport r =
        run_method(MethodId::Gpr, d.train, d.test, PointSelection::full());

    REQUIRE(r.method == MethodId::Gpr);
    REQUIRE(r.selection.kind == PointSelection::Kind::Full);
    REQUIRE(r.selection.n_p == 321);  // resolved from the sweep
    REQUIRE(r.estimates.size() == d.test.size());
    REQUIRE(r.success_count == static_cast<int>(d.test.size()));
    REQUIRE_FALSE(r.alpha_khz_per_k.has_value());
    for (const EstimateCell& c : r.estimates) {
        REQUIRE(c.success);
        REQUIRE(c.t_std_k.has_value());
        REQUIRE(*c.t_std_k >= 0.0);
    }
    REQUIRE(r.rmse_k < 0.5);
    REQUIRE(recompute_rmse(r) == r.rmse_k);
}

TEST_CASE("a one-cell sweep equals the direct run", "[benchmark][slow]") {
    const SharedData& d = seeded_data();
    const std::vector<BenchmarkReport> swept =
        sweep_np({MethodId::Gpr}, d.train, d.test, {41});
    const BenchmarkReport direct = run_method(MethodId::Gpr, d.train, d.test, 41);

    REQUIRE(swept.size() == 1);
    REQUIRE(swept[0].rmse_k == direct.rmse_k);
    REQUIRE(swept[0].success_count == direct.success_count);
    for (std::size_t i = 0; i < direct.estimates.size(); ++i)
        REQUIRE(swept[0].estimates[i].t_est_k == direct.estimates[i].t_est_k);
}

TEST_CASE("the line fit cannot run on four points", "[benchmark]") {
    const SharedData& d = seeded_data();

    SECTION("the direct run throws with the flagged report attached") {
        try {
            run_method(MethodId::LorentzFit, d.train, d.test,
                       PointSelection::from_pattern(FourPointPattern{}));
            FAIL("expected AllEstimatesFailed");
        } catch (const AllEstimatesFailed& e) {
            REQUIRE(e.report.success_count == 0);
            REQUIRE(e.report.estimates.size() == d.test.size());
            REQUIRE(std::isnan(e.report.rmse_k));
            REQUIRE(e.report.estimates.front().error.find("UnderDetermined") !=
                    std::string::npos);
        }
    }
    SECTION("the sweep keeps the flagged report instead of dropping it") {
        const std::vector<BenchmarkReport> swept =
            sweep_np({MethodId::LorentzFit}, d.train, d.test, {4});
        REQUIRE(swept.size() == 1);
        REQUIRE(swept[0].success_count == 0);
        REQUIRE(std::isnan(swept[0].rmse_k));
    }
}

TEST_CASE("the 4-point method needs a 4-point selection", "[benchmark]") {
    const SharedData& d = seeded_data();
    try {
        run_method(MethodId::FourPoint, d.train, d.test, 11);
        FAIL("expected AllEstimatesFailed");
    } catch (const AllEstimatesFailed& e) {
        REQUIRE(e.report.success_count == 0);
        REQUIRE(e.report.estimates.front().error.find("ValidationError") !=
                std::string::npos);
        REQUIRE(e.report.estimates.front().error.find("needs exactly 4") !=
                std::string::npos);
    }
}

TEST_CASE("the 4-point method runs end to end on a probe pattern", "[benchmark][slow]") {
    const SharedData& d = seeded_data();
    const BenchmarkReport r =
        run_method(MethodId::FourPoint, d.train, d.test, FourPointPattern{});

    REQUIRE(r.success_count == static_cast<int>(d.test.size()));
    REQUIRE(std::isfinite(r.rmse_k));
    REQUIRE(r.alpha_khz_per_k.has_value());
    REQUIRE(*r.alpha_khz_per_k == Approx(-74.0).margin(15.0));
    REQUIRE(recompute_rmse(r) == r.rmse_k);
}

TEST_CASE("benchmark input validation", "[benchmark]") {
    const SharedData& d = seeded_data();
    SECTION("empty test set") {
        REQUIRE_THROWS_AS(run_method(MethodId::Gpr, d.train, {}, 11), ValidationError);
    }
    SECTION("test grid differs from the training grid") {
        std::vector<Spectrum> other = d.test;
        other[0] = subsample_equally_spaced(other[0], 161);
        REQUIRE_THROWS_AS(run_method(MethodId::Gpr, d.train, other, 11), GridMismatch);
    }
    SECTION("unlabeled test spectrum") {
        std::vector<Spectrum> other = d.test;
        other[0].true_temperature_k.reset();
        REQUIRE_THROWS_AS(run_method(MethodId::Gpr, d.train, other, 11), ValidationError);
    }
    SECTION("sweep argument checks") {
        REQUIRE_THROWS_AS(sweep_np({}, d.train, d.test, {11}), ValidationError);
        REQUIRE_THROWS_AS(sweep_np({MethodId::Gpr}, d.train, d.test, {}), ValidationError);
        REQUIRE_THROWS_AS(sweep_np({MethodId::Gpr}, d.train, d.test, {1}), ValidationError);
    }
}

TEST_CASE("pattern study covers all fifteen patterns", "[benchmark][slow]") {
    const SharedData& d = seeded_data();
    const CalibrationModel sentinel{-50.0, 280.0, 2870.0};
    const std::vector<PatternStudyRow> rows = pattern_study(d.train, d.test, sentinel);

    REQUIRE(rows.size() == 15);
    const std::vector<FourPointPattern> patterns = enumerate_four_point_patterns();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].index == static_cast<int>(i) + 1);
        REQUIRE(rows[i].pattern.frequencies_mhz == patterns[i].frequencies_mhz);
        REQUIRE(rows[i].rmse_gpr_k == rows[i].gpr.rmse_k);
        REQUIRE(rows[i].rmse_fourpoint_k == rows[i].fourpoint.rmse_k);
        // the supplied law is shared across every pattern
        REQUIRE(rows[i].fourpoint.alpha_khz_per_k.has_value());
        REQUIRE(*rows[i].fourpoint.alpha_khz_per_k == -50.0);
    }
}

TEST_CASE("reference pattern table ships with the study", "[benchmark]") {
    const auto& table = pattern_reference_rmse();
    REQUIRE(table.size() == 15);
    REQUIRE(table[9].first == Approx(0.6561));
    REQUIRE(table[9].second == Approx(0.8920));
    for (const auto& [g, f] : table) {
        REQUIRE(g > 0.0);
        REQUIRE(f > 0.0);
    }
}

TEST_CASE("monte carlo sweep stamps derived seeds", "[benchmark][slow]") {
    const SharedData& d = seeded_data();
    const std::vector<MonteCarloNpCell> cells =
        monte_carlo_sweep_np(d.cfg, {MethodId::Gpr}, {11}, 3);

    REQUIRE(cells.size() == 1);
    const MonteCarloNpCell& cell = cells[0];
    REQUIRE(cell.n_seeds == 3);
    REQUIRE(cell.n_failed_seeds == 0);
    REQUIRE(cell.min_success_count == static_cast<int>(d.test.size()));
    REQUIRE(cell.reports.size() == 3);
    REQUIRE(cell.rmse_per_seed_k.size() == 3);
    for (int k = 0; k < 3; ++k) {
        REQUIRE(cell.reports[k].seed == d.cfg.noise.seed + static_cast<std::uint64_t>(k));
        REQUIRE(cell.rmse_per_seed_k[k] == cell.reports[k].rmse_k);
        REQUIRE(std::isfinite(cell.rmse_per_seed_k[k]));
    }

    SECTION("mean and std match a direct recomputation") {
        double mean = 0.0;
        for (const double v : cell.rmse_per_seed_k)
            mean += v;
        mean /= 3.0;
        double var = 0.0;
        for (const double v : cell.rmse_per_seed_k)
            var += (v - mean) * (v - mean);
        REQUIRE(cell.rmse_mean_k == Approx(mean).margin(1e-12));
        REQUIRE(cell.rmse_std_k == Approx(std::sqrt(var / 2.0)).margin(1e-12));
    }
    SECTION("a rerun reproduces every per-seed value") {
        const std::vector<MonteCarloNpCell> again =
            monte_carlo_sweep_np(d.cfg, {MethodId::Gpr}, {11}, 3);
        REQUIRE(again[0].rmse_per_seed_k == cell.rmse_per_seed_k);
    }
}

TEST_CASE("monte carlo pattern study aggregates both methods", "[benchmark][slow]") {
    const SharedData& d = seeded_data();
    const std::vector<MonteCarloPatternRow> rows = monte_carlo_pattern_study(d.cfg, 2);

    REQUIRE(rows.size() == 15);
    for (const MonteCarloPatternRow& row : rows) {
        REQUIRE(row.n_seeds == 2);
        REQUIRE(row.gpr_reports.size() == 2);
        REQUIRE(row.fourpoint_reports.size() == 2);
        REQUIRE(row.gpr_reports[0].seed == d.cfg.noise.seed);
        REQUIRE(row.gpr_reports[1].seed == d.cfg.noise.seed + 1);
        REQUIRE(std::isfinite(row.rmse_gpr_mean_k));
        REQUIRE(std::isfinite(row.rmse_fourpoint_mean_k));
        REQUIRE(row.rmse_gpr_mean_k ==
                Approx(0.5 * (row.rmse_gpr_per_seed_k[0] + row.rmse_gpr_per_seed_k[1]))
                    .margin(1e-12));
    }
}

TEST_CASE("monte carlo argument validation", "[benchmark]") {
    const SharedData& d = seeded_data();
    REQUIRE_THROWS_AS(monte_carlo_sweep_np(d.cfg, {MethodId::Gpr}, {11}, 0),
                      ValidationError);
    REQUIRE_THROWS_AS(monte_carlo_sweep_np(d.cfg, {}, {11}, 1), ValidationError);
    REQUIRE_THROWS_AS(monte_carlo_pattern_study(d.cfg, 0), ValidationError);

    SECTION("a single-replicate scenario cannot split") {
        ScenarioConfig single = d.cfg;
        single.replicates = 1;
        REQUIRE_THROWS_AS(monte_carlo_sweep_np(single, {MethodId::Gpr}, {11}, 1),
                          ValidationError);
    }
}
