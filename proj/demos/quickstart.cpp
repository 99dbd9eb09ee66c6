// End-to-end walkthrough on the stock synthetic scenario: simulate a
// two-replicate dataset, calibrate all three estimators on replicate 1,
// then estimate replicate 2 and compare per-method errors.

#include <cstdio>
#include <vector>

#include "ndtherm/benchmark.hpp"
#include "ndtherm/four_point.hpp"
#include "ndtherm/gpr.hpp"
#include "ndtherm/lorentz_fit.hpp"
#include "ndtherm/synth.hpp"

int main() {
    using namespace ndtherm;

    ScenarioConfig cfg = default_scenario();
    std::vector<Spectrum> data = synth_dataset(cfg);
    std::vector<Spectrum> train_set = replicate_slice(data, 0, cfg.replicates);
    std::vector<Spectrum> test_set = replicate_slice(data, 1, cfg.replicates);
    std::printf("simulated %zu spectra (%zu train, %zu test), %zu points each\n",
                data.size(), train_set.size(), test_set.size(), train_set.front().size());

    FourPointCalibration four = calibrate_four_point(train_set, FourPointPattern{});
    std::printf("4-point calibration: alpha = %.2f kHz/K at T_ref = %.1f K\n",
                four.cal.alpha_khz_per_k, four.t_ref_k);

    GprModel gpr = train(train_set);
    std::printf("GPR trained: %zu x %zu inputs, lengthscale exp(%.3f)\n", gpr.n, gpr.d,
                gpr.hyper.log_lengthscale);

    std::printf("\n%8s %12s %12s %12s\n", "T_true", "4-point", "fit", "gpr");
    for (const Spectrum& s : test_set) {
        const double t4 = estimate_four_point(four, s);
        const double tf = zfs_to_temperature(four.cal, fit_double_lorentzian(s).d_mhz);
        const Prediction pg = predict(gpr, s);
        std::printf("%8.1f %12.3f %12.3f %7.3f±%.3f\n", *s.true_temperature_k, t4, tf,
                    pg.mean_k, pg.std_k);
    }

    BenchmarkReport r4 =
        run_method(MethodId::FourPoint, train_set, test_set, FourPointPattern{});
    BenchmarkReport rf =
        run_method(MethodId::LorentzFit, train_set, test_set, PointSelection::full());
    BenchmarkReport rg =
        run_method(MethodId::Gpr, train_set, test_set, PointSelection::full());
    std::printf("\nRMSE over %zu temperatures: 4-point %.3f K, fit %.3f K, gpr %.3f K\n",
                test_set.size(), r4.rmse_k, rf.rmse_k, rg.rmse_k);
    return 0;
}
