#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "ndtherm/four_point.hpp"
#include "ndtherm/gpr.hpp"
#include "ndtherm/synth.hpp"

using namespace ndtherm;
using Catch::Approx;

namespace {

std::vector<Spectrum> noiseless_set(const std::vector<double>& temps) {
    ScenarioConfig cfg = default_scenario();
    cfg.noise.sigma_per_sweep = 0.0;
    std::vector<Spectrum> out;
    for (const double t : temps)
        out.push_back(synth_spectrum(cfg, t, 0));
    return out;
}

// Dense LU solver with partial pivoting, independent of the library's
// Cholesky path. Returns x with a*x = b; a is n x n row-major.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col]))
                piv = r;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c)
                std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a[r * n + col] / a[col * n + col];
            for (std::size_t c = col; c < n; ++c)
                a[r * n + c] -= factor * a[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < n; ++c)
            s -= a[r * n + c] * x[c];
        x[r] = s / a[r * n + r];
    }
    return x;
}

} // namespace

TEST_CASE("squared-exponential kernel", "[gpr]") {
    GprHyperparams h;
    h.log_lengthscale = std::log(3.0);
    h.log_signal_variance = std::log(2.0);

    const std::vector<double> origin{0.0, 0.0};
    SECTION("self-covariance is the signal variance") {
        REQUIRE(kernel(origin, origin, h) == Approx(2.0).epsilon(1e-14));
    }
    SECTION("value e-folds at distance lengthscale * sqrt(2)") {
        const std::vector<double> at{3.0 * std::sqrt(2.0), 0.0};
        REQUIRE(kernel(origin, at, h) == Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));
    }
    SECTION("strictly decreasing in distance") {
        double prev = kernel(origin, origin, h);
        for (double r = 0.5; r < 10.0; r += 0.5) {
            const std::vector<double> at{r, 0.0};
            const double k = kernel(origin, at, h);
            REQUIRE(k < prev);
            prev = k;
        }
    }
    SECTION("dimension mismatch is rejected") {
        const std::vector<double> three{0.0, 0.0, 0.0};
        REQUIRE_THROWS_AS(kernel(origin, three, h), ValidationError);
    }
}

TEST_CASE("prediction agrees with a dense linear-algebra oracle", "[gpr]") {
    std::vector<Spectrum> full =
        noiseless_set({280.0, 281.25, 282.5, 283.75, 285.0});
    std::vector<Spectrum> reduced;
    for (const Spectrum& s : full)
        reduced.push_back(subsample_equally_spaced(s, 5));

    GprHyperparams h;
    h.log_lengthscale = std::log(2.0);
    h.log_signal_variance = 0.25;
    h.log_noise_variance = -4.0;
    const GprModel model = make_model(reduced, h);

    const std::size_t n = reduced.size();
    const std::size_t d = reduced[0].size();

    // replicate the standardization
    std::vector<double> x_mean(d, 0.0), x_std(d, 0.0);
    for (const Spectrum& s : reduced)
        for (std::size_t j = 0; j < d; ++j)
            x_mean[j] += s.intensities[j] / static_cast<double>(n);
    for (const Spectrum& s : reduced)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = s.intensities[j] - x_mean[j];
            x_std[j] += c * c / static_cast<double>(n);
        }
    for (double& v : x_std)
        v = std::sqrt(v);

    double y_mean = 0.0;
    for (const Spectrum& s : reduced)
        y_mean += *s.true_temperature_k / static_cast<double>(n);
    double y_var = 0.0;
    for (const Spectrum& s : reduced) {
        const double c = *s.true_temperature_k - y_mean;
        y_var += c * c / static_cast<double>(n);
    }
    const double y_std = std::sqrt(y_var);

    std::vector<std::vector<double>> z(n, std::vector<double>(d));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j)
            z[i][j] = (reduced[i].intensities[j] - x_mean[j]) / x_std[j];
        y[i] = (*reduced[i].true_temperature_k - y_mean) / y_std;
    }

    const double ell2 = std::exp(2.0 * h.log_lengthscale);
    const double sf2 = std::exp(h.log_signal_variance);
    const double noise = std::exp(h.log_noise_variance) + kGprNoiseFloor;
    const auto k_of = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            sq += (a[j] - b[j]) * (a[j] - b[j]);
        return sf2 * std::exp(-0.5 * sq / ell2);
    };

    std::vector<double> big_k(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            big_k[i * n + j] = k_of(z[i], z[j]) + (i == j ? noise : 0.0);

    const Spectrum probe = subsample_equally_spaced(noiseless_set({282.0})[0], 5);
    std::vector<double> xs(d);
    for (std::size_t j = 0; j < d; ++j)
        xs[j] = (probe.intensities[j] - x_mean[j]) / x_std[j];
    std::vector<double> kstar(n);
    for (std::size_t i = 0; i < n; ++i)
        kstar[i] = k_of(z[i], xs);

    const std::vector<double> alpha = solve_dense(big_k, y);
    double mean_std_units = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        mean_std_units += kstar[i] * alpha[i];
    const double oracle_mean = y_mean + y_std * mean_std_units;

    const std::vector<double> beta = solve_dense(big_k, kstar);
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        quad += kstar[i] * beta[i];
    const double oracle_std = y_std * std::sqrt(std::max(0.0, sf2 + noise - quad));

    const Prediction p = predict(model, probe);
    REQUIRE(p.mean_k == Approx(oracle_mean).margin(1e-8));
    REQUIRE(p.std_k == Approx(oracle_std).margin(1e-8));
}

TEST_CASE("near-zero noise interpolates the training labels", "[gpr]") {
    std::vector<Spectrum> reduced;
    for (const Spectrum& s : noiseless_set({280.0, 281.25, 282.5, 283.75, 285.0}))
        reduced.push_back(subsample_equally_spaced(s, 11));

    GprHyperparams h;
    h.log_lengthscale = std::log(0.5 * std::sqrt(11.0));
    h.log_signal_variance = 0.0;
    h.log_noise_variance = std::log(1e-10);
    const GprModel model = make_model(reduced, h);

    for (const Spectrum& s : reduced) {
        const Prediction p = predict(model, s);
        REQUIRE(p.mean_k == Approx(*s.true_temperature_k).margin(1e-6));
        REQUIRE(p.std_k >= 0.0);
    }
}

TEST_CASE("far from the data the prediction reverts to the prior", "[gpr]") {
    std::vector<Spectrum> reduced;
    for (const Spectrum& s : noiseless_set({280.0, 282.5, 285.0}))
        reduced.push_back(subsample_equally_spaced(s, 5));

    GprHyperparams h;
    h.log_lengthscale = std::log(1.0);
    h.log_signal_variance = 0.5;
    h.log_noise_variance = -4.0;
    const GprModel model = make_model(reduced, h);

    Spectrum far = reduced[0];
    for (double& v : far.intensities)
        v += 100.0;  // hundreds of standardized units from every training row
    const Prediction p = predict(model, far);

    const double sf2 = std::exp(h.log_signal_variance);
    const double noise = std::exp(h.log_noise_variance) + kGprNoiseFloor;
    REQUIRE(p.mean_k == Approx(model.y_mean).margin(1e-9));
    REQUIRE(p.std_k == Approx(model.y_std * std::sqrt(sf2 + noise)).margin(1e-9));
}

TEST_CASE("training order does not matter", "[gpr]") {
    std::vector<Spectrum> reduced;
    for (const Spectrum& s : noiseless_set({280.0, 281.0, 282.0, 283.0, 284.0}))
        reduced.push_back(subsample_equally_spaced(s, 11));
    std::vector<Spectrum> reversed(reduced.rbegin(), reduced.rend());

    GprHyperparams h;
    h.log_lengthscale = std::log(std::sqrt(11.0));
    h.log_signal_variance = 0.0;
    h.log_noise_variance = -4.0;
    const GprModel a = make_model(reduced, h);
    const GprModel b = make_model(reversed, h);

    const Spectrum probe = subsample_equally_spaced(noiseless_set({281.6})[0], 11);
    REQUIRE(predict(a, probe).mean_k == Approx(predict(b, probe).mean_k).margin(1e-9));
    REQUIRE(predict(a, probe).std_k == Approx(predict(b, probe).std_k).margin(1e-9));
}

TEST_CASE("identical inputs with conflicting labels average out", "[gpr]") {
    const Spectrum base = subsample_equally_spaced(noiseless_set({282.0})[0], 5);
    Spectrum low = base, high = base;
    low.true_temperature_k = 280.0;
    high.true_temperature_k = 281.0;

    GprHyperparams h;
    h.log_noise_variance = std::log(1e-4);
    const GprModel model = make_model({low, high}, h);  // noise keeps this factorable
    const Prediction p = predict(model, base);
    REQUIRE(p.mean_k == Approx(280.5).margin(1e-6));
}

TEST_CASE("degenerate targets are rejected", "[gpr]") {
    std::vector<Spectrum> set = noiseless_set({282.0, 283.0});
    set[1].true_temperature_k = 282.0;
    REQUIRE_THROWS_AS(make_model(set, GprHyperparams{}), DegenerateTargets);
}

TEST_CASE("training input validation", "[gpr]") {
    SECTION("fewer than two spectra") {
        REQUIRE_THROWS_AS(train(noiseless_set({282.0})), ValidationError);
    }
    SECTION("missing label") {
        std::vector<Spectrum> set = noiseless_set({280.0, 285.0});
        set[0].true_temperature_k.reset();
        REQUIRE_THROWS_AS(train(set), ValidationError);
    }
    SECTION("mismatched grids") {
        std::vector<Spectrum> set = noiseless_set({280.0, 285.0});
        set[1] = subsample_equally_spaced(set[1], 161);
        REQUIRE_THROWS_AS(train(set), GridMismatch);
    }
}

TEST_CASE("subsampled training", "[gpr]") {
    const std::vector<Spectrum> set =
        noiseless_set({280.0, 281.25, 282.5, 283.75, 285.0});

    SECTION("pattern frequencies reduce the input dimension to four") {
        const FourPointPattern p = FourPointPattern::from_offsets({-16, -14, 14, 16});
        const GprModel m = train_subsampled(set, std::span<const double>(p.frequencies_mhz));
        REQUIRE(m.d == 4);
        REQUIRE(m.grid_mhz == std::vector<double>{2854.0, 2856.0, 2884.0, 2886.0});
    }
    SECTION("two points are already enough to train") {
        const GprModel m = train_subsampled(set, 2);
        REQUIRE(m.d == 2);
        const Spectrum probe = subsample_equally_spaced(noiseless_set({282.5})[0], 2);
        REQUIRE(std::isfinite(predict(m, probe).mean_k));
    }
}

TEST_CASE("keeping the full grid matches direct training exactly", "[gpr][slow]") {
    std::vector<Spectrum> set;
    for (const Spectrum& s : noiseless_set({280.0, 281.25, 282.5, 283.75, 285.0}))
        set.push_back(subsample_equally_spaced(s, 41));

    const GprModel direct = train(set);
    const GprModel via_subsample = train_subsampled(set, 41);
    REQUIRE(direct.hyper.log_lengthscale == via_subsample.hyper.log_lengthscale);
    REQUIRE(direct.hyper.log_signal_variance == via_subsample.hyper.log_signal_variance);
    REQUIRE(direct.hyper.log_noise_variance == via_subsample.hyper.log_noise_variance);

    const Spectrum probe = subsample_equally_spaced(noiseless_set({283.1})[0], 41);
    REQUIRE(predict(direct, probe).mean_k == predict(via_subsample, probe).mean_k);
}

TEST_CASE("trained hyperparameters beat every multi-start seed", "[gpr][slow]") {
    ScenarioConfig cfg = default_scenario();
    const std::vector<Spectrum> data = synth_dataset(cfg);
    std::vector<Spectrum> set;
    for (const Spectrum& s : replicate_slice(data, 0, cfg.replicates))
        set.push_back(subsample_equally_spaced(s, 11));

    const GprModel model = train(set);
    const double best = detail::log_marginal_likelihood(model, model.hyper);

    const double log_ell_mid = std::log(std::sqrt(static_cast<double>(model.d)));
    for (const double dl : {std::log(0.5), 0.0, std::log(2.0)})
        for (const double lsf : {-2.0, 0.0, 2.0})
            for (const double lsn : {-6.0, -3.0, -1.0}) {
                const GprHyperparams h{log_ell_mid + dl, lsf, lsn};
                double at_start;
                try {
                    at_start = detail::log_marginal_likelihood(model, h);
                } catch (const NotPositiveDefinite&) {
                    continue;  // unfactorable start, trivially beaten
                }
                REQUIRE(best >= at_start - 1e-9);
            }
}

TEST_CASE("prediction grid must match the training grid", "[gpr]") {
    std::vector<Spectrum> set;
    for (const Spectrum& s : noiseless_set({280.0, 282.5, 285.0}))
        set.push_back(subsample_equally_spaced(s, 11));
    const GprModel m = make_model(set, GprHyperparams{});

    const Spectrum wrong = subsample_equally_spaced(noiseless_set({282.0})[0], 21);
    REQUIRE_THROWS_AS(predict(m, wrong), GridMismatch);
}
