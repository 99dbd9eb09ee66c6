#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ndtherm/spectrum.hpp"

using namespace ndtherm;
using Catch::Approx;

TEST_CASE("sweep grid generates an inclusive equally spaced range", "[spectrum]") {
    const SweepGrid grid{2830.0, 2910.0, 321};
    const std::vector<double> f = grid.frequencies();

    REQUIRE(f.size() == 321);
    REQUIRE(f.front() == 2830.0);
    REQUIRE(f.back() == 2910.0);
    for (std::size_t i = 1; i < f.size(); ++i)
        REQUIRE(f[i] - f[i - 1] == Approx(0.25).margin(1e-12));
}

TEST_CASE("sweep grid rejects degenerate ranges", "[spectrum]") {
    REQUIRE_THROWS_AS((SweepGrid{2910.0, 2830.0, 321}.frequencies()), ValidationError);
    REQUIRE_THROWS_AS((SweepGrid{2830.0, 2910.0, 1}.frequencies()), ValidationError);
}

TEST_CASE("spectrum validation", "[spectrum]") {
    Spectrum s = make_spectrum({2830.0, 2830.25, 2830.5}, {1.0, 0.99, 0.98}, 280.0);
    REQUIRE(s.size() == 3);
    REQUIRE(*s.true_temperature_k == 280.0);

    SECTION("length mismatch") {
        s.intensities.pop_back();
        REQUIRE_THROWS_AS(validate(s), ValidationError);
    }
    SECTION("non-ascending frequencies") {
        s.frequencies_mhz[2] = s.frequencies_mhz[1];
        REQUIRE_THROWS_AS(validate(s), ValidationError);
    }
    SECTION("non-finite intensity") {
        s.intensities[1] = std::nan("");
        REQUIRE_THROWS_AS(validate(s), ValidationError);
    }
    SECTION("too short") {
        REQUIRE_THROWS_AS(make_spectrum({2830.0}, {1.0}), ValidationError);
    }
}

namespace {

Spectrum ramp_spectrum(int n) {
    const SweepGrid grid{2830.0, 2910.0, n};
    std::vector<double> f = grid.frequencies();
    std::vector<double> y(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        y[i] = static_cast<double>(i);
    return make_spectrum(std::move(f), std::move(y), 281.0);
}

} // namespace

TEST_CASE("equally spaced subsampling follows the rounding rule", "[spectrum]") {
    const Spectrum s = ramp_spectrum(321);

    SECTION("identity at full length") {
        const Spectrum out = subsample_equally_spaced(s, 321);
        REQUIRE(out.frequencies_mhz == s.frequencies_mhz);
        REQUIRE(out.intensities == s.intensities);
        REQUIRE(out.true_temperature_k == s.true_temperature_k);
    }
    SECTION("two points keep the endpoints") {
        const Spectrum out = subsample_equally_spaced(s, 2);
        REQUIRE(out.intensities == std::vector<double>{0.0, 320.0});
    }
    SECTION("eleven points land on indices 0, 32, ..., 320") {
        const Spectrum out = subsample_equally_spaced(s, 11);
        for (int j = 0; j < 11; ++j)
            REQUIRE(out.intensities[static_cast<std::size_t>(j)] == 32.0 * j);
    }
    SECTION("output is a subsequence with the label preserved") {
        const Spectrum out = subsample_equally_spaced(s, 41);
        REQUIRE(out.size() == 41);
        REQUIRE(*out.true_temperature_k == 281.0);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto idx = static_cast<std::size_t>(out.intensities[i]);
            REQUIRE(s.frequencies_mhz[idx] == out.frequencies_mhz[i]);
        }
    }
    SECTION("out-of-range point counts") {
        REQUIRE_THROWS_AS(subsample_equally_spaced(s, 1), ValidationError);
        REQUIRE_THROWS_AS(subsample_equally_spaced(s, 322), ValidationError);
    }
}

TEST_CASE("select_frequencies picks nearest grid points", "[spectrum]") {
    const Spectrum s = ramp_spectrum(321);  // 0.25 MHz pitch

    SECTION("exact hits at the standard probe frequencies") {
        const std::vector<double> targets{2854.0, 2856.0, 2884.0, 2886.0};
        const Spectrum out = select_frequencies(s, targets);
        REQUIRE(out.frequencies_mhz == targets);
    }
    SECTION("off-grid target resolves to the nearest point") {
        const std::vector<double> targets{2854.13};
        const Spectrum out = select_frequencies(s, targets);
        REQUIRE(out.frequencies_mhz[0] == 2854.25);
    }
    SECTION("tie resolves to the lower frequency") {
        const std::vector<double> targets{2854.125};
        const Spectrum out = select_frequencies(s, targets);
        REQUIRE(out.frequencies_mhz[0] == 2854.0);
    }
    SECTION("output sorted even when targets are not") {
        const std::vector<double> targets{2886.0, 2854.0};
        const Spectrum out = select_frequencies(s, targets);
        REQUIRE(out.frequencies_mhz == std::vector<double>{2854.0, 2886.0});
    }
    SECTION("duplicate resolution rejected") {
        const std::vector<double> targets{2854.0, 2854.1};
        REQUIRE_THROWS_AS(select_frequencies(s, targets), ValidationError);
    }
    SECTION("target outside the sweep range rejected") {
        const std::vector<double> targets{2920.0};
        REQUIRE_THROWS_AS(select_frequencies(s, targets), ValidationError);
    }
}
