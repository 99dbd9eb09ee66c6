#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ndtherm/calibration.hpp"

using namespace ndtherm;
using Catch::Approx;

TEST_CASE("ZFS-temperature conversions match hand arithmetic", "[calibration]") {
    const CalibrationModel cal{-74.0, 280.0, 2870.0};

    SECTION("identity at the reference point") {
        REQUIRE(temperature_to_zfs(cal, 280.0) == 2870.0);
        REQUIRE(zfs_to_temperature(cal, 2870.0) == 280.0);
    }
    SECTION("one kelvin above reference shifts D by -0.074 MHz") {
        REQUIRE(temperature_to_zfs(cal, 281.0) == Approx(2869.926).epsilon(1e-12));
        REQUIRE(zfs_to_temperature(cal, 2869.926) == Approx(281.0).epsilon(1e-12));
    }
    SECTION("steeper slope, five kelvin") {
        const CalibrationModel steep{-80.8, 280.0, 2870.0};
        const double d = temperature_to_zfs(steep, 285.0);
        REQUIRE(d - 2870.0 == Approx(-0.404).epsilon(1e-12));
    }
}

TEST_CASE("conversion round trip is the identity", "[calibration]") {
    for (const double alpha : {-74.0, -80.8}) {
        const CalibrationModel cal{alpha, 280.0, 2870.0};
        for (double dt = -100.0; dt <= 100.0; dt += 0.37) {
            const double t = 280.0 + dt;
            REQUIRE(zfs_to_temperature(cal, temperature_to_zfs(cal, t)) ==
                    Approx(t).margin(1e-9));
        }
    }
}

TEST_CASE("calibration validation", "[calibration]") {
    REQUIRE_THROWS_AS(validate(CalibrationModel{0.0, 280.0, 2870.0}), ValidationError);
    REQUIRE_THROWS_AS(validate(CalibrationModel{std::nan(""), 280.0, 2870.0}),
                      ValidationError);
    REQUIRE_THROWS_AS(zfs_to_temperature(CalibrationModel{-74.0, 280.0, 2870.0},
                                         std::numeric_limits<double>::infinity()),
                      ValidationError);
    REQUIRE_THROWS_AS(temperature_to_zfs(CalibrationModel{-74.0, 280.0, 2870.0},
                                         std::nan("")),
                      ValidationError);
}

TEST_CASE("regression recovers an exact linear law", "[calibration]") {
    const CalibrationModel truth{-74.0, 282.5, 2869.815};
    std::vector<double> ts, ds;
    for (double t = 280.0; t <= 285.01; t += 0.5) {
        ts.push_back(t);
        ds.push_back(temperature_to_zfs(truth, t));
    }
    const CalibrationModel fit = regress_zfs_vs_temperature(ts, ds);
    REQUIRE(fit.alpha_khz_per_k == Approx(-74.0).margin(1e-9));
    REQUIRE(fit.t0_k == Approx(282.5).margin(1e-12));
    REQUIRE(fit.d_t0_mhz == Approx(2869.815).margin(1e-9));
}

TEST_CASE("regression rejects degenerate inputs", "[calibration]") {
    const std::vector<double> same{281.0, 281.0, 281.0};
    const std::vector<double> ds{2870.0, 2870.1, 2869.9};
    REQUIRE_THROWS_AS(regress_zfs_vs_temperature(same, ds), DegenerateRegression);

    const std::vector<double> one_t{281.0};
    const std::vector<double> one_d{2870.0};
    REQUIRE_THROWS_AS(regress_zfs_vs_temperature(one_t, one_d), ValidationError);
}
