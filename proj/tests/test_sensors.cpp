#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "til/sensors.hpp"
#include "til/vehicle.hpp"

using namespace til;

TEST_CASE("noiseless rig is the identity") {
    NoiseConfig cfg{0.0, 0.0, 5.0, 0.0, 0.0, 42};
    SensorRig rig(cfg);
    CHECK(rig.measure_acceleration(-7.3) == doctest::Approx(-7.3));
    CHECK(rig.measure_chassis_speed(31.0, 1e-3) == doctest::Approx(31.0));
    CHECK(rig.measure_wheel_rate(88.0, 1.7) == doctest::Approx(88.0));
    CHECK(rig.measured_slip(30.0, 15.0 / 0.33, 0.33) == doctest::Approx(wheel_slip(30.0, 15.0 / 0.33, 0.33)));
}

TEST_CASE("acceleration noise variance matches sigma^2") {
    NoiseConfig cfg;
    cfg.accel_noise_std = 0.3;
    cfg.seed = 7;
    SensorRig rig(cfg);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rig.measure_acceleration(0.0);
        sum += x;
        sum2 += x * x;
    }
    const double var = sum2 / n - (sum / n) * (sum / n);
    CHECK(std::abs(var - 0.09) < 0.05 * 0.09);
}

TEST_CASE("same seed, same stream") {
    NoiseConfig cfg;
    cfg.accel_noise_std = 0.5;
    cfg.speed_noise_std = 0.2;
    cfg.wheel_noise_offset = 1.0;
    cfg.wheel_noise_speed_gain = 0.01;
    cfg.seed = 99;
    SensorRig a(cfg);
    SensorRig b(cfg);
    for (int i = 0; i < 2000; ++i) {
        const double t = i * 1e-3;
        CHECK(a.measure_acceleration(1.0) == b.measure_acceleration(1.0));
        CHECK(a.measure_chassis_speed(30.0, 1e-3) == b.measure_chassis_speed(30.0, 1e-3));
        CHECK(a.measure_wheel_rate(90.0, t) == b.measure_wheel_rate(90.0, t));
    }
}

TEST_CASE("speed noise spectrum rolls off above the cutoff") {
    NoiseConfig cfg;
    cfg.speed_noise_std = 1.0;
    cfg.speed_lowpass_cutoff = 5.0;
    cfg.seed = 3;
    SensorRig rig(cfg);
    const double dt = 1e-3;
    const int n = 1 << 20;
    std::vector<double> noise(n);
    for (int i = 0; i < n; ++i) noise[i] = rig.measure_chassis_speed(0.0, dt);

    // Goertzel power estimates at two frequencies a decade apart.
    auto band_power = [&](double freq) {
        const std::complex<double> w(0.0, -2.0 * M_PI * freq * dt);
        std::complex<double> acc(0.0, 0.0);
        for (int i = 0; i < n; ++i) acc += noise[i] * std::exp(w * static_cast<double>(i));
        return std::norm(acc) / n;
    };
    const double p_low = band_power(10.0);    // just above cutoff
    const double p_high = band_power(100.0);  // one decade up
    const double rolloff_db = 10.0 * std::log10(p_low / p_high);
    CHECK(rolloff_db >= 15.0);
}

TEST_CASE("lowpass has unity DC gain") {
    // replace the white noise with a constant by driving a zero-cutoff... the
    // filter recursion is checked by feeding a constant through the same pole.
    const double pole = std::exp(-2.0 * M_PI * 5.0 * 1e-3);
    double y = 0.0;
    for (int i = 0; i < 20000; ++i) y = pole * y + (1.0 - pole) * 2.5;
    CHECK(y == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("wheel-rate error amplitude is the scheduled one") {
    NoiseConfig cfg;
    cfg.wheel_noise_offset = 1.0;
    cfg.wheel_noise_speed_gain = 0.02;
    cfg.seed = 5;
    SensorRig rig(cfg);
    const double omega = 100.0;
    const double expected = cfg.wheel_noise_offset + cfg.wheel_noise_speed_gain * omega;
    double peak = 0.0;
    const double period = 2.0 * M_PI / omega;
    for (double t = 0.0; t < period; t += period / 20000.0) {
        peak = std::max(peak, std::abs(rig.measure_wheel_rate(omega, t) - omega));
    }
    CHECK(std::abs(peak - expected) < 1e-9);
    CHECK(rig.measure_wheel_rate(0.0, 3.0) == doctest::Approx(0.0));
}

TEST_CASE("measured slip clamps only on noisy sign flips") {
    NoiseConfig quiet{0.0, 0.0, 5.0, 0.0, 0.0, 1};
    SensorRig rig(quiet);
    // wheel "faster" than chassis by a lot: raw slip would be < -0.2
    CHECK(rig.measured_slip(10.0, 50.0 / 0.33, 0.33) == doctest::Approx(-0.2));
    // mild flip stays unclamped
    CHECK(rig.measured_slip(10.0, 10.5 / 0.33, 0.33) == doctest::Approx((10.0 - 10.5) / 10.5));
}

TEST_CASE("additive accel noise is uncorrelated with the signal") {
    NoiseConfig cfg;
    cfg.accel_noise_std = 0.3;
    cfg.seed = 21;
    SensorRig rig(cfg);
    const int n = 100000;
    double sum_se = 0.0, sum_s = 0.0, sum_e = 0.0, sum_s2 = 0.0, sum_e2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double signal = std::sin(0.001 * i) * 5.0;
        const double err = rig.measure_acceleration(signal) - signal;
        sum_se += signal * err;
        sum_s += signal;
        sum_e += err;
        sum_s2 += signal * signal;
        sum_e2 += err * err;
    }
    const double cov = sum_se / n - (sum_s / n) * (sum_e / n);
    const double corr = cov / std::sqrt((sum_s2 / n - (sum_s / n) * (sum_s / n)) *
                                        (sum_e2 / n - (sum_e / n) * (sum_e / n)));
    CHECK(std::abs(corr) < 0.02);
}

TEST_CASE("snr: zero noise reports infinity, amplitude doubling quarters it") {
    std::vector<double> truth(2000), meas(2000);
    GaussianRng rng(11);
    for (int i = 0; i < 2000; ++i) {
        truth[i] = 0.1 + 0.02 * std::sin(0.01 * i);
        meas[i] = truth[i];
    }
    CHECK(std::isinf(calibrate_snr(truth, meas)));

    std::vector<double> noisy1(2000), noisy2(2000);
    for (int i = 0; i < 2000; ++i) {
        const double e = 0.03 * rng.normal();
        noisy1[i] = truth[i] + e;
        noisy2[i] = truth[i] + 2.0 * e;
    }
    const double snr1 = calibrate_snr(truth, noisy1);
    const double snr2 = calibrate_snr(truth, noisy2);
    CHECK(std::abs(snr1 / snr2 - 4.0) < 0.4);  // x2 amplitude -> /4 power, same realization
    CHECK_THROWS(calibrate_snr(std::vector<double>(10, 0.1), std::vector<double>(10, 0.1)));
    CHECK_THROWS(calibrate_snr(std::vector<double>(2000, 0.0), std::vector<double>(2000, 0.0)));
}
