#ifndef TIL_SENSORS_HPP
#define TIL_SENSORS_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace til {

// Gaussian generator with explicit state so rigs are plain copyable values and
// a (seed, call sequence) pair fully determines the output stream.
class GaussianRng {
  public:
    explicit GaussianRng(std::uint64_t seed = 0);
    double normal();          // N(0,1), Box-Muller on the raw stream
    double uniform();         // [0,1)
    std::uint64_t next_u64();

  private:
    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct NoiseConfig {
    double accel_noise_std = 0.3;        // m/s^2 (sigma_a)
    double speed_noise_std = 0.0;        // m/s   (sigma_vx, white noise into the low-pass)
    double speed_lowpass_cutoff = 5.0;   // Hz
    double wheel_noise_offset = 0.0;     // rad/s (omega^n_0)
    double wheel_noise_speed_gain = 0.0; // k_omega
    std::uint64_t seed = 1;

    void validate() const;
    bool silent() const;  // every parameter zero -> measurements are the identity
};

// Produces measured signals from true plant states. One rig per vehicle
// instance; a rig is a value, copy it to fork a reproducible stream.
class SensorRig {
  public:
    SensorRig() = default;
    explicit SensorRig(const NoiseConfig& config);

    const NoiseConfig& config() const { return config_; }

    // a^n = a + n_a, n_a ~ N(0, sigma_a^2)
    double measure_acceleration(double true_accel);

    // v^n = v + lowpass(white noise), first-order filter at the configured cutoff
    double measure_chassis_speed(double true_speed, double dt);

    // omega^n = omega + A sin(omega t), A = omega^n_0 + k_omega * omega
    double measure_wheel_rate(double true_rate, double time) const;

    // Slip from the noisy inputs, clamped to [-0.2, 1].
    double measured_slip(double measured_speed, double measured_rate, double radius) const;

  private:
    NoiseConfig config_;
    GaussianRng rng_{1};
    double lowpass_state_ = 0.0;
};

// Power ratio of the true slip signal to the slip measurement error.
// Returns +inf for a zero-error log; throws std::invalid_argument on fewer
// than 1000 samples or a zero-power signal.
double calibrate_snr(const std::vector<double>& true_slip, const std::vector<double>& measured_slip);

// Scales (speed_noise_std, wheel_noise_offset, wheel_noise_speed_gain) by a
// common factor until the log replayed through a fresh rig lands at the
// target SNR. replay must map a candidate config to a measured SNR.
struct SnrCalibrationResult {
    NoiseConfig config;
    double achieved_snr = 0.0;
    int iterations = 0;
};

template <typename ReplayFn>
SnrCalibrationResult calibrate_noise_to_snr(const NoiseConfig& start, double target_snr, ReplayFn&& replay,
                                            int max_iterations = 12) {
    SnrCalibrationResult result;
    result.config = start;
    double scale = 1.0;
    for (int it = 0; it < max_iterations; ++it) {
        NoiseConfig candidate = start;
        candidate.speed_noise_std = start.speed_noise_std * scale;
        candidate.wheel_noise_offset = start.wheel_noise_offset * scale;
        candidate.wheel_noise_speed_gain = start.wheel_noise_speed_gain * scale;
        const double snr = replay(candidate);
        result.config = candidate;
        result.achieved_snr = snr;
        result.iterations = it + 1;
        if (snr > 0.95 * target_snr && snr < 1.05 * target_snr) break;
        // SNR scales ~ 1/scale^2, so move along sqrt of the ratio.
        scale *= std::sqrt(snr / target_snr);
    }
    return result;
}

}  // namespace til

#endif
