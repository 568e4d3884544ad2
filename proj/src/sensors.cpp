#include "til/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace til {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

GaussianRng::GaussianRng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t GaussianRng::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double GaussianRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double GaussianRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
}

void NoiseConfig::validate() const {
    if (accel_noise_std < 0.0 || speed_noise_std < 0.0 || wheel_noise_offset < 0.0 ||
        wheel_noise_speed_gain < 0.0) {
        throw std::invalid_argument("sensors: noise magnitudes must be >= 0");
    }
    if (speed_lowpass_cutoff <= 0.0) {
        throw std::invalid_argument("sensors: speed_lowpass_cutoff must be > 0");
    }
}

bool NoiseConfig::silent() const {
    return accel_noise_std == 0.0 && speed_noise_std == 0.0 && wheel_noise_offset == 0.0 &&
           wheel_noise_speed_gain == 0.0;
}

SensorRig::SensorRig(const NoiseConfig& config) : config_(config), rng_(config.seed) {
    config_.validate();
}

double SensorRig::measure_acceleration(double true_accel) {
    if (config_.accel_noise_std == 0.0) return true_accel;
    return true_accel + config_.accel_noise_std * rng_.normal();
}

double SensorRig::measure_chassis_speed(double true_speed, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("measure_chassis_speed: dt must be > 0");
    const double white = config_.speed_noise_std == 0.0 ? 0.0 : config_.speed_noise_std * rng_.normal();
    const double pole = std::exp(-2.0 * M_PI * config_.speed_lowpass_cutoff * dt);
    lowpass_state_ = pole * lowpass_state_ + (1.0 - pole) * white;
    return true_speed + lowpass_state_;
}

double SensorRig::measure_wheel_rate(double true_rate, double time) const {
    const double amplitude = config_.wheel_noise_offset + config_.wheel_noise_speed_gain * true_rate;
    return true_rate + amplitude * std::sin(true_rate * time);
}

double SensorRig::measured_slip(double measured_speed, double measured_rate, double radius) const {
    const double circumferential = measured_rate * radius;
    const double denom = std::max(measured_speed, circumferential);
    if (denom <= 0.0) {
        throw std::domain_error("measured_slip: both measured speeds are zero");
    }
    const double slip = (measured_speed - circumferential) / denom;
    return std::clamp(slip, -0.2, 1.0);
}

double calibrate_snr(const std::vector<double>& true_slip, const std::vector<double>& measured_slip) {
    if (true_slip.size() != measured_slip.size() || true_slip.size() < 1000) {
        throw std::invalid_argument("calibrate_snr: need >= 1000 paired samples");
    }
    double signal_power = 0.0;
    double error_power = 0.0;
    for (std::size_t i = 0; i < true_slip.size(); ++i) {
        signal_power += true_slip[i] * true_slip[i];
        const double e = measured_slip[i] - true_slip[i];
        error_power += e * e;
    }
    if (signal_power <= 0.0) throw std::invalid_argument("calibrate_snr: zero-power slip signal");
    if (error_power == 0.0) return std::numeric_limits<double>::infinity();
    return signal_power / error_power;
}

}  // namespace til
