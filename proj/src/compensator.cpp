#include "til/compensator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace til {

void CompensatorConfig::validate() const {
    if (kp_nominal_front <= 0.0 || kp_nominal_rear <= 0.0) {
        throw std::invalid_argument("compensator: kp values must be > 0");
    }
    if (ti_front <= 0.0 || ti_rear <= 0.0) {
        throw std::invalid_argument("compensator: Ti values must be > 0");
    }
    if (!(schedule_v_lb < schedule_v_ub)) {
        throw std::invalid_argument("compensator: schedule requires v_lb < v_ub");
    }
    if (schedule_kp_lb < 0.0 || schedule_kp_lb > 1.0) {
        throw std::invalid_argument("compensator: kp_lb must lie in [0, 1]");
    }
    if (sample_rate <= 0.0) throw std::invalid_argument("compensator: sample_rate must be > 0");
    if (deactivation_speed <= 0.0) throw std::invalid_argument("compensator: deactivation_speed must be > 0");
    if (fallback_slip_ref <= 0.0 || fallback_slip_ref > 0.3) {
        throw std::invalid_argument("compensator: fallback_slip_ref must lie in (0, 0.3]");
    }
}

double scheduled_gain(const CompensatorConfig& config, double kp_nominal, double chassis_speed) {
    const double v = chassis_speed;
    if (v >= config.schedule_v_ub) return kp_nominal;
    if (v < config.schedule_v_lb) return kp_nominal * config.schedule_kp_lb;
    const double ramp = (v - config.schedule_v_lb) / (config.schedule_v_ub - config.schedule_v_lb);
    if (config.continuous_schedule) {
        return kp_nominal * (config.schedule_kp_lb + (1.0 - config.schedule_kp_lb) * ramp);
    }
    return kp_nominal * (config.schedule_kp_lb + ramp);
}

double pi_step(CompensatorState& state, const CompensatorConfig& config, double kp_nominal, double ti,
               double error, double chassis_speed, double dt, double lo, double hi) {
    const double kp = scheduled_gain(config, kp_nominal, chassis_speed);
    // Trapezoidal (Tustin) integral plus the de-saturation drive; Tt = Ti.
    state.integrator += kp * dt / (2.0 * ti) * (error + state.previous_error) +
                        (dt / ti) * state.saturation_excess;
    const double raw = kp * error + state.integrator;
    const double out = std::clamp(raw, lo, hi);
    state.saturation_excess = out - raw;
    state.previous_error = error;
    return out;
}

SwitchingDecision switching_step(CompensatorState& state, const CompensatorConfig& config,
                                 double twin_slip_ref, bool twin_done, double chassis_speed,
                                 double nominal_torque, double total_torque_prev) {
    (void)nominal_torque;
    SwitchingDecision decision;
    if (state.mode == CompensatorMode::OFF || chassis_speed < config.deactivation_speed) {
        state.mode = CompensatorMode::OFF;
        decision.mode = CompensatorMode::OFF;
        decision.effective_reference = 0.0;
        return decision;
    }
    if (state.mode == CompensatorMode::TRACK_TWIN && twin_done) {
        // Soft insertion: the constant-reference loop takes over from the
        // last total torque.
        state.mode = CompensatorMode::HOLD_TOTAL_TORQUE;
        state.pending_bumpless = true;
        state.bumpless_total = total_torque_prev;
    }
    if (state.mode == CompensatorMode::HOLD_TOTAL_TORQUE) {
        decision.mode = CompensatorMode::HOLD_TOTAL_TORQUE;
        decision.effective_reference = config.fallback_slip_ref;
        return decision;
    }
    decision.mode = CompensatorMode::TRACK_TWIN;
    decision.effective_reference = twin_slip_ref;
    return decision;
}

TilCompensator::TilCompensator(const CompensatorConfig& config, bool front_axle, double torque_limit)
    : config_(config), front_axle_(front_axle), torque_limit_(torque_limit) {
    config_.validate();
    if (torque_limit <= 0.0) throw std::invalid_argument("compensator: torque_limit must be > 0");
}

void TilCompensator::reset() { state_ = CompensatorState{}; }

double TilCompensator::step(double twin_slip, double measured_slip, double chassis_speed, bool twin_done,
                            double nominal_torque) {
    const double dt = 1.0 / config_.sample_rate;
    state_.time += dt;

    const SwitchingDecision decision = switching_step(state_, config_, twin_slip, twin_done, chassis_speed,
                                                      nominal_torque, state_.tracker_output);
    last_reference_ = decision.effective_reference;
    if (decision.mode == CompensatorMode::OFF) return 0.0;

    const double error = decision.effective_reference - measured_slip;
    if (!std::isfinite(error)) {
        state_.mode = CompensatorMode::OFF;  // latch on faulted inputs
        return 0.0;
    }

    const double kp_nominal = front_axle_ ? config_.kp_nominal_front : config_.kp_nominal_rear;
    const double ti = front_axle_ ? config_.ti_front : config_.ti_rear;

    // Keep the total command inside the brake envelope.
    const double lo = -nominal_torque;
    const double hi = torque_limit_ - nominal_torque;

    if (state_.pending_bumpless) {
        const double kp = scheduled_gain(config_, kp_nominal, chassis_speed);
        state_.integrator = (state_.bumpless_total - nominal_torque) - kp * error;
        state_.previous_error = error;
        state_.saturation_excess = 0.0;
        state_.pending_bumpless = false;
    }

    const double correction = pi_step(state_, config_, kp_nominal, ti, error, chassis_speed, dt, lo, hi);

    if (decision.mode == CompensatorMode::TRACK_TWIN) {
        // Second controller of the switching loop: PI on torque error keeps
        // its output on the commanded total, ready to seed the hold branch.
        const double total = nominal_torque + correction;
        const double e_t = total - state_.tracker_output;
        state_.tracker_integrator += config_.tracker_ki * dt * e_t;
        state_.tracker_output = state_.tracker_integrator + config_.tracker_kp * e_t;
    } else {
        state_.tracker_output = nominal_torque + correction;
        state_.tracker_integrator = state_.tracker_output;
    }
    return correction;
}

}  // namespace til
