#include "til/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace til {

namespace {

constexpr double kStandstillSpeed = 0.5;  // m/s, slip frozen below this

bool all_finite(const VehicleState& s) {
    if (!std::isfinite(s.chassis_speed) || !std::isfinite(s.chassis_position) ||
        !std::isfinite(s.longitudinal_accel)) {
        return false;
    }
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        if (!std::isfinite(s.wheel_rates[i]) || !std::isfinite(s.actuators[i].torque) ||
            !std::isfinite(s.actuators[i].rate)) {
            return false;
        }
    }
    return true;
}

}  // namespace

void TireParams::validate() const {
    if (peak_friction_scale <= 0.0) throw std::invalid_argument("tire: peak_friction_scale must be > 0");
    if (shape_factor_scale <= 0.0) throw std::invalid_argument("tire: shape_factor_scale must be > 0");
    const double peak = peak_d * peak_friction_scale;
    if (peak <= 0.0 || peak > 2.0) throw std::invalid_argument("tire: D*mu_s must lie in (0, 2]");
    if (stiffness_b <= 0.0 || shape_c <= 0.0) throw std::invalid_argument("tire: B and C must be > 0");
    if (load_sensitivity < 0.0) throw std::invalid_argument("tire: load_sensitivity must be >= 0");
    // Single interior force maximum for slip in (0,1) under nominal scalings.
    TireParams nominal = *this;
    nominal.peak_friction_scale = 1.0;
    nominal.shape_factor_scale = 1.0;
    const double s_peak = pacejka_peak_slip(0.0, nominal);
    if (!(s_peak > 0.0 && s_peak < 1.0)) {
        throw std::invalid_argument("tire: force-vs-slip curve has no interior maximum in (0,1)");
    }
}

void VehicleParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string("vehicle: ") + name + " must be > 0");
    };
    positive(total_mass, "total_mass");
    positive(wheel_radius_front, "wheel_radius_front");
    positive(wheel_radius_rear, "wheel_radius_rear");
    positive(wheel_inertia_front, "wheel_inertia_front");
    positive(wheel_inertia_rear, "wheel_inertia_rear");
    positive(cog_to_front_axle, "cog_to_front_axle");
    positive(cog_to_rear_axle, "cog_to_rear_axle");
    positive(cog_height, "cog_height");
    positive(gravity, "gravity");
    positive(max_brake_torque_front, "max_brake_torque_front");
    positive(max_brake_torque_rear, "max_brake_torque_rear");
    positive(actuator_natural_freq, "actuator_natural_freq");
    positive(actuator_damping, "actuator_damping");
    positive(actuator_slew_limit, "actuator_slew_limit");
    if (aero_drag_area < 0.0) throw std::invalid_argument("vehicle: aero_drag_area must be >= 0");
    const double span = cog_to_front_axle + cog_to_rear_axle;
    if (std::abs(span - wheelbase) > 1e-9 * wheelbase) {
        throw std::invalid_argument("vehicle: cog_to_front_axle + cog_to_rear_axle must equal wheelbase");
    }
    tire.validate();
}

double wheel_slip(double chassis_point_speed, double wheel_rate, double radius) {
    const double circumferential = wheel_rate * radius;
    const double denom = std::max(chassis_point_speed, circumferential);
    if (denom <= 0.0) {
        throw std::domain_error("wheel_slip: both chassis and wheel speeds are zero");
    }
    return (chassis_point_speed - circumferential) / denom;
}

double pacejka_fx(double slip, double vertical_load, const TireParams& tire) {
    const double derate = std::max(0.0, 1.0 - tire.load_sensitivity * vertical_load);
    const double peak = tire.peak_d * derate * tire.peak_friction_scale;
    const double shape = tire.shape_c * tire.shape_factor_scale;
    const double bs = tire.stiffness_b * slip;
    const double arg = bs - tire.curvature_e * (bs - std::atan(bs));
    return vertical_load * peak * std::sin(shape * std::atan(arg));
}

double pacejka_peak_slip(double vertical_load, const TireParams& tire) {
    (void)vertical_load;  // derating scales the curve, peak location is load-free
    const double shape = tire.shape_c * tire.shape_factor_scale;
    if (shape <= 1.0) return 1.0;  // monotone on [0,1], peak at the boundary
    // Peak where C_eff * atan(phi(s)) = pi/2 with monotone
    // phi(s) = (1-E) B s + E atan(B s).
    const double target = std::tan(M_PI / (2.0 * shape));
    auto phi = [&tire](double s) {
        const double bs = tire.stiffness_b * s;
        return (1.0 - tire.curvature_e) * bs + tire.curvature_e * std::atan(bs);
    };
    double lo = 0.0, hi = 1.0;
    if (phi(hi) < target) return 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

VehicleParams apply_mass_config(const VehicleParams& base, const std::vector<ConcentratedMass>& masses) {
    VehicleParams out = base;
    double added = 0.0;
    double moment = 0.0;  // about the base COG, positive forward
    for (const auto& m : masses) {
        if (m.mass < 0.0) throw std::invalid_argument("apply_mass_config: mass must be >= 0");
        added += m.mass;
        moment += m.mass * m.longitudinal_offset;
    }
    if (added == 0.0) return out;
    const double new_mass = base.total_mass + added;
    const double cog_shift = moment / new_mass;  // forward positive
    const double new_lf = base.cog_to_front_axle - cog_shift;
    const double new_lr = base.wheelbase - new_lf;
    if (new_lf <= 0.0 || new_lr <= 0.0) {
        throw std::invalid_argument("apply_mass_config: COG would leave the wheelbase");
    }
    out.total_mass = new_mass;
    out.cog_to_front_axle = new_lf;
    out.cog_to_rear_axle = new_lr;
    return out;
}

WheelLoads vertical_loads(const VehicleParams& params, double longitudinal_accel) {
    const double wb = params.wheelbase;
    const double weight = params.total_mass * params.gravity;
    const double transfer = params.total_mass * longitudinal_accel * params.cog_height / wb;
    const double front_axle = weight * params.cog_to_rear_axle / wb - transfer;
    const double rear_axle = weight * params.cog_to_front_axle / wb + transfer;
    WheelLoads loads;
    const double fw = 0.5 * front_axle;
    const double rw = 0.5 * rear_axle;
    loads.newton = {fw, fw, rw, rw};
    for (auto& n : loads.newton) {
        if (n < 0.0) {
            n = 0.0;
            loads.clamped = true;
        }
    }
    return loads;
}

ActuatorState actuator_step(const ActuatorState& state, double commanded_torque, double max_torque,
                            const VehicleParams& params, double dt) {
    const double u = std::clamp(commanded_torque, 0.0, max_torque);
    const double wn = params.actuator_natural_freq;
    const double zeta = params.actuator_damping;
    const double sigma = zeta * wn;
    const double wd = wn * std::sqrt(std::max(1e-12, 1.0 - zeta * zeta));
    // Exact ZOH of x' = A x + B u with A = [[0,1],[-wn^2,-2 zeta wn]], B = [0, wn^2]
    // (underdamped closed form; Bd = A^{-1} (Ad - I) B).
    const double e = std::exp(-sigma * dt);
    const double c = std::cos(wd * dt);
    const double s = std::sin(wd * dt);
    const double a11 = e * (c + sigma / wd * s);
    const double a12 = e * (s / wd);
    const double a21 = -e * (wn * wn / wd) * s;
    const double a22 = e * (c - sigma / wd * s);
    // (Ad - I) B = [a12 wn^2, (a22 - 1) wn^2]; A^{-1} = [[-2 sigma, -1],[wn^2, 0]] / wn^2
    const double v1 = a12 * wn * wn;
    const double v2 = (a22 - 1.0) * wn * wn;
    const double bd_1 = (-2.0 * sigma * v1 - v2) / (wn * wn);
    const double bd_2 = v1;

    ActuatorState next;
    next.torque = a11 * state.torque + a12 * state.rate + bd_1 * u;
    next.rate = a21 * state.torque + a22 * state.rate + bd_2 * u;

    const double max_delta = params.actuator_slew_limit * dt;
    const double delta = next.torque - state.torque;
    if (delta > max_delta) {
        next.torque = state.torque + max_delta;
        next.rate = std::min(next.rate, params.actuator_slew_limit);
    } else if (delta < -max_delta) {
        next.torque = state.torque - max_delta;
        next.rate = std::max(next.rate, -params.actuator_slew_limit);
    }
    if (next.torque <= 0.0) {
        next.torque = 0.0;
        if (next.rate < 0.0) next.rate = 0.0;
    } else if (next.torque >= max_torque) {
        next.torque = max_torque;
        if (next.rate > 0.0) next.rate = 0.0;
    }
    return next;
}

double VehicleState::wheel_slip_of(std::size_t wheel, const VehicleParams& params) const {
    if (chassis_speed < kStandstillSpeed) return last_slips[wheel];
    return wheel_slip(chassis_speed, wheel_rates[wheel], params.wheel_radius(wheel));
}

namespace {

struct ChassisWheels {
    double v;
    std::array<double, kNumWheels> omega;
};

ChassisWheels dynamics(const ChassisWheels& y, const std::array<double, kNumWheels>& act_torque,
                       const WheelLoads& loads, const std::array<double, kNumWheels>& frozen_slips,
                       const VehicleParams& params) {
    ChassisWheels dy{};
    double total_braking = 0.0;
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        const double omega = std::max(0.0, y.omega[i]);
        const double radius = params.wheel_radius(i);
        double slip;
        if (y.v < kStandstillSpeed) {
            slip = frozen_slips[i];
        } else {
            slip = wheel_slip(y.v, omega, radius);
        }
        const double fx = pacejka_fx(slip, loads.newton[i], params.tire);
        total_braking += fx;
        double omega_dot = (fx * radius - act_torque[i]) / params.wheel_inertia(i);
        if (omega <= 0.0 && omega_dot < 0.0) omega_dot = 0.0;  // no reverse spin
        dy.omega[i] = omega_dot;
    }
    const double drag = 0.5 * params.air_density * params.aero_drag_area * y.v * std::abs(y.v);
    dy.v = (-total_braking - drag) / params.total_mass;
    if (y.v <= 0.0 && dy.v < 0.0) dy.v = 0.0;
    return dy;
}

}  // namespace

StepResult step_vehicle(const VehicleState& state, const std::array<double, kNumWheels>& torque_commands,
                        const DriverInput& driver, const VehicleParams& params, double dt) {
    (void)driver;  // coast assumption: throttle/steer are zero in braking scenarios
    StepResult result{state, true};
    VehicleState& next = result.state;

    std::array<double, kNumWheels> act_torque{};
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        const ActuatorState advanced =
            actuator_step(state.actuators[i], torque_commands[i], params.max_brake_torque(i), params, dt);
        // Trapezoidal torque over the step keeps the actuator/wheel coupling second order.
        act_torque[i] = 0.5 * (state.actuators[i].torque + advanced.torque);
        next.actuators[i] = advanced;
    }

    const WheelLoads loads = vertical_loads(params, state.longitudinal_accel);

    ChassisWheels y{state.chassis_speed, state.wheel_rates};
    auto deriv = [&](const ChassisWheels& yy) {
        return dynamics(yy, act_torque, loads, state.last_slips, params);
    };
    auto axpy = [](const ChassisWheels& y0, double a, const ChassisWheels& k) {
        ChassisWheels out;
        out.v = y0.v + a * k.v;
        for (std::size_t i = 0; i < kNumWheels; ++i) out.omega[i] = y0.omega[i] + a * k.omega[i];
        return out;
    };
    const ChassisWheels k1 = deriv(y);
    const ChassisWheels k2 = deriv(axpy(y, 0.5 * dt, k1));
    const ChassisWheels k3 = deriv(axpy(y, 0.5 * dt, k2));
    const ChassisWheels k4 = deriv(axpy(y, dt, k3));

    next.chassis_speed = y.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        next.wheel_rates[i] =
            y.omega[i] + dt / 6.0 * (k1.omega[i] + 2.0 * k2.omega[i] + 2.0 * k3.omega[i] + k4.omega[i]);
        next.wheel_rates[i] = std::max(0.0, next.wheel_rates[i]);
    }
    next.chassis_speed = std::max(0.0, next.chassis_speed);
    next.chassis_position = state.chassis_position + 0.5 * dt * (state.chassis_speed + next.chassis_speed);

    // Accel output and frozen-slip memory from the end-of-step state.
    ChassisWheels y_end{next.chassis_speed, next.wheel_rates};
    std::array<double, kNumWheels> end_torque{};
    for (std::size_t i = 0; i < kNumWheels; ++i) end_torque[i] = next.actuators[i].torque;
    const ChassisWheels dy_end = dynamics(y_end, end_torque, loads, state.last_slips, params);
    next.longitudinal_accel = dy_end.v;
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        if (next.chassis_speed >= kStandstillSpeed) {
            next.last_slips[i] =
                wheel_slip(next.chassis_speed, next.wheel_rates[i], params.wheel_radius(i));
        } else {
            next.last_slips[i] = state.last_slips[i];
        }
    }

    if (!all_finite(next)) {
        return {state, false};
    }
    return result;
}

}  // namespace til
