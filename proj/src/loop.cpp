#include "til/loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "til/csv.hpp"

namespace til {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::vector<ConcentratedMass> default_mass_preset() {
    // Driver and passenger near the seats, two unbalanced trunk loads well
    // forward of the COG (rear-biased sports car, front trunk).
    return {
        {75.0, 0.20, 0.35},   // driver
        {80.0, 0.20, -0.35},  // passenger
        {90.0, 1.30, 0.30},   // trunk, left
        {30.0, 1.30, -0.30},  // trunk, right
    };
}

}  // namespace

double ReferenceProfile::value(double time_since_trigger) const {
    double v = base;
    for (const auto& [offset, val] : steps) {
        if (time_since_trigger >= offset) v = val;
    }
    if (pulse_period > 0.0 && pulse_amplitude != 0.0) {
        const double phase = std::fmod(std::max(0.0, time_since_trigger), pulse_period);
        v += (phase < 0.5 * pulse_period) ? pulse_amplitude : -pulse_amplitude;
    }
    return v;
}

void ReferenceProfile::validate() const {
    auto check = [this](double level) {
        const double lo = level - std::abs(pulse_amplitude);
        const double hi = level + std::abs(pulse_amplitude);
        if (lo <= 0.0 || hi > 0.3) {
            throw std::invalid_argument("scenario: reference values must stay in (0, 0.3]");
        }
    };
    check(base);
    double prev_offset = 0.0;
    for (const auto& [offset, val] : steps) {
        if (offset < prev_offset) throw std::invalid_argument("scenario: reference steps must be sorted");
        prev_offset = offset;
        check(val);
    }
    if (pulse_period < 0.0) throw std::invalid_argument("scenario: pulse_period must be >= 0");
}

void Scenario::validate() const {
    if (initial_speed <= 10.0 / 3.6) {
        throw std::invalid_argument("scenario: initial speed must exceed the deactivation threshold");
    }
    if (brake_trigger_time < 0.0) throw std::invalid_argument("scenario: brake_trigger_time must be >= 0");
    if (duration_cap <= brake_trigger_time) {
        throw std::invalid_argument("scenario: duration_cap must exceed brake_trigger_time");
    }
    if (mu_scale <= 0.0 || cs_scale <= 0.0) throw std::invalid_argument("scenario: tire scalings must be > 0");
    reference.validate();
}

WorldConfig WorldConfig::from_config(const Config& cfg) {
    WorldConfig w;

    VehicleParams& v = w.twin_params;
    v.total_mass = cfg.get_double("vehicle.total_mass", v.total_mass);
    v.wheel_radius_front = cfg.get_double("vehicle.wheel_radius_front", v.wheel_radius_front);
    v.wheel_radius_rear = cfg.get_double("vehicle.wheel_radius_rear", v.wheel_radius_rear);
    v.wheel_inertia_front = cfg.get_double("vehicle.wheel_inertia_front", v.wheel_inertia_front);
    v.wheel_inertia_rear = cfg.get_double("vehicle.wheel_inertia_rear", v.wheel_inertia_rear);
    v.cog_to_front_axle = cfg.get_double("vehicle.cog_to_front_axle", v.cog_to_front_axle);
    v.cog_to_rear_axle = cfg.get_double("vehicle.cog_to_rear_axle", v.cog_to_rear_axle);
    v.wheelbase = cfg.get_double("vehicle.wheelbase", v.wheelbase);
    v.cog_height = cfg.get_double("vehicle.cog_height", v.cog_height);
    v.gravity = cfg.get_double("vehicle.gravity", v.gravity);
    v.air_density = cfg.get_double("vehicle.air_density", v.air_density);
    v.aero_drag_area = cfg.get_double("vehicle.aero_drag_area", v.aero_drag_area);
    v.max_brake_torque_front = cfg.get_double("vehicle.max_brake_torque_front", v.max_brake_torque_front);
    v.max_brake_torque_rear = cfg.get_double("vehicle.max_brake_torque_rear", v.max_brake_torque_rear);
    v.actuator_natural_freq = cfg.get_double("vehicle.actuator_natural_freq", v.actuator_natural_freq);
    v.actuator_damping = cfg.get_double("vehicle.actuator_damping", v.actuator_damping);
    v.actuator_slew_limit = cfg.get_double("vehicle.actuator_slew_limit", v.actuator_slew_limit);
    v.tire.stiffness_b = cfg.get_double("tire.stiffness_b", v.tire.stiffness_b);
    v.tire.shape_c = cfg.get_double("tire.shape_c", v.tire.shape_c);
    v.tire.peak_d = cfg.get_double("tire.peak_d", v.tire.peak_d);
    v.tire.curvature_e = cfg.get_double("tire.curvature_e", v.tire.curvature_e);
    v.tire.load_sensitivity = cfg.get_double("tire.load_sensitivity", v.tire.load_sensitivity);
    v.validate();

    Scenario& s = w.scenario;
    s.initial_speed = cfg.get_double("scenario.initial_speed_kmh", 196.0) / 3.6;
    s.brake_trigger_time = cfg.get_double("scenario.brake_trigger_time", 1.0);
    s.duration_cap = cfg.get_double("scenario.duration_cap", 15.0);
    s.seed = static_cast<std::uint64_t>(cfg.get_int("scenario.seed", 1));
    s.noise_enabled = cfg.get_bool("plant.noise", false);
    s.masses_enabled = cfg.get_bool("plant.masses", false);
    s.mu_scale = cfg.get_double("plant.mu_scale", 1.0);
    s.cs_scale = cfg.get_double("plant.cs_scale", 1.0);
    s.reference.base = cfg.get_double("scenario.ref.base", 0.10);
    s.reference.pulse_amplitude = cfg.get_double("scenario.ref.pulse_amp", 0.0);
    s.reference.pulse_period = cfg.get_double("scenario.ref.pulse_period", 0.0);
    if (cfg.has("scenario.ref.steps")) {
        // "offset:value,offset:value" with offsets from the brake trigger
        std::stringstream ss(cfg.get_string("scenario.ref.steps"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) {
                throw std::runtime_error("scenario.ref.steps: expected offset:value pairs");
            }
            s.reference.steps.emplace_back(std::stod(item.substr(0, colon)),
                                           std::stod(item.substr(colon + 1)));
        }
    }
    if (s.masses_enabled) {
        const int count = cfg.get_int("mass.count", -1);
        if (count < 0) {
            s.masses = default_mass_preset();
        } else {
            for (int i = 1; i <= count; ++i) {
                const std::string p = "mass." + std::to_string(i) + ".";
                ConcentratedMass m;
                m.mass = cfg.get_double(p + "kg");
                m.longitudinal_offset = cfg.get_double(p + "dx", 0.0);
                m.lateral_offset = cfg.get_double(p + "dy", 0.0);
                s.masses.push_back(m);
            }
        }
    }
    s.validate();

    w.plant_params = s.masses_enabled ? apply_mass_config(w.twin_params, s.masses) : w.twin_params;
    w.plant_params.tire.peak_friction_scale = s.mu_scale;
    w.plant_params.tire.shape_factor_scale = s.cs_scale;
    w.plant_params.validate();

    NoiseConfig& n = w.noise;
    if (s.noise_enabled) {
        n.accel_noise_std = cfg.get_double("sensors.accel_noise_std", 0.3);
        n.speed_noise_std = cfg.get_double("sensors.speed_noise_std", 0.9);
        n.speed_lowpass_cutoff = cfg.get_double("sensors.speed_lowpass_cutoff_hz", 5.0);
        n.wheel_noise_offset = cfg.get_double("sensors.wheel_noise_offset", 1.2);
        n.wheel_noise_speed_gain = cfg.get_double("sensors.wheel_noise_speed_gain", 0.012);
    } else {
        n = NoiseConfig{0.0, 0.0, 5.0, 0.0, 0.0, 1};
    }
    n.seed = s.seed;
    n.validate();

    auto load_mpc = [&cfg](MpcConfig& m, const std::string& axle, double torque_max) {
        m.horizon_steps = cfg.get_int("mpc.horizon_steps", 5);
        m.sample_time = cfg.get_double("mpc.sample_time", 0.005);
        m.tracking_weight = cfg.get_double("mpc.tracking_weight", 1.0);
        m.input_rate_weight = cfg.get_double("mpc.input_rate_weight", m.input_rate_weight);
        m.rate_limit = cfg.get_double("mpc.rate_limit", 30000.0);
        m.min_speed = cfg.get_double("mpc.min_speed", 1.0);
        m.torque_max = torque_max;
        m.radius_scale = cfg.get_double("mpc.radius_scale_" + axle, 1.0);
        m.inertia_scale = cfg.get_double("mpc.inertia_scale_" + axle, 1.0);
        m.validate();
    };
    load_mpc(w.mpc_front, "front", v.max_brake_torque_front);
    load_mpc(w.mpc_rear, "rear", v.max_brake_torque_rear);

    CompensatorConfig& c = w.compensator;
    c.kp_nominal_front = cfg.get_double("comp.kp_front", c.kp_nominal_front);
    c.ti_front = cfg.get_double("comp.ti_front", c.ti_front);
    c.kp_nominal_rear = cfg.get_double("comp.kp_rear", c.kp_nominal_rear);
    c.ti_rear = cfg.get_double("comp.ti_rear", c.ti_rear);
    c.schedule_v_lb = cfg.get_double("comp.v_lb", c.schedule_v_lb);
    c.schedule_v_ub = cfg.get_double("comp.v_ub", c.schedule_v_ub);
    c.schedule_kp_lb = cfg.get_double("comp.kp_lb", c.schedule_kp_lb);
    c.continuous_schedule = cfg.get_bool("comp.continuous_schedule", false);
    c.fallback_slip_ref = cfg.get_double("comp.fallback_slip_ref", c.fallback_slip_ref);
    c.sample_rate = cfg.get_double("comp.sample_rate", c.sample_rate);
    c.deactivation_speed = cfg.get_double("comp.deactivation_speed_kmh", 10.0) / 3.6;
    c.tracker_kp = cfg.get_double("comp.tracker_kp", c.tracker_kp);
    c.tracker_ki = cfg.get_double("comp.tracker_ki", c.tracker_ki);
    c.validate();

    w.baseline_use_twin_reference = cfg.get_bool("baseline.use_twin_reference", false);
    w.control_period_steps = cfg.get_int("loop.control_period_steps", 5);
    w.base_dt = cfg.get_double("loop.base_dt", 1e-3);
    if (w.control_period_steps < 1 || w.base_dt <= 0.0) {
        throw std::runtime_error("loop: invalid rate configuration");
    }
    const double ctrl_dt = w.base_dt * w.control_period_steps;
    if (std::abs(ctrl_dt - w.mpc_front.sample_time) > 1e-12) {
        throw std::runtime_error("loop: controller grid must equal mpc.sample_time");
    }
    return w;
}

std::size_t RunLog::activation_index() const {
    if (activation_time < 0.0) return size();
    return static_cast<std::size_t>(std::llround(activation_time / dt));
}

std::size_t RunLog::stop_index() const {
    if (stop_time < 0.0) return size();
    return std::min(size(), static_cast<std::size_t>(std::llround(stop_time / dt)));
}

void RunLog::to_csv(const std::string& path, bool include_timing) const {
    static const char* kWheelNames[kNumWheels] = {"fl", "fr", "rl", "rr"};
    std::vector<std::string> header{"time_s"};
    for (const char* wn : kWheelNames) {
        const std::string w = wn;
        header.push_back("ref_" + w);
        header.push_back("comp_ref_" + w);
        header.push_back("twin_slip_" + w);
        header.push_back("plant_slip_" + w);
        header.push_back("plant_slip_meas_" + w);
        header.push_back("nominal_cmd_Nm_" + w);
        header.push_back("delta_cmd_Nm_" + w);
        header.push_back("total_cmd_Nm_" + w);
        header.push_back("act_torque_Nm_" + w);
        header.push_back("pred_slip_" + w);
    }
    header.insert(header.end(), {"v_twin_mps", "v_plant_mps", "v_plant_meas_mps", "ax_twin_mps2",
                                 "ax_plant_mps2", "ax_plant_meas_mps2", "braking_active", "twin_done",
                                 "comp_mode"});
    if (include_timing) {
        header.push_back("ctrl_compute_s");
        header.push_back("twin_compute_s");
    }
    CsvWriter writer(header);
    for (std::size_t k = 0; k < size(); ++k) {
        std::vector<double> row;
        row.reserve(header.size());
        row.push_back(time[k]);
        for (std::size_t wheel = 0; wheel < kNumWheels; ++wheel) {
            row.push_back(reference[wheel][k]);
            row.push_back(comp_reference[wheel][k]);
            row.push_back(twin_slip[wheel][k]);
            row.push_back(plant_slip[wheel][k]);
            row.push_back(plant_slip_meas[wheel][k]);
            row.push_back(nominal_cmd[wheel][k]);
            row.push_back(delta_cmd[wheel][k]);
            row.push_back(total_cmd[wheel][k]);
            row.push_back(plant_act_torque[wheel][k]);
            row.push_back(predicted_slip[wheel][k]);
        }
        row.insert(row.end(), {twin_speed[k], plant_speed[k], plant_speed_meas[k], twin_accel[k],
                               plant_accel[k], plant_accel_meas[k], braking_active[k], twin_done[k],
                               comp_mode[k]});
        if (include_timing) {
            row.push_back(ctrl_compute_s[k]);
            row.push_back(twin_compute_s[k]);
        }
        writer.add_row(row);
    }
    writer.write(path);
}

std::optional<VehicleState> activate_twin(const PlantMeasurements& meas, const VehicleParams& twin_params) {
    if (!std::isfinite(meas.chassis_speed) || !std::isfinite(meas.longitudinal_accel)) return std::nullopt;
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        if (!std::isfinite(meas.wheel_rates[i]) || !std::isfinite(meas.actuators[i].torque) ||
            !std::isfinite(meas.actuators[i].rate)) {
            return std::nullopt;
        }
    }
    VehicleState twin;
    twin.chassis_speed = std::max(0.0, meas.chassis_speed);
    twin.chassis_position = 0.0;
    twin.longitudinal_accel = meas.longitudinal_accel;
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        twin.wheel_rates[i] = std::max(0.0, meas.wheel_rates[i]);
        twin.actuators[i] = meas.actuators[i];
        twin.last_slips[i] =
            twin.chassis_speed >= 0.5
                ? wheel_slip(twin.chassis_speed, twin.wheel_rates[i], twin_params.wheel_radius(i))
                : 0.0;
    }
    return twin;
}

World::World(const WorldConfig& config) : cfg_(config), rig_(config.noise) {
    cfg_.twin_params.validate();
    cfg_.plant_params.validate();
    cfg_.scenario.validate();

    plant_.chassis_speed = cfg_.scenario.initial_speed;
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        plant_.wheel_rates[i] = plant_.chassis_speed / cfg_.plant_params.wheel_radius(i);
        plant_.last_slips[i] = 0.0;
    }

    for (std::size_t i = 0; i < kNumWheels; ++i) {
        const bool front = is_front(i);
        const MpcConfig& mc = front ? cfg_.mpc_front : cfg_.mpc_rear;
        mpc_[i] = SlipMpc(cfg_.twin_params.wheel_radius(i), cfg_.twin_params.wheel_inertia(i),
                          cfg_.twin_params.actuator_natural_freq, cfg_.twin_params.actuator_damping, mc);
        mpc_plant_[i] = mpc_[i];
        comp_[i] = TilCompensator(cfg_.compensator, front, cfg_.twin_params.max_brake_torque(i));
    }
    log_.dt = cfg_.base_dt;
    log_.control_period_steps = cfg_.control_period_steps;
}

bool World::finished() const {
    return diverged_ || log_.stop_time >= 0.0 || time_ >= cfg_.scenario.duration_cap - 1e-12;
}

std::vector<double> World::reference_preview(double now) const {
    const double since = now - cfg_.scenario.brake_trigger_time;
    const double ts = cfg_.mpc_front.sample_time;
    std::vector<double> out(static_cast<std::size_t>(cfg_.mpc_front.horizon_steps) + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = cfg_.scenario.reference.value(since + static_cast<double>(k) * ts);
    }
    return out;
}

void World::run_controllers() {
    const bool til = cfg_.controller == ControllerKind::TIL;
    const bool ablation = !til && cfg_.baseline_use_twin_reference;
    const std::vector<double> preview = reference_preview(time_);

    // Nominal loop: MPC with full state access on the twin.
    if ((til || ablation) && !twin_done_) {
        for (std::size_t i = 0; i < kNumWheels; ++i) {
            MpcMeasurement m;
            m.slip = twin_.wheel_slip_of(i, cfg_.twin_params);
            m.chassis_speed = twin_.chassis_speed;
            m.longitudinal_accel = twin_.longitudinal_accel;
            m.actuated_torque = twin_.actuators[i].torque;
            m.torque_rate = twin_.actuators[i].rate;
            const MpcCommand cmd = mpc_[i].step(m, preview);
            twin_cmd_[i] = cmd.torque;
            if (til) predicted_tip_[i] = cmd.predicted_tip_slip;
        }
    } else if (til || ablation) {
        twin_cmd_.fill(0.0);
    }

    if (til) {
        for (std::size_t i = 0; i < kNumWheels; ++i) {
            nominal_cmd_[i] = twin_cmd_[i];
            const double twin_slip = twin_.wheel_slip_of(i, cfg_.twin_params);
            delta_cmd_[i] = comp_[i].step(twin_slip, meas_slip_[i], meas_speed_, twin_done_, nominal_cmd_[i]);
            total_cmd_[i] = std::clamp(nominal_cmd_[i] + delta_cmd_[i], 0.0,
                                       cfg_.twin_params.max_brake_torque(i));
        }
        return;
    }

    // Baseline: the MPC consumes plant measurements directly. In the ablation
    // variant its reference is the twin's ideal slip instead of the setpoint.
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        MpcMeasurement m;
        m.slip = meas_slip_[i];
        m.chassis_speed = meas_speed_;
        m.longitudinal_accel = meas_accel_;
        m.actuated_torque = plant_.actuators[i].torque;
        m.torque_rate = plant_.actuators[i].rate;
        std::vector<double> ref = preview;
        if (ablation) ref.assign(preview.size(), twin_.wheel_slip_of(i, cfg_.twin_params));
        const MpcCommand cmd = mpc_plant_[i].step(m, ref);
        nominal_cmd_[i] = cmd.torque;
        predicted_tip_[i] = cmd.predicted_tip_slip;
        delta_cmd_[i] = 0.0;
        total_cmd_[i] = cmd.torque;
    }
}

void World::log_step(double ctrl_seconds, double twin_seconds) {
    const double since = time_ - cfg_.scenario.brake_trigger_time;
    log_.time.push_back(time_);
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        log_.reference[i].push_back(braking_active_ ? cfg_.scenario.reference.value(since) : 0.0);
        double comp_ref = 0.0;
        if (cfg_.controller == ControllerKind::TIL) {
            comp_ref = comp_[i].effective_reference();
        } else {
            comp_ref = log_.reference[i].back();
        }
        log_.comp_reference[i].push_back(comp_ref);
        log_.twin_slip[i].push_back(twin_active_ ? twin_.wheel_slip_of(i, cfg_.twin_params) : 0.0);
        log_.plant_slip[i].push_back(plant_.wheel_slip_of(i, cfg_.plant_params));
        log_.plant_slip_meas[i].push_back(meas_slip_[i]);
        log_.nominal_cmd[i].push_back(nominal_cmd_[i]);
        log_.delta_cmd[i].push_back(delta_cmd_[i]);
        log_.total_cmd[i].push_back(total_cmd_[i]);
        log_.plant_act_torque[i].push_back(plant_.actuators[i].torque);
        log_.predicted_slip[i].push_back(predicted_tip_[i]);
    }
    log_.twin_speed.push_back(twin_active_ ? twin_.chassis_speed : 0.0);
    log_.plant_speed.push_back(plant_.chassis_speed);
    log_.plant_speed_meas.push_back(meas_speed_);
    log_.twin_accel.push_back(twin_active_ ? twin_.longitudinal_accel : 0.0);
    log_.plant_accel.push_back(plant_.longitudinal_accel);
    log_.plant_accel_meas.push_back(meas_accel_);
    log_.braking_active.push_back(braking_active_ ? 1.0 : 0.0);
    log_.twin_done.push_back(twin_done_ ? 1.0 : 0.0);
    double mode = -1.0;
    if (cfg_.controller == ControllerKind::TIL) {
        mode = static_cast<double>(static_cast<int>(comp_[0].mode()));
    }
    log_.comp_mode.push_back(mode);
    log_.ctrl_compute_s.push_back(ctrl_seconds);
    log_.twin_compute_s.push_back(twin_seconds);
}

bool World::step() {
    if (finished()) return true;
    const double dt = cfg_.base_dt;

    // Measurements of the plant state at the top of the step.
    meas_speed_ = rig_.measure_chassis_speed(plant_.chassis_speed, dt);
    meas_accel_ = rig_.measure_acceleration(plant_.longitudinal_accel);
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        meas_wheel_rates_[i] = rig_.measure_wheel_rate(plant_.wheel_rates[i], time_);
        meas_slip_[i] =
            rig_.measured_slip(meas_speed_, meas_wheel_rates_[i], cfg_.plant_params.wheel_radius(i));
    }

    if (!braking_active_ && time_ >= cfg_.scenario.brake_trigger_time - 1e-12) {
        braking_active_ = true;
        log_.activation_time = time_;
        PlantMeasurements pm;
        pm.chassis_speed = meas_speed_;
        pm.longitudinal_accel = meas_accel_;
        pm.wheel_rates = meas_wheel_rates_;
        pm.actuators = plant_.actuators;  // torque is fully known
        const bool needs_twin =
            cfg_.controller == ControllerKind::TIL || cfg_.baseline_use_twin_reference;
        if (needs_twin) {
            const auto twin = activate_twin(pm, cfg_.twin_params);
            if (!twin.has_value()) {
                diverged_ = true;
                return false;
            }
            twin_ = *twin;
            twin_active_ = true;
            for (std::size_t i = 0; i < kNumWheels; ++i) {
                MpcMeasurement m;
                m.slip = twin_.wheel_slip_of(i, cfg_.twin_params);
                m.chassis_speed = twin_.chassis_speed;
                m.longitudinal_accel = twin_.longitudinal_accel;
                m.actuated_torque = twin_.actuators[i].torque;
                m.torque_rate = twin_.actuators[i].rate;
                mpc_[i].reset(m, 0.0);
                comp_[i].reset();
            }
        }
        if (cfg_.controller == ControllerKind::MPC_BASELINE) {
            for (std::size_t i = 0; i < kNumWheels; ++i) {
                MpcMeasurement m;
                m.slip = meas_slip_[i];
                m.chassis_speed = meas_speed_;
                m.longitudinal_accel = meas_accel_;
                m.actuated_torque = plant_.actuators[i].torque;
                m.torque_rate = plant_.actuators[i].rate;
                mpc_plant_[i].reset(m, 0.0);
            }
        }
    }

    double ctrl_seconds = 0.0;
    if (braking_active_ && (step_index_ % static_cast<std::size_t>(cfg_.control_period_steps) == 0)) {
        const double t0 = now_seconds();
        run_controllers();
        ctrl_seconds = now_seconds() - t0;
    }

    log_step(ctrl_seconds, 0.0);

    double twin_seconds = 0.0;
    if (twin_active_ && !twin_done_) {
        const double t0 = now_seconds();
        const StepResult r = step_vehicle(twin_, twin_cmd_, DriverInput{}, cfg_.twin_params, dt);
        twin_seconds = now_seconds() - t0;
        if (!r.valid) {
            diverged_ = true;
            return false;
        }
        twin_ = r.state;
    }
    log_.twin_compute_s.back() = twin_seconds;

    const StepResult pr = step_vehicle(plant_, total_cmd_, DriverInput{}, cfg_.plant_params, dt);
    if (!pr.valid) {
        diverged_ = true;
        return false;
    }
    plant_ = pr.state;

    time_ += dt;
    ++step_index_;

    if (twin_active_ && !twin_done_ && twin_.chassis_speed < cfg_.compensator.deactivation_speed) {
        twin_done_ = true;  // twin maneuver over: nominal command collapses
        twin_cmd_.fill(0.0);
        nominal_cmd_.fill(0.0);
    }
    if (braking_active_ && log_.stop_time < 0.0 &&
        plant_.chassis_speed < cfg_.compensator.deactivation_speed) {
        log_.stop_time = time_;
        log_.complete = true;
    }
    return true;
}

RunLog World::take_log() { return std::move(log_); }

RunLog run_experiment(const WorldConfig& config) {
    World world(config);
    while (!world.finished()) {
        if (!world.step()) break;
    }
    return world.take_log();
}

}  // namespace til
