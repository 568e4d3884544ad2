#ifndef TIL_LOOP_HPP
#define TIL_LOOP_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "til/compensator.hpp"
#include "til/config.hpp"
#include "til/mpc.hpp"
#include "til/sensors.hpp"
#include "til/vehicle.hpp"

namespace til {

// Piecewise-constant slip reference with an optional superimposed pulse wave
// (the training maneuver excitation). Times are offsets from the brake trigger.
struct ReferenceProfile {
    double base = 0.10;
    std::vector<std::pair<double, double>> steps;  // (offset s, value), sorted
    double pulse_amplitude = 0.0;
    double pulse_period = 0.0;  // 0 disables the pulse train

    double value(double time_since_trigger) const;
    void validate() const;
};

struct Scenario {
    double initial_speed = 196.0 / 3.6;  // m/s
    double brake_trigger_time = 1.0;     // s
    ReferenceProfile reference;
    bool noise_enabled = false;
    bool masses_enabled = false;
    double mu_scale = 1.0;  // plant peak-friction scaling
    double cs_scale = 1.0;  // plant shape-factor scaling
    std::vector<ConcentratedMass> masses;
    double duration_cap = 15.0;  // s
    std::uint64_t seed = 1;

    void validate() const;
};

enum class ControllerKind { TIL, MPC_BASELINE };

// Everything needed to run one world; assembled from a flat Config.
struct WorldConfig {
    VehicleParams twin_params;
    VehicleParams plant_params;  // scenario perturbations applied
    NoiseConfig noise;           // silent when the scenario has noise off
    MpcConfig mpc_front;
    MpcConfig mpc_rear;
    CompensatorConfig compensator;
    Scenario scenario;
    ControllerKind controller = ControllerKind::TIL;
    bool baseline_use_twin_reference = false;  // ablation: MPC fed ideal outputs
    int control_period_steps = 5;              // 1 ms plant steps per controller step
    double base_dt = 1e-3;

    static WorldConfig from_config(const Config& cfg);
};

// Synchronized per-step log; all vectors share one length.
struct RunLog {
    std::vector<double> time;
    // per wheel (fl, fr, rl, rr)
    std::array<std::vector<double>, kNumWheels> reference;       // scenario setpoint
    std::array<std::vector<double>, kNumWheels> comp_reference;  // compensator's effective reference
    std::array<std::vector<double>, kNumWheels> twin_slip;
    std::array<std::vector<double>, kNumWheels> plant_slip;
    std::array<std::vector<double>, kNumWheels> plant_slip_meas;
    std::array<std::vector<double>, kNumWheels> nominal_cmd;
    std::array<std::vector<double>, kNumWheels> delta_cmd;
    std::array<std::vector<double>, kNumWheels> total_cmd;
    std::array<std::vector<double>, kNumWheels> plant_act_torque;
    std::array<std::vector<double>, kNumWheels> predicted_slip;  // horizon-tip forecast, logged at the tick
    // chassis
    std::vector<double> twin_speed;
    std::vector<double> plant_speed;
    std::vector<double> plant_speed_meas;
    std::vector<double> twin_accel;
    std::vector<double> plant_accel;
    std::vector<double> plant_accel_meas;
    // status / timing
    std::vector<double> braking_active;
    std::vector<double> twin_done;
    std::vector<double> comp_mode;
    std::vector<double> ctrl_compute_s;
    std::vector<double> twin_compute_s;

    double activation_time = -1.0;
    double stop_time = -1.0;  // first crossing below the deactivation speed
    bool complete = false;
    double dt = 1e-3;
    int control_period_steps = 5;

    std::size_t size() const { return time.size(); }
    std::size_t activation_index() const;
    std::size_t stop_index() const;  // size() when incomplete

    // Time-series export; timing columns are for the benchmark path only and
    // are withheld by default so repeated runs stay byte-identical.
    void to_csv(const std::string& path, bool include_timing = false) const;
};

struct PlantMeasurements {
    double chassis_speed = 0.0;
    double longitudinal_accel = 0.0;
    std::array<double, kNumWheels> wheel_rates{};
    std::array<ActuatorState, kNumWheels> actuators{};
};

// Twin initialization from plant measurements at maneuver start (and on any
// re-activation). Empty when a measurement is not finite.
std::optional<VehicleState> activate_twin(const PlantMeasurements& meas, const VehicleParams& twin_params);

// One simulation world stepping plant (and twin, for TiL) at the base rate
// with controllers on the aligned slow grid.
class World {
  public:
    explicit World(const WorldConfig& config);

    // Advances one base step (1 ms); false on numerical divergence.
    bool step();

    bool finished() const;
    const RunLog& log() const { return log_; }
    RunLog take_log();
    double time() const { return time_; }
    const VehicleState& plant_state() const { return plant_; }
    const VehicleState& twin_state() const { return twin_; }
    bool twin_is_done() const { return twin_done_; }

  private:
    void run_controllers();
    void log_step(double ctrl_seconds, double twin_seconds);
    std::vector<double> reference_preview(double now) const;

    WorldConfig cfg_;
    VehicleState twin_{};
    VehicleState plant_{};
    std::array<SlipMpc, kNumWheels> mpc_{};        // nominal loop, full twin state access
    std::array<SlipMpc, kNumWheels> mpc_plant_{};  // baseline loop on plant measurements
    std::array<TilCompensator, kNumWheels> comp_{};
    SensorRig rig_;
    RunLog log_;

    double time_ = 0.0;
    std::size_t step_index_ = 0;
    bool braking_active_ = false;
    bool twin_active_ = false;
    bool twin_done_ = false;
    bool diverged_ = false;
    std::array<double, kNumWheels> twin_cmd_{};     // what the twin is stepped with
    std::array<double, kNumWheels> nominal_cmd_{};  // logged nominal channel
    std::array<double, kNumWheels> delta_cmd_{};
    std::array<double, kNumWheels> total_cmd_{};
    std::array<double, kNumWheels> predicted_tip_{};
    // latest measurements (refreshed every base step)
    double meas_speed_ = 0.0;
    double meas_accel_ = 0.0;
    std::array<double, kNumWheels> meas_wheel_rates_{};
    std::array<double, kNumWheels> meas_slip_{};
};

// Simulates until the plant crosses the deactivation speed or the cap hits.
RunLog run_experiment(const WorldConfig& config);

}  // namespace til

#endif
