#ifndef TIL_MPC_HPP
#define TIL_MPC_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "til/qp.hpp"

namespace til {

// Frozen-coefficient slip + actuator prediction model for one wheel.
// States: [slip, actuated torque, torque rate]; input: commanded torque.
// The slip row comes from
//   lambda_dot = (1 - lambda)/v * a - R/(J v) * T_act
// with v and a held constant over the horizon, which makes it LTI plus a
// constant drive a/v that the velocity form cancels.
struct SlipPredictionModel {
    double wheel_radius = 0.0;
    double wheel_inertia = 0.0;
    double frozen_speed = 0.0;
    double frozen_accel = 0.0;
    double actuator_natural_freq = 0.0;
    double actuator_damping = 0.0;
    double sample_time = 0.0;
    int horizon_steps = 5;

    Eigen::Matrix3d a_cont = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b_cont = Eigen::Vector3d::Zero();
};

// Discrete velocity-form model: state [delta slip, delta T_act, delta rate,
// tracking error], input = command increment. The embedded error integrator
// rejects constant input disturbances at steady state.
struct VelocityFormModel {
    Eigen::Matrix4d a_aug = Eigen::Matrix4d::Zero();
    Eigen::Vector4d b_aug = Eigen::Vector4d::Zero();
    double sample_time = 0.0;
    int horizon_steps = 5;
};

struct MpcConfig {
    int horizon_steps = 5;
    double sample_time = 0.005;        // s
    double tracking_weight = 1.0;
    double input_rate_weight = 2e-7;   // per (N m)^2 of command increment
    double torque_max = 3000.0;        // N m, per wheel
    double rate_limit = 30000.0;       // N m/s on the commanded torque
    double min_speed = 1.0;            // m/s, below this the model is invalid
    // End-of-line calibration knobs: multiplicative on the nominal R and J.
    double radius_scale = 1.0;
    double inertia_scale = 1.0;

    void validate() const;
};

struct MpcMeasurement {
    double slip = 0.0;
    double chassis_speed = 0.0;
    double longitudinal_accel = 0.0;
    double actuated_torque = 0.0;
    double torque_rate = 0.0;
};

struct MpcCommand {
    double torque = 0.0;
    bool valid = false;            // false: model invalid or solver failed, torque holds
    double predicted_tip_slip = 0.0;  // slip forecast at the end of the horizon
    int qp_iterations = 0;
    double kkt_residual = 0.0;
};

// Builds the LTI model; empty when v_x <= min_speed.
std::optional<SlipPredictionModel> linearize_slip_model(double chassis_speed, double longitudinal_accel,
                                                        double wheel_radius, double wheel_inertia,
                                                        double actuator_natural_freq, double actuator_damping,
                                                        const MpcConfig& config);

// Exact ZOH discretization plus the tracking-error state.
VelocityFormModel to_velocity_form(const SlipPredictionModel& model);

// Condensed QP over the command increments. delta_state is the measured
// state increment across the last controller period, error the current
// tracking error, ref_increments the previewed reference deltas over the
// horizon (size >= horizon_steps, missing entries treated as zero).
QpProblem build_qp(const VelocityFormModel& model, const Eigen::Vector3d& delta_state, double error,
                   const std::vector<double>& ref_increments, double previous_command,
                   const MpcConfig& config);

// One wheel's slip MPC with its internal increment bookkeeping.
class SlipMpc {
  public:
    SlipMpc() = default;
    SlipMpc(double wheel_radius, double wheel_inertia, double actuator_natural_freq,
            double actuator_damping, const MpcConfig& config);

    // reference[0] is the current setpoint, reference[1..horizon] the preview;
    // a short vector is extended by holding the last value.
    MpcCommand step(const MpcMeasurement& meas, const std::vector<double>& reference);

    void reset(const MpcMeasurement& meas, double initial_command);
    double previous_command() const { return previous_command_; }
    const MpcConfig& config() const { return config_; }

  private:
    double wheel_radius_ = 0.33;
    double wheel_inertia_ = 1.49;
    double actuator_natural_freq_ = 70.0;
    double actuator_damping_ = 0.7;
    MpcConfig config_;
    double previous_command_ = 0.0;
    MpcMeasurement previous_meas_{};
    bool primed_ = false;
};

}  // namespace til

#endif
