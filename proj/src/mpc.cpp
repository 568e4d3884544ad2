#include "til/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

namespace til {

void MpcConfig::validate() const {
    if (horizon_steps < 1) throw std::invalid_argument("mpc: horizon_steps must be >= 1");
    if (sample_time <= 0.0) throw std::invalid_argument("mpc: sample_time must be > 0");
    if (tracking_weight <= 0.0 || input_rate_weight <= 0.0) {
        throw std::invalid_argument("mpc: weights must be > 0");
    }
    if (torque_max <= 0.0) throw std::invalid_argument("mpc: torque_max must be > 0");
    if (rate_limit <= 0.0) throw std::invalid_argument("mpc: rate_limit must be > 0");
    if (radius_scale <= 0.0 || inertia_scale <= 0.0) {
        throw std::invalid_argument("mpc: model scales must be > 0");
    }
}

std::optional<SlipPredictionModel> linearize_slip_model(double chassis_speed, double longitudinal_accel,
                                                        double wheel_radius, double wheel_inertia,
                                                        double actuator_natural_freq, double actuator_damping,
                                                        const MpcConfig& config) {
    if (!(chassis_speed > config.min_speed)) return std::nullopt;
    SlipPredictionModel m;
    m.wheel_radius = wheel_radius * config.radius_scale;
    m.wheel_inertia = wheel_inertia * config.inertia_scale;
    m.frozen_speed = chassis_speed;
    m.frozen_accel = longitudinal_accel;
    m.actuator_natural_freq = actuator_natural_freq;
    m.actuator_damping = actuator_damping;
    m.sample_time = config.sample_time;
    m.horizon_steps = config.horizon_steps;

    const double wn = actuator_natural_freq;
    m.a_cont(0, 0) = -longitudinal_accel / chassis_speed;
    m.a_cont(0, 1) = -m.wheel_radius / (m.wheel_inertia * chassis_speed);
    m.a_cont(1, 2) = 1.0;
    m.a_cont(2, 1) = -wn * wn;
    m.a_cont(2, 2) = -2.0 * actuator_damping * wn;
    m.b_cont(2) = wn * wn;
    return m;
}

VelocityFormModel to_velocity_form(const SlipPredictionModel& model) {
    // ZOH through the augmented exponential: expm([[A, B],[0, 0]] Ts).
    Eigen::Matrix4d block = Eigen::Matrix4d::Zero();
    block.topLeftCorner<3, 3>() = model.a_cont;
    block.topRightCorner<3, 1>() = model.b_cont;
    const Eigen::Matrix4d expm = (block * model.sample_time).exp();
    const Eigen::Matrix3d ad = expm.topLeftCorner<3, 3>();
    const Eigen::Vector3d bd = expm.topRightCorner<3, 1>();

    VelocityFormModel v;
    v.sample_time = model.sample_time;
    v.horizon_steps = model.horizon_steps;
    const Eigen::RowVector3d c(1.0, 0.0, 0.0);  // slip output
    v.a_aug.topLeftCorner<3, 3>() = ad;
    v.a_aug.block<1, 3>(3, 0) = c * ad;
    v.a_aug(3, 3) = 1.0;
    v.b_aug.head<3>() = bd;
    v.b_aug(3) = c * bd;
    return v;
}

QpProblem build_qp(const VelocityFormModel& model, const Eigen::Vector3d& delta_state, double error,
                   const std::vector<double>& ref_increments, double previous_command,
                   const MpcConfig& config) {
    if (config.torque_max <= 0.0) throw std::invalid_argument("build_qp: infeasible torque bounds");
    const int n = model.horizon_steps;
    Eigen::Vector4d z0;
    z0 << delta_state, error;

    // Free response of the error over the horizon, including the previewed
    // reference increments entering as known disturbances.
    const Eigen::RowVector4d sel(0.0, 0.0, 0.0, 1.0);
    Eigen::VectorXd free_error(n);
    Eigen::MatrixXd input_map = Eigen::MatrixXd::Zero(n, n);  // e(k) sensitivity to du(i)
    Eigen::Vector4d z = z0;
    std::vector<Eigen::Vector4d> powers_b(static_cast<std::size_t>(n));
    // powers_b[j] = Aa^j * Ba
    powers_b[0] = model.b_aug;
    for (int j = 1; j < n; ++j) powers_b[static_cast<std::size_t>(j)] = model.a_aug * powers_b[static_cast<std::size_t>(j - 1)];
    for (int k = 1; k <= n; ++k) {
        Eigen::Vector4d w = Eigen::Vector4d::Zero();
        const double dref = (static_cast<int>(ref_increments.size()) >= k) ? ref_increments[static_cast<std::size_t>(k - 1)] : 0.0;
        w(3) = -dref;
        z = model.a_aug * z + w;
        free_error(k - 1) = sel * z;
        for (int i = 0; i < k; ++i) {
            input_map(k - 1, i) = sel * powers_b[static_cast<std::size_t>(k - 1 - i)];
        }
    }

    QpProblem qp;
    qp.hessian = 2.0 * (config.tracking_weight * input_map.transpose() * input_map +
                        config.input_rate_weight * Eigen::MatrixXd::Identity(n, n));
    qp.linear = 2.0 * config.tracking_weight * input_map.transpose() * free_error;

    // Cumulative torque bounds and per-step rate bounds.
    const double rate_bound = config.rate_limit * config.sample_time;
    const int rows = 4 * n;
    qp.constraint_matrix = Eigen::MatrixXd::Zero(rows, n);
    qp.constraint_bound = Eigen::VectorXd::Zero(rows);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= j; ++i) {
            qp.constraint_matrix(j, i) = 1.0;       // T_prev + sum du <= T_max
            qp.constraint_matrix(n + j, i) = -1.0;  // -(T_prev + sum du) <= 0
        }
        qp.constraint_bound(j) = config.torque_max - previous_command;
        qp.constraint_bound(n + j) = previous_command;
        qp.constraint_matrix(2 * n + j, j) = 1.0;
        qp.constraint_bound(2 * n + j) = rate_bound;
        qp.constraint_matrix(3 * n + j, j) = -1.0;
        qp.constraint_bound(3 * n + j) = rate_bound;
    }
    return qp;
}

SlipMpc::SlipMpc(double wheel_radius, double wheel_inertia, double actuator_natural_freq,
                 double actuator_damping, const MpcConfig& config)
    : wheel_radius_(wheel_radius),
      wheel_inertia_(wheel_inertia),
      actuator_natural_freq_(actuator_natural_freq),
      actuator_damping_(actuator_damping),
      config_(config) {
    config_.validate();
}

void SlipMpc::reset(const MpcMeasurement& meas, double initial_command) {
    previous_meas_ = meas;
    previous_command_ = std::clamp(initial_command, 0.0, config_.torque_max);
    primed_ = true;
}

MpcCommand SlipMpc::step(const MpcMeasurement& meas, const std::vector<double>& reference) {
    MpcCommand out;
    out.torque = previous_command_;

    if (!std::isfinite(meas.slip) || !std::isfinite(meas.chassis_speed) ||
        !std::isfinite(meas.longitudinal_accel) || !std::isfinite(meas.actuated_torque) ||
        !std::isfinite(meas.torque_rate) || reference.empty()) {
        return out;
    }
    const auto model = linearize_slip_model(meas.chassis_speed, meas.longitudinal_accel, wheel_radius_,
                                            wheel_inertia_, actuator_natural_freq_, actuator_damping_,
                                            config_);
    if (!model.has_value()) {
        previous_meas_ = meas;
        return out;  // hold-last-command guard path
    }

    if (!primed_) reset(meas, previous_command_);

    Eigen::Vector3d delta_state;
    delta_state << meas.slip - previous_meas_.slip, meas.actuated_torque - previous_meas_.actuated_torque,
        meas.torque_rate - previous_meas_.torque_rate;
    const double error = meas.slip - reference.front();

    auto ref_at = [&reference](int k) {
        const std::size_t i = std::min(static_cast<std::size_t>(k), reference.size() - 1);
        return reference[i];
    };
    std::vector<double> dref(static_cast<std::size_t>(config_.horizon_steps));
    for (int k = 1; k <= config_.horizon_steps; ++k) {
        dref[static_cast<std::size_t>(k - 1)] = ref_at(k) - ref_at(k - 1);
    }

    const VelocityFormModel vform = to_velocity_form(*model);
    const QpProblem qp = build_qp(vform, delta_state, error, dref, previous_command_, config_);
    const QpSolution solution = solve_qp(qp);
    out.qp_iterations = solution.iterations;
    out.kkt_residual = solution.kkt_residual;
    if (!solution.converged) {
        previous_meas_ = meas;
        return out;  // solver failure: hold last command
    }

    const double next_command = std::clamp(previous_command_ + solution.x(0), 0.0, config_.torque_max);

    // Slip forecast at the horizon tip under the planned increments,
    // recorded for the end-of-line prediction-error cost.
    Eigen::Vector4d z;
    z << delta_state, error;
    double tip_slip = meas.slip;
    for (int k = 0; k < config_.horizon_steps; ++k) {
        z = vform.a_aug * z + vform.b_aug * solution.x(k);
        tip_slip += z(0);
    }
    out.predicted_tip_slip = tip_slip;
    out.torque = next_command;
    out.valid = true;

    previous_command_ = next_command;
    previous_meas_ = meas;
    return out;
}

}  // namespace til
