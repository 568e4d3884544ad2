#include "til/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "til/csv.hpp"

namespace til {

namespace {

struct ActiveWindow {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
};

ActiveWindow active_window(const RunLog& log) {
    const std::size_t begin = log.activation_index();
    const std::size_t end = std::min(log.stop_index(), log.size());
    if (begin >= end) throw std::invalid_argument("cost: log has no active control window");
    return {begin, end};
}

}  // namespace

double cost_slip(const RunLog& log, SlipCostChannel channel) {
    const ActiveWindow w = active_window(log);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = w.begin; k < w.end; ++k) {
        for (std::size_t i = 0; i < kNumWheels; ++i) {
            double e;
            if (channel == SlipCostChannel::REPORTING) {
                e = log.reference[i][k] - log.plant_slip[i][k];
            } else {
                e = log.comp_reference[i][k] - log.plant_slip_meas[i][k];
            }
            sum += e * e;
            ++count;
        }
    }
    return std::sqrt(sum / static_cast<double>(count));
}

double cost_effort(const RunLog& log) {
    const ActiveWindow w = active_window(log);
    if (w.end - w.begin < 2) throw std::invalid_argument("cost_effort: window too short");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = w.begin + 1; k < w.end; ++k) {
        for (std::size_t i = 0; i < kNumWheels; ++i) {
            const double rate = (log.plant_act_torque[i][k] - log.plant_act_torque[i][k - 1]) / log.dt;
            sum += rate * rate;
            ++count;
        }
    }
    return std::sqrt(sum / static_cast<double>(count));
}

double cost_mpc_prediction(const RunLog& log, int horizon_steps) {
    const ActiveWindow w = active_window(log);
    const std::size_t offset = static_cast<std::size_t>(horizon_steps * log.control_period_steps);
    bool any_nonzero = false;
    for (std::size_t i = 0; i < kNumWheels && !any_nonzero; ++i) {
        for (std::size_t k = w.begin; k < w.end; ++k) {
            if (log.predicted_slip[i][k] != 0.0) {
                any_nonzero = true;
                break;
            }
        }
    }
    if (!any_nonzero) throw std::invalid_argument("cost_mpc_prediction: prediction channel missing");

    double sum = 0.0;
    std::size_t count = 0;
    const std::size_t period = static_cast<std::size_t>(log.control_period_steps);
    for (std::size_t k = w.begin; k + offset < w.end; ++k) {
        if ((k - w.begin) % period != 0) continue;  // predictions refresh on the controller grid
        for (std::size_t i = 0; i < kNumWheels; ++i) {
            const double e = log.plant_slip_meas[i][k + offset] - log.predicted_slip[i][k];
            sum += e * e;
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("cost_mpc_prediction: no aligned samples");
    return std::sqrt(sum / static_cast<double>(count));
}

double braking_time(const RunLog& log) {
    if (log.activation_time < 0.0 || log.stop_time < 0.0) {
        throw std::invalid_argument("braking_time: run has no activation-to-stop window");
    }
    return std::max(0.0, log.stop_time - log.activation_time);
}

PerformanceIndices indices_from_log(const RunLog& log) {
    PerformanceIndices out;
    out.slip_cost_pct = 100.0 * cost_slip(log, SlipCostChannel::REPORTING);
    out.effort = cost_effort(log);
    out.braking_time_s = braking_time(log);
    return out;
}

ParameterBox default_til_box() {
    ParameterBox box;
    box.names = {"comp.kp_front", "comp.ti_front", "comp.kp_rear", "comp.ti_rear"};
    box.lower = Eigen::VectorXd(4);
    box.upper = Eigen::VectorXd(4);
    box.lower << 10.0, 0.01, 10.0, 0.01;
    box.upper << 5000.0, 1.0, 5000.0, 1.0;
    return box;
}

ParameterBox default_mpc_box() {
    ParameterBox box;
    box.names = {"mpc.radius_scale_front", "mpc.inertia_scale_front", "mpc.radius_scale_rear",
                 "mpc.inertia_scale_rear"};
    box.lower = Eigen::VectorXd(4);
    box.upper = Eigen::VectorXd(4);
    box.lower << 0.5, 0.5, 0.5, 0.5;
    box.upper << 1.5, 1.5, 1.5, 1.5;
    return box;
}

WorldConfig training_variant(const WorldConfig& base) {
    WorldConfig training = base;
    // Coast-down then strong braking with a pulse-wave reference to excite
    // the residual dynamics.
    training.scenario.reference.base = 0.10;
    training.scenario.reference.steps.clear();
    training.scenario.reference.pulse_amplitude = 0.03;
    training.scenario.reference.pulse_period = 1.0;
    training.scenario.reference.validate();
    return training;
}

TuneResult tune_til(const WorldConfig& base, const ParameterBox& box, int budget, std::uint64_t seed,
                    int initial_design) {
    WorldConfig training = training_variant(base);
    training.controller = ControllerKind::TIL;

    auto objective = [&training](const Eigen::VectorXd& theta) {
        WorldConfig cand = training;
        cand.compensator.kp_nominal_front = theta(0);
        cand.compensator.ti_front = theta(1);
        cand.compensator.kp_nominal_rear = theta(2);
        cand.compensator.ti_rear = theta(3);
        cand.compensator.validate();
        const RunLog log = run_experiment(cand);
        return cost_slip(log, SlipCostChannel::TUNING);
    };

    TuneResult result;
    result.bo = bo_optimize(objective, box, budget, seed, initial_design);
    result.overlay.set("comp.kp_front", CsvWriter::format_double(result.bo.best_theta(0)));
    result.overlay.set("comp.ti_front", CsvWriter::format_double(result.bo.best_theta(1)));
    result.overlay.set("comp.kp_rear", CsvWriter::format_double(result.bo.best_theta(2)));
    result.overlay.set("comp.ti_rear", CsvWriter::format_double(result.bo.best_theta(3)));
    return result;
}

TuneResult tune_mpc_eol(const WorldConfig& base, const ParameterBox& box, int budget, std::uint64_t seed,
                        int initial_design) {
    WorldConfig training = training_variant(base);
    training.controller = ControllerKind::MPC_BASELINE;
    training.baseline_use_twin_reference = false;

    const int horizon = training.mpc_front.horizon_steps;
    auto objective = [&training, horizon](const Eigen::VectorXd& theta) {
        WorldConfig cand = training;
        cand.mpc_front.radius_scale = theta(0);
        cand.mpc_front.inertia_scale = theta(1);
        cand.mpc_rear.radius_scale = theta(2);
        cand.mpc_rear.inertia_scale = theta(3);
        cand.mpc_front.validate();
        cand.mpc_rear.validate();
        const RunLog log = run_experiment(cand);
        return cost_mpc_prediction(log, horizon);
    };

    TuneResult result;
    result.bo = bo_optimize(objective, box, budget, seed, initial_design);
    result.overlay.set("mpc.radius_scale_front", CsvWriter::format_double(result.bo.best_theta(0)));
    result.overlay.set("mpc.inertia_scale_front", CsvWriter::format_double(result.bo.best_theta(1)));
    result.overlay.set("mpc.radius_scale_rear", CsvWriter::format_double(result.bo.best_theta(2)));
    result.overlay.set("mpc.inertia_scale_rear", CsvWriter::format_double(result.bo.best_theta(3)));
    return result;
}

}  // namespace til
