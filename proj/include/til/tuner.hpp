#ifndef TIL_TUNER_HPP
#define TIL_TUNER_HPP

#include <string>

#include "til/gp.hpp"
#include "til/loop.hpp"

namespace til {

struct PerformanceIndices {
    double slip_cost_pct = 0.0;   // J_lambda, percent slip
    double effort = 0.0;          // J_u, N m/s
    double braking_time_s = 0.0;  // J_time
};

// Which error channel feeds the slip cost. REPORTING compares the scenario
// setpoint against the true plant slip (the comparison-table channel);
// TUNING uses the compensator's own error, reference minus measured slip,
// which is what the calibration can observe on a real vehicle.
enum class SlipCostChannel { REPORTING, TUNING };

// RMS of the per-wheel slip error over the active control window, in raw
// slip units. Throws when the log has no active window.
double cost_slip(const RunLog& log, SlipCostChannel channel = SlipCostChannel::REPORTING);

// RMS of the actuated-torque time derivative (first differences / dt).
double cost_effort(const RunLog& log);

// Wheel-averaged RMS mismatch between the stored horizon-tip slip forecast
// and the measured slip realized one horizon later.
double cost_mpc_prediction(const RunLog& log, int horizon_steps);

// Braking-control activation to the first crossing below the deactivation
// speed. Throws when the run never crossed.
double braking_time(const RunLog& log);

PerformanceIndices indices_from_log(const RunLog& log);

struct TuneResult {
    BoResult bo;
    Config overlay;  // tuned keys, ready to merge over a scenario config
};

// Compensator calibration: BO over (kp_f, Ti_f, kp_r, Ti_r) minimizing the
// RMS mismatch between the twin's ideal slip and the measured plant slip on
// the training maneuver built from `base` (reference replaced by the pulse
// profile, fixed seed, TiL controller).
TuneResult tune_til(const WorldConfig& base, const ParameterBox& box, int budget, std::uint64_t seed,
                    int initial_design = 8);

// End-of-line baseline calibration: BO over per-axle (R, J) scales of the
// predictive model minimizing the horizon-tip prediction error.
TuneResult tune_mpc_eol(const WorldConfig& base, const ParameterBox& box, int budget, std::uint64_t seed,
                        int initial_design = 8);

// Default search boxes.
ParameterBox default_til_box();
ParameterBox default_mpc_box();

// The Fig.-10-style training maneuver derived from a scenario: same plant
// perturbations, pulse-wave reference, fixed seed.
WorldConfig training_variant(const WorldConfig& base);

}  // namespace til

#endif
