#ifndef TIL_COMPENSATOR_HPP
#define TIL_COMPENSATOR_HPP

namespace til {

// Per-axle PI parameters plus the speed schedule, shared by the four wheel
// compensators. The four (kp, Ti) values are the tuner's decision vector.
struct CompensatorConfig {
    double kp_nominal_front = 300.0;  // N m per unit slip
    double ti_front = 0.20;           // s
    double kp_nominal_rear = 150.0;
    double ti_rear = 0.25;

    double schedule_v_lb = 8.0;   // m/s
    double schedule_v_ub = 25.0;  // m/s
    double schedule_kp_lb = 0.3;
    bool continuous_schedule = false;  // optional continuous variant of the printed law

    double fallback_slip_ref = 0.10;   // constant reference after the twin stops
    double sample_rate = 200.0;        // Hz
    double deactivation_speed = 10.0 / 3.6;  // m/s

    // Inner loop that follows the commanded total torque while the twin is
    // active, providing the manual-mode action for the soft insertion. The
    // default ki equals the sample rate, which tracks with one-step deadbeat
    // so the hold branch seeds from the exact last total.
    double tracker_kp = 0.0;
    double tracker_ki = 200.0;  // 1/s

    void validate() const;
};

enum class CompensatorMode { TRACK_TWIN, HOLD_TOTAL_TORQUE, OFF };

struct CompensatorState {
    double integrator = 0.0;      // N m, Tustin accumulator of the slip PI
    double previous_error = 0.0;
    double saturation_excess = 0.0;  // u_sat - u_raw from the previous step
    CompensatorMode mode = CompensatorMode::TRACK_TWIN;
    double time = 0.0;

    // Torque-tracking inner loop state (manual-mode action).
    double tracker_integrator = 0.0;
    double tracker_output = 0.0;

    bool pending_bumpless = false;
    double bumpless_total = 0.0;
};

struct SwitchingDecision {
    double effective_reference = 0.0;
    CompensatorMode mode = CompensatorMode::TRACK_TWIN;
};

// Speed-based gain schedule, exactly as the piecewise law prints (the jump
// at v_ub when kp_lb != 0 is intentional; the continuous variant is opt-in).
double scheduled_gain(const CompensatorConfig& config, double kp_nominal, double chassis_speed);

// Tustin PI with back-calculation de-saturation: the previous saturation
// excess drives the integrator through 1/Gamma so the output tracks the
// limit instead of winding up. Output clamped to [lo, hi].
double pi_step(CompensatorState& state, const CompensatorConfig& config, double kp_nominal, double ti,
               double error, double chassis_speed, double dt, double lo, double hi);

// Mode logic: TRACK_TWIN while the twin brakes, HOLD_TOTAL_TORQUE once it is
// done (reference switches to the constant fallback, PI re-seeded from the
// last total torque), OFF below the deactivation speed.
SwitchingDecision switching_step(CompensatorState& state, const CompensatorConfig& config,
                                 double twin_slip_ref, bool twin_done, double chassis_speed,
                                 double nominal_torque, double total_torque_prev);

// One wheel's compensator: composes the switching logic, gain schedule and PI.
class TilCompensator {
  public:
    TilCompensator() = default;
    TilCompensator(const CompensatorConfig& config, bool front_axle, double torque_limit);

    // Returns the additive correction; plant command is nominal + correction.
    double step(double twin_slip, double measured_slip, double chassis_speed, bool twin_done,
                double nominal_torque);

    const CompensatorState& state() const { return state_; }
    CompensatorMode mode() const { return state_.mode; }
    double effective_reference() const { return last_reference_; }
    void reset();

  private:
    CompensatorConfig config_;
    bool front_axle_ = true;
    double torque_limit_ = 3000.0;
    CompensatorState state_;
    double last_reference_ = 0.0;
};

}  // namespace til

#endif
