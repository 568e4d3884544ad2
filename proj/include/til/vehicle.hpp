#ifndef TIL_VEHICLE_HPP
#define TIL_VEHICLE_HPP

#include <array>
#include <cstddef>
#include <vector>

namespace til {

// Wheel ordering used everywhere: front-left, front-right, rear-left, rear-right.
enum Wheel : std::size_t { FL = 0, FR = 1, RL = 2, RR = 3 };
inline constexpr std::size_t kNumWheels = 4;
inline bool is_front(std::size_t wheel) { return wheel < 2; }

// Magic-formula longitudinal coefficients plus the two perturbation scalings
// applied to the plant in the mismatch studies: peak_friction_scale multiplies
// the peak value, shape_factor_scale multiplies the shape factor.
struct TireParams {
    double stiffness_b = 15.5;
    double shape_c = 1.9;
    double peak_d = 1.0;
    double curvature_e = 0.97;
    double peak_friction_scale = 1.0;   // mu_s
    double shape_factor_scale = 1.0;    // c_s
    double load_sensitivity = 1.0e-5;   // per-N linear derating of the peak

    void validate() const;
};

struct VehicleParams {
    double total_mass = 1612.0;          // kg
    double wheel_radius_front = 0.33;    // m
    double wheel_radius_rear = 0.35;     // m
    double wheel_inertia_front = 1.49;   // kg m^2
    double wheel_inertia_rear = 2.25;    // kg m^2
    double cog_to_front_axle = 1.57;     // m
    double cog_to_rear_axle = 1.03;      // m
    double wheelbase = 2.60;             // m, stored redundantly and checked
    double cog_height = 0.46;            // m
    double gravity = 9.81;               // m/s^2
    double air_density = 1.225;          // kg/m^3
    double aero_drag_area = 0.6;         // CdA, m^2 (0 in momentum-conservation tests)
    double max_brake_torque_front = 3000.0;  // N m per wheel
    double max_brake_torque_rear = 1500.0;   // N m per wheel
    double actuator_natural_freq = 70.0;     // rad/s
    double actuator_damping = 0.7;
    double actuator_slew_limit = 30000.0;    // N m/s
    TireParams tire;

    double wheel_radius(std::size_t wheel) const {
        return is_front(wheel) ? wheel_radius_front : wheel_radius_rear;
    }
    double wheel_inertia(std::size_t wheel) const {
        return is_front(wheel) ? wheel_inertia_front : wheel_inertia_rear;
    }
    double max_brake_torque(std::size_t wheel) const {
        return is_front(wheel) ? max_brake_torque_front : max_brake_torque_rear;
    }

    void validate() const;
};

// Point mass bolted onto the chassis, offsets measured from the nominal COG
// (x positive forward, y positive left). Heights are not modeled; masses are
// taken at COG height so only total mass and the l_f/l_r split change.
struct ConcentratedMass {
    double mass = 0.0;                 // kg
    double longitudinal_offset = 0.0;  // m
    double lateral_offset = 0.0;       // m
};

// Second-order electro-hydraulic brake: state is (actuated torque, torque rate).
struct ActuatorState {
    double torque = 0.0;  // N m
    double rate = 0.0;    // N m/s
};

struct DriverInput {
    double throttle = 0.0;  // [0,1]
    double brake = 0.0;     // [0,1]
    double steer = 0.0;     // rad
    int gear = 0;
};

struct VehicleState {
    double chassis_speed = 0.0;     // m/s
    double chassis_position = 0.0;  // m
    std::array<double, kNumWheels> wheel_rates{};  // rad/s
    std::array<ActuatorState, kNumWheels> actuators{};
    double longitudinal_accel = 0.0;  // m/s^2, output of the last step
    // Slip held through the standstill guard (chassis below 0.5 m/s).
    std::array<double, kNumWheels> last_slips{};

    double wheel_slip_of(std::size_t wheel, const VehicleParams& params) const;
};

// Result of one 1 ms integration step. valid goes false on numerical
// divergence; the carried state is then the last valid one.
struct StepResult {
    VehicleState state;
    bool valid = true;
};

struct WheelLoads {
    std::array<double, kNumWheels> newton{};
    bool clamped = false;  // some load hit the zero floor
};

// Eq.-style slip: (v - omega R) / max(v, omega R), positive while braking.
// Throws std::domain_error when both speeds are zero.
double wheel_slip(double chassis_point_speed, double wheel_rate, double radius);

// Longitudinal magic-formula force (braking-positive for positive slip):
//   F = Fz * D_eff * sin(C_eff * atan(B s - E (B s - atan(B s))))
// with D_eff = D * (1 - load_sensitivity * Fz) * mu_s and C_eff = C * c_s.
double pacejka_fx(double slip, double vertical_load, const TireParams& tire);

// Slip at which pacejka_fx peaks for the given load (bisection on the
// closed-form stationarity condition).
double pacejka_peak_slip(double vertical_load, const TireParams& tire);

// Adds concentrated masses; updated total mass and COG split by moment
// balance, wheelbase fixed. Throws std::invalid_argument if the COG would
// leave the wheelbase.
VehicleParams apply_mass_config(const VehicleParams& base, const std::vector<ConcentratedMass>& masses);

// Quasi-static front/rear load transfer, equal left/right split. Negative
// loads are clamped to zero with the flag set.
WheelLoads vertical_loads(const VehicleParams& params, double longitudinal_accel);

// One exact-ZOH step of the linear actuator followed by slew and [0, Tmax]
// saturation. commanded_torque is clamped into [0, Tmax] first.
ActuatorState actuator_step(const ActuatorState& state, double commanded_torque, double max_torque,
                            const VehicleParams& params, double dt);

// Advances the whole vehicle by dt: actuators (exact ZOH), then RK4 on
// chassis speed and wheel rates, then the stored accel for next step's load
// transfer. Wheel rates are floored at zero.
StepResult step_vehicle(const VehicleState& state, const std::array<double, kNumWheels>& torque_commands,
                        const DriverInput& driver, const VehicleParams& params, double dt);

}  // namespace til

#endif
