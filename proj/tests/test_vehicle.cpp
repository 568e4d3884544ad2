#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "til/vehicle.hpp"

using namespace til;

namespace {

VehicleParams table_params() { return VehicleParams{}; }  // defaults carry the shipped preset

}  // namespace

TEST_CASE("wheel slip basic values") {
    CHECK(wheel_slip(30.0, 30.0 / 0.33, 0.33) == doctest::Approx(0.0));
    CHECK(wheel_slip(30.0, 0.0, 0.33) == doctest::Approx(1.0));
    CHECK(wheel_slip(30.0, 15.0 / 0.33, 0.33) == doctest::Approx(0.5));
    CHECK_THROWS_AS(wheel_slip(0.0, 0.0, 0.33), std::domain_error);
}

TEST_CASE("wheel slip stays in [0,1] while braking") {
    const double radius = 0.35;
    for (int iv = 1; iv <= 40; ++iv) {
        const double v = iv * 1.37;
        for (int iw = 0; iw <= 50; ++iw) {
            const double omega = (v / radius) * iw / 50.0;  // omega R <= v up to rounding
            const double s = wheel_slip(v, omega, radius);
            CHECK(s >= -1e-15);
            CHECK(s <= 1.0);
        }
    }
}

TEST_CASE("pacejka zero slip gives zero force") {
    TireParams tire;
    CHECK(pacejka_fx(0.0, 4000.0, tire) == doctest::Approx(0.0));
    CHECK(pacejka_fx(0.0, 0.0, tire) == doctest::Approx(0.0));
}

TEST_CASE("pacejka peak scales multiplicatively with mu_s") {
    TireParams nominal;
    TireParams scaled = nominal;
    scaled.peak_friction_scale = 0.8;
    const double load = 4000.0;
    const double s_peak = pacejka_peak_slip(load, nominal);
    const double ratio = pacejka_fx(s_peak, load, scaled) / pacejka_fx(s_peak, load, nominal);
    CHECK(ratio == doctest::Approx(0.8).epsilon(1e-9));
    // whole curve, not just the peak
    for (double s = 0.01; s <= 1.0; s += 0.07) {
        const double r = pacejka_fx(s, load, scaled) / pacejka_fx(s, load, nominal);
        CHECK(r == doctest::Approx(0.8).epsilon(1e-9));
    }
}

TEST_CASE("pacejka argmax matches dense grid scan") {
    TireParams tire;
    const double load = 4000.0;
    double best_s = 0.0;
    double best_f = -1.0;
    for (double s = 0.0; s <= 1.0 + 1e-12; s += 1e-4) {
        const double f = pacejka_fx(s, load, tire);
        if (f > best_f) {
            best_f = f;
            best_s = s;
        }
    }
    const double analytic = pacejka_peak_slip(load, tire);
    CHECK(std::abs(best_s - analytic) < 2e-4);
    // shipped curve peaks in the 0.10-0.12 band
    CHECK(analytic > 0.10);
    CHECK(analytic < 0.12);
}

TEST_CASE("pacejka is odd in slip") {
    TireParams tire;
    for (double s = 0.02; s < 1.0; s += 0.11) {
        CHECK(pacejka_fx(-s, 3500.0, tire) == doctest::Approx(-pacejka_fx(s, 3500.0, tire)));
    }
}

TEST_CASE("mass config: empty list is identity") {
    const VehicleParams base = table_params();
    const VehicleParams out = apply_mass_config(base, {});
    CHECK(out.total_mass == base.total_mass);
    CHECK(out.cog_to_front_axle == base.cog_to_front_axle);
}

TEST_CASE("mass config: table masses sum to 1887 kg") {
    const VehicleParams base = table_params();
    const std::vector<ConcentratedMass> masses = {
        {75.0, 0.20, 0.35}, {80.0, 0.20, -0.35}, {90.0, 1.30, 0.30}, {30.0, 1.30, -0.30}};
    const VehicleParams out = apply_mass_config(base, masses);
    CHECK(out.total_mass == doctest::Approx(1887.0));
    CHECK(out.wheelbase == base.wheelbase);
    CHECK(out.cog_to_front_axle + out.cog_to_rear_axle == doctest::Approx(out.wheelbase));
    // moment balance about the old COG holds to 1e-9 relative
    double moment = 0.0;
    for (const auto& m : masses) moment += m.mass * m.longitudinal_offset;
    const double shift = base.cog_to_front_axle - out.cog_to_front_axle;
    CHECK(std::abs(out.total_mass * shift - moment) <= 1e-9 * std::abs(moment));
}

TEST_CASE("mass config: mass at COG leaves the split unchanged") {
    const VehicleParams base = table_params();
    const VehicleParams out = apply_mass_config(base, {{100.0, 0.0, 0.0}});
    CHECK(out.total_mass == doctest::Approx(base.total_mass + 100.0));
    CHECK(out.cog_to_front_axle == doctest::Approx(base.cog_to_front_axle));
    CHECK(out.cog_to_rear_axle == doctest::Approx(base.cog_to_rear_axle));
}

TEST_CASE("mass config: COG outside the wheelbase is rejected") {
    const VehicleParams base = table_params();
    CHECK_THROWS_AS(apply_mass_config(base, {{50000.0, 10.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("vertical loads: statics and hand-evaluated transfer") {
    const VehicleParams p = table_params();
    const WheelLoads still = vertical_loads(p, 0.0);
    double sum = 0.0;
    for (double n : still.newton) sum += n;
    CHECK(sum == doctest::Approx(p.total_mass * p.gravity).epsilon(1e-12));

    // a_x = -g: front axle carries M g (l_r + h) / L  (~9063 N for Table values)
    const WheelLoads hard = vertical_loads(p, -p.gravity);
    const double front_axle = hard.newton[FL] + hard.newton[FR];
    const double expected = p.total_mass * p.gravity * (p.cog_to_rear_axle + p.cog_height) / p.wheelbase;
    CHECK(front_axle == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(9063.0).epsilon(1e-3));
}

TEST_CASE("vertical loads: +a and -a average to statics, sum is invariant") {
    const VehicleParams p = table_params();
    for (double a = 0.5; a < 12.0; a += 1.7) {
        const WheelLoads plus = vertical_loads(p, a);
        const WheelLoads minus = vertical_loads(p, -a);
        const WheelLoads still = vertical_loads(p, 0.0);
        for (std::size_t i = 0; i < kNumWheels; ++i) {
            CHECK(0.5 * (plus.newton[i] + minus.newton[i]) == doctest::Approx(still.newton[i]));
        }
        double sum = 0.0;
        for (double n : plus.newton) sum += n;
        CHECK(sum == doctest::Approx(p.total_mass * p.gravity).epsilon(1e-12));
    }
}

TEST_CASE("actuator: unity DC gain and zero-input rest") {
    const VehicleParams p = table_params();
    ActuatorState s{};
    const double dt = 1e-3;
    const double command = 1200.0;
    const double time_constant = 1.0 / (p.actuator_damping * p.actuator_natural_freq);
    const int steps = static_cast<int>(10.0 * time_constant / dt);
    for (int i = 0; i < steps; ++i) s = actuator_step(s, command, 3000.0, p, dt);
    CHECK(std::abs(s.torque - command) < 0.01 * command);

    ActuatorState rest{};
    for (int i = 0; i < 100; ++i) rest = actuator_step(rest, 0.0, 3000.0, p, dt);
    CHECK(rest.torque == doctest::Approx(0.0));
    CHECK(rest.rate == doctest::Approx(0.0));
}

TEST_CASE("actuator: rise time matches the analytic step response") {
    const VehicleParams p = table_params();
    const double dt = 1e-4;
    const double amplitude = 500.0;  // small enough to stay under the slew limit

    // analytic underdamped step response on a fine grid
    const double wn = p.actuator_natural_freq;
    const double zeta = p.actuator_damping;
    const double wd = wn * std::sqrt(1.0 - zeta * zeta);
    auto analytic = [&](double t) {
        return 1.0 - std::exp(-zeta * wn * t) *
                         (std::cos(wd * t) + zeta / std::sqrt(1.0 - zeta * zeta) * std::sin(wd * t));
    };
    auto crossing = [&](double level) {
        for (double t = 0.0; t < 1.0; t += 1e-6) {
            if (analytic(t) >= level) return t;
        }
        return 1.0;
    };
    const double analytic_rise = crossing(0.9) - crossing(0.1);

    ActuatorState s{};
    double t10 = -1.0, t90 = -1.0;
    for (int i = 0; i < 20000; ++i) {
        s = actuator_step(s, amplitude, 3000.0, p, dt);
        const double t = (i + 1) * dt;
        if (t10 < 0.0 && s.torque >= 0.1 * amplitude) t10 = t;
        if (t90 < 0.0 && s.torque >= 0.9 * amplitude) {
            t90 = t;
            break;
        }
    }
    REQUIRE(t90 > 0.0);
    CHECK(std::abs((t90 - t10) - analytic_rise) < 0.05 * analytic_rise);
}

TEST_CASE("actuator saturates at the torque ceiling") {
    const VehicleParams p = table_params();
    ActuatorState s{};
    for (int i = 0; i < 2000; ++i) {
        s = actuator_step(s, 5000.0, 3000.0, p, 1e-3);
        CHECK(s.torque <= 3000.0);
        CHECK(s.torque >= 0.0);
    }
    CHECK(s.torque == doctest::Approx(3000.0));
}

TEST_CASE("step_vehicle: momentum conservation without torque and drag") {
    VehicleParams p = table_params();
    p.aero_drag_area = 0.0;
    VehicleState s;
    s.chassis_speed = 40.0;
    for (std::size_t i = 0; i < kNumWheels; ++i) s.wheel_rates[i] = 40.0 / p.wheel_radius(i);
    const std::array<double, kNumWheels> zero{};
    for (int k = 0; k < 1000; ++k) {
        const StepResult r = step_vehicle(s, zero, DriverInput{}, p, 1e-3);
        REQUIRE(r.valid);
        s = r.state;
    }
    CHECK(s.chassis_speed == doctest::Approx(40.0).epsilon(1e-14));
}

TEST_CASE("step_vehicle: step-halving convergence") {
    const VehicleParams p = table_params();
    auto simulate = [&p](double dt) {
        VehicleState s;
        s.chassis_speed = 45.0;
        for (std::size_t i = 0; i < kNumWheels; ++i) s.wheel_rates[i] = 45.0 / p.wheel_radius(i);
        const std::array<double, kNumWheels> torque{900.0, 900.0, 500.0, 500.0};
        const int steps = static_cast<int>(3.0 / dt);
        for (int k = 0; k < steps; ++k) {
            const StepResult r = step_vehicle(s, torque, DriverInput{}, p, dt);
            REQUIRE(r.valid);
            s = r.state;
        }
        return s.chassis_speed;
    };
    const double coarse = simulate(1e-3);
    const double fine = simulate(0.5e-3);
    CHECK(std::abs(coarse - fine) / fine < 1e-3);
}

TEST_CASE("step_vehicle: locked wheels decelerate by the algebraic force balance") {
    VehicleParams p = table_params();
    p.aero_drag_area = 0.0;
    VehicleState s;
    s.chassis_speed = 40.0;
    // wheels already locked, huge command keeps them there
    const std::array<double, kNumWheels> torque{3000.0, 3000.0, 1500.0, 1500.0};
    for (std::size_t i = 0; i < kNumWheels; ++i) {
        s.wheel_rates[i] = 0.0;
        s.last_slips[i] = 1.0;
    }
    // settle the stored accel and actuators into the locked regime
    for (int k = 0; k < 400; ++k) s = step_vehicle(s, torque, DriverInput{}, p, 1e-3).state;
    REQUIRE(s.chassis_speed > 20.0);
    const WheelLoads loads = vertical_loads(p, s.longitudinal_accel);
    double force = 0.0;
    for (std::size_t i = 0; i < kNumWheels; ++i) force += pacejka_fx(1.0, loads.newton[i], p.tire);
    const double expected_decel = -force / p.total_mass;
    CHECK(std::abs(s.longitudinal_accel - expected_decel) < 0.01 * std::abs(expected_decel));
    for (std::size_t i = 0; i < kNumWheels; ++i) CHECK(s.wheel_rates[i] == doctest::Approx(0.0));
}

TEST_CASE("step_vehicle: deterministic and kinetic energy non-increasing") {
    const VehicleParams p = table_params();
    VehicleState a;
    a.chassis_speed = 50.0;
    for (std::size_t i = 0; i < kNumWheels; ++i) a.wheel_rates[i] = 50.0 / p.wheel_radius(i);
    VehicleState b = a;
    const std::array<double, kNumWheels> torque{700.0, 700.0, 400.0, 400.0};
    double prev_speed = a.chassis_speed;
    for (int k = 0; k < 2000; ++k) {
        a = step_vehicle(a, torque, DriverInput{}, p, 1e-3).state;
        b = step_vehicle(b, torque, DriverInput{}, p, 1e-3).state;
        CHECK(a.chassis_speed == b.chassis_speed);  // bit-identical
        CHECK(a.chassis_speed <= prev_speed + 1e-15);
        prev_speed = a.chassis_speed;
    }
}

TEST_CASE("parameter validation catches broken geometry") {
    VehicleParams p = table_params();
    p.wheelbase = 2.0;  // no longer l_f + l_r
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    VehicleParams q = table_params();
    q.total_mass = -1.0;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}
