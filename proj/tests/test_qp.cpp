#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "til/qp.hpp"
#include "til/sensors.hpp"  // GaussianRng

using namespace til;

namespace {

// Projected gradient descent to convergence; the independent reference the
// active-set solutions are checked against.
Eigen::VectorXd projected_gradient_box(const Eigen::MatrixXd& h, const Eigen::VectorXd& f,
                                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                       int iterations = 200000) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    const double step = 1.0 / eig.eigenvalues().maxCoeff();
    Eigen::VectorXd x = 0.5 * (lo + hi);
    for (int it = 0; it < iterations; ++it) {
        x = (x - step * (h * x + f)).cwiseMax(lo).cwiseMin(hi);
    }
    return x;
}

QpProblem box_problem(const Eigen::MatrixXd& h, const Eigen::VectorXd& f, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi) {
    const int n = static_cast<int>(f.size());
    QpProblem p;
    p.hessian = h;
    p.linear = f;
    p.constraint_matrix = Eigen::MatrixXd::Zero(2 * n, n);
    p.constraint_bound = Eigen::VectorXd::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
        p.constraint_matrix(i, i) = 1.0;
        p.constraint_bound(i) = hi(i);
        p.constraint_matrix(n + i, i) = -1.0;
        p.constraint_bound(n + i) = -lo(i);
    }
    return p;
}

double objective(const QpProblem& p, const Eigen::VectorXd& x) {
    return 0.5 * x.dot(p.hessian * x) + p.linear.dot(x);
}

}  // namespace

TEST_CASE("unconstrained optimum when constraints are inactive") {
    Eigen::MatrixXd h(2, 2);
    h << 4.0, 1.0, 1.0, 3.0;
    Eigen::VectorXd f(2);
    f << -1.0, -2.0;
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -100.0);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 100.0);
    const QpProblem p = box_problem(h, f, lo, hi);
    const QpSolution s = solve_qp(p);
    REQUIRE(s.converged);
    const Eigen::VectorXd expected = -h.ldlt().solve(f);
    CHECK((s.x - expected).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(s.kkt_residual < 1e-6);
}

TEST_CASE("1-D active upper bound lands exactly on it") {
    Eigen::MatrixXd h(1, 1);
    h << 2.0;
    Eigen::VectorXd f(1);
    f << -10.0;  // unconstrained optimum at 5
    const QpProblem p = box_problem(h, f, Eigen::VectorXd::Constant(1, -1.0),
                                    Eigen::VectorXd::Constant(1, 2.0));
    const QpSolution s = solve_qp(p);
    REQUIRE(s.converged);
    CHECK(s.x(0) == doctest::Approx(2.0));
}

TEST_CASE("general inequality rows (cumulative sums) are honored") {
    // two-step torque plan: both cumulative sums bounded
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2) * 2.0;
    Eigen::VectorXd f(2);
    f << -8.0, -8.0;  // wants (4, 4)
    QpProblem p;
    p.hessian = h;
    p.linear = f;
    p.constraint_matrix = Eigen::MatrixXd::Zero(2, 2);
    p.constraint_bound = Eigen::VectorXd::Zero(2);
    p.constraint_matrix << 1.0, 0.0, 1.0, 1.0;  // x0 <= 1, x0 + x1 <= 3
    p.constraint_bound << 1.0, 3.0;
    const QpSolution s = solve_qp(p);
    REQUIRE(s.converged);
    CHECK(s.x(0) == doctest::Approx(1.0));
    CHECK(s.x(0) + s.x(1) == doctest::Approx(3.0));
    CHECK(s.kkt_residual < 1e-6);
}

TEST_CASE("100 random SPD box QPs match the projected-gradient oracle") {
    GaussianRng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 5;
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
        }
        const Eigen::MatrixXd h = a.transpose() * a + 0.5 * Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd f(n), lo(n), hi(n);
        for (int i = 0; i < n; ++i) {
            f(i) = 3.0 * rng.normal();
            const double c = rng.normal();
            lo(i) = c - std::abs(rng.normal()) - 0.1;
            hi(i) = c + std::abs(rng.normal()) + 0.1;
        }
        const QpProblem p = box_problem(h, f, lo, hi);
        const QpSolution s = solve_qp(p);
        REQUIRE(s.converged);
        CHECK(s.kkt_residual < 1e-6);
        const Eigen::VectorXd ref = projected_gradient_box(h, f, lo, hi);
        CHECK(objective(p, s.x) <= objective(p, ref) + 1e-6);
        CHECK(std::abs(objective(p, s.x) - objective(p, ref)) < 1e-6);
    }
}

TEST_CASE("determinism: identical problems give identical iterates") {
    Eigen::MatrixXd h(3, 3);
    h << 3, 1, 0, 1, 4, 1, 0, 1, 5;
    Eigen::VectorXd f(3);
    f << -3, -7, -1;
    const QpProblem p = box_problem(h, f, Eigen::VectorXd::Constant(3, -0.5),
                                    Eigen::VectorXd::Constant(3, 1.0));
    const QpSolution a = solve_qp(p);
    const QpSolution b = solve_qp(p);
    CHECK(a.iterations == b.iterations);
    CHECK((a.x - b.x).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("validation rejects malformed problems") {
    QpProblem p;
    p.hessian = Eigen::MatrixXd::Identity(2, 2);
    p.linear = Eigen::VectorXd::Zero(3);
    CHECK_THROWS(p.validate());
}
