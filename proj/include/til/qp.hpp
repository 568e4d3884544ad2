#ifndef TIL_QP_HPP
#define TIL_QP_HPP

#include <Eigen/Dense>

namespace til {

// min 0.5 x' H x + f' x   s.t.   A x <= b
// H symmetric positive definite (jitter is added until the smallest
// eigenvalue clears 1e-8), dimensions are tiny (<= 5 variables here).
struct QpProblem {
    Eigen::MatrixXd hessian;
    Eigen::VectorXd linear;
    Eigen::MatrixXd constraint_matrix;  // rows: one inequality each
    Eigen::VectorXd constraint_bound;

    int num_vars() const { return static_cast<int>(hessian.rows()); }
    int num_constraints() const { return static_cast<int>(constraint_matrix.rows()); }
    void validate() const;  // throws on shape mismatch or indefinite Hessian
};

struct QpSolution {
    Eigen::VectorXd x;
    bool converged = false;
    int iterations = 0;
    double kkt_residual = 0.0;  // max of stationarity / feasibility / complementarity
};

// Primal active-set method. Starts from x0 when given (must be feasible),
// else from the least-squares-feasible origin. Deterministic pivoting:
// lowest-index blocking constraint in, most-negative-multiplier out.
QpSolution solve_qp(const QpProblem& problem, const Eigen::VectorXd* x0 = nullptr,
                    int max_iterations = 100);

// KKT residual of a candidate point (used by tests and debug assertions).
double qp_kkt_residual(const QpProblem& problem, const Eigen::VectorXd& x);

}  // namespace til

#endif
