#include "til/qp.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace til {

namespace {

constexpr double kEigJitterFloor = 1e-8;
constexpr double kFeasTol = 1e-9;

Eigen::MatrixXd regularized_hessian(const Eigen::MatrixXd& hessian) {
    Eigen::MatrixXd h = 0.5 * (hessian + hessian.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < kEigJitterFloor) {
        h += (kEigJitterFloor - min_eig + 1e-12) * Eigen::MatrixXd::Identity(h.rows(), h.cols());
    }
    return h;
}

// Cyclic projection onto violated half-spaces; exact in one pass for boxes.
bool make_feasible(const QpProblem& p, Eigen::VectorXd& x) {
    for (int pass = 0; pass < 200; ++pass) {
        bool violated = false;
        for (int i = 0; i < p.num_constraints(); ++i) {
            const double slack = p.constraint_bound(i) - p.constraint_matrix.row(i).dot(x);
            if (slack < -kFeasTol) {
                violated = true;
                const double nrm2 = p.constraint_matrix.row(i).squaredNorm();
                if (nrm2 <= 0.0) return false;
                x += p.constraint_matrix.row(i).transpose() * (slack / nrm2);
            }
        }
        if (!violated) return true;
    }
    return false;
}

}  // namespace

void QpProblem::validate() const {
    const int n = num_vars();
    if (hessian.cols() != n || linear.size() != n) throw std::invalid_argument("qp: shape mismatch");
    if (constraint_matrix.rows() != constraint_bound.size() ||
        (num_constraints() > 0 && constraint_matrix.cols() != n)) {
        throw std::invalid_argument("qp: constraint shape mismatch");
    }
    const Eigen::MatrixXd h = regularized_hessian(hessian);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    if (eig.eigenvalues().minCoeff() <= kEigJitterFloor * 0.5) {
        throw std::invalid_argument("qp: Hessian not positive definite after regularization");
    }
}

double qp_kkt_residual(const QpProblem& problem, const Eigen::VectorXd& x) {
    const Eigen::VectorXd grad = problem.hessian * x + problem.linear;
    const int m = problem.num_constraints();
    if (m == 0) return grad.lpNorm<Eigen::Infinity>();

    const Eigen::VectorXd slack = problem.constraint_bound - problem.constraint_matrix * x;
    double feas = std::max(0.0, -slack.minCoeff());

    std::vector<int> active;
    for (int i = 0; i < m; ++i) {
        if (slack(i) < 1e-7 * std::max(1.0, problem.constraint_bound.cwiseAbs().maxCoeff())) {
            active.push_back(i);
        }
    }
    Eigen::VectorXd residual_grad = grad;
    double comp = 0.0;
    if (!active.empty()) {
        Eigen::MatrixXd at(problem.num_vars(), static_cast<int>(active.size()));
        for (std::size_t k = 0; k < active.size(); ++k) {
            at.col(static_cast<int>(k)) = problem.constraint_matrix.row(active[k]).transpose();
        }
        Eigen::VectorXd mu = at.colPivHouseholderQr().solve(-grad);
        mu = mu.cwiseMax(0.0);
        residual_grad = grad + at * mu;
        for (std::size_t k = 0; k < active.size(); ++k) {
            comp = std::max(comp, std::abs(mu(static_cast<int>(k)) * slack(active[k])));
        }
    }
    return std::max({residual_grad.lpNorm<Eigen::Infinity>(), feas, comp});
}

QpSolution solve_qp(const QpProblem& problem, const Eigen::VectorXd* x0, int max_iterations) {
    const int n = problem.num_vars();
    const int m = problem.num_constraints();
    const Eigen::MatrixXd h = regularized_hessian(problem.hessian);

    QpSolution sol;
    sol.x = Eigen::VectorXd::Zero(n);
    if (x0 != nullptr && x0->size() == n) sol.x = *x0;
    if (m > 0) {
        const Eigen::VectorXd slack = problem.constraint_bound - problem.constraint_matrix * sol.x;
        if (slack.minCoeff() < -kFeasTol && !make_feasible(problem, sol.x)) {
            sol.converged = false;
            sol.kkt_residual = std::numeric_limits<double>::infinity();
            return sol;
        }
    }

    std::vector<int> working;  // active constraint indices
    working.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < m && static_cast<int>(working.size()) < n; ++i) {
        if (std::abs(problem.constraint_bound(i) - problem.constraint_matrix.row(i).dot(sol.x)) < kFeasTol) {
            // only take it if it keeps the working rows independent
            Eigen::MatrixXd rows(static_cast<int>(working.size()) + 1, n);
            for (std::size_t k = 0; k < working.size(); ++k) rows.row(static_cast<int>(k)) = problem.constraint_matrix.row(working[k]);
            rows.row(static_cast<int>(working.size())) = problem.constraint_matrix.row(i);
            if (Eigen::FullPivLU<Eigen::MatrixXd>(rows).rank() == rows.rows()) working.push_back(i);
        }
    }

    int tiny_steps = 0;
    for (int it = 0; it < max_iterations; ++it) {
        sol.iterations = it + 1;
        const int w = static_cast<int>(working.size());
        const Eigen::VectorXd grad = h * sol.x + problem.linear;

        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + w, n + w);
        kkt.topLeftCorner(n, n) = h;
        for (int k = 0; k < w; ++k) {
            kkt.block(n + k, 0, 1, n) = problem.constraint_matrix.row(working[static_cast<std::size_t>(k)]);
            kkt.block(0, n + k, n, 1) =
                problem.constraint_matrix.row(working[static_cast<std::size_t>(k)]).transpose();
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + w);
        rhs.head(n) = -grad;
        const Eigen::VectorXd step = kkt.fullPivLu().solve(rhs);
        const Eigen::VectorXd p = step.head(n);
        const Eigen::VectorXd lambda = step.tail(w);

        if (p.lpNorm<Eigen::Infinity>() < 1e-11 * std::max(1.0, sol.x.lpNorm<Eigen::Infinity>())) {
            int drop = -1;
            double most_negative = -1e-10;
            for (int k = 0; k < w; ++k) {
                if (lambda(k) < most_negative) {
                    most_negative = lambda(k);
                    drop = k;
                }
            }
            if (drop < 0) {
                sol.converged = true;
                break;
            }
            working.erase(working.begin() + drop);
            continue;
        }

        double alpha = 1.0;
        int blocking = -1;
        for (int i = 0; i < m; ++i) {
            if (std::find(working.begin(), working.end(), i) != working.end()) continue;
            const double ap = problem.constraint_matrix.row(i).dot(p);
            if (ap <= kFeasTol) continue;
            const double slack = problem.constraint_bound(i) - problem.constraint_matrix.row(i).dot(sol.x);
            const double a = slack / ap;
            if (a < alpha) {
                alpha = a;
                blocking = i;
            }
        }
        alpha = std::max(alpha, 0.0);
        sol.x += alpha * p;
        if (blocking >= 0) {
            Eigen::MatrixXd rows(static_cast<int>(working.size()) + 1, n);
            for (std::size_t k = 0; k < working.size(); ++k) rows.row(static_cast<int>(k)) = problem.constraint_matrix.row(working[k]);
            rows.row(static_cast<int>(working.size())) = problem.constraint_matrix.row(blocking);
            if (Eigen::FullPivLU<Eigen::MatrixXd>(rows).rank() == rows.rows()) {
                working.push_back(blocking);
            }
        }
        if (alpha < 1e-14) {
            if (++tiny_steps >= 3) break;  // degenerate corner, settle for the current point
        } else {
            tiny_steps = 0;
        }
    }

    sol.kkt_residual = qp_kkt_residual(problem, sol.x);
    if (!sol.converged && sol.kkt_residual < 1e-6) sol.converged = true;
    return sol;
}

}  // namespace til
