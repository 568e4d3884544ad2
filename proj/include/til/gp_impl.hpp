#ifndef TIL_GP_IMPL_HPP
#define TIL_GP_IMPL_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

namespace til {

template <typename Objective>
BoResult bo_optimize(Objective&& objective, const ParameterBox& box, int budget, std::uint64_t seed,
                     int initial_design) {
    box.validate();
    if (initial_design < 2) throw std::invalid_argument("bo: initial design needs >= 2 points");
    if (budget < initial_design) throw std::invalid_argument("bo: budget below the initial design size");

    BoResult result;
    result.best_cost = std::numeric_limits<double>::infinity();
    std::vector<Eigen::VectorXd> inputs;
    std::vector<double> costs;

    double worst_seen = 0.0;
    bool any_success = false;
    auto evaluate = [&](const Eigen::VectorXd& theta, int iteration) {
        BoEvaluation row;
        row.iteration = iteration;
        row.theta = theta;
        double cost = std::numeric_limits<double>::quiet_NaN();
        try {
            cost = objective(theta);
        } catch (const std::exception&) {
            cost = std::numeric_limits<double>::quiet_NaN();
        }
        if (!std::isfinite(cost)) {
            row.failed = true;
            cost = any_success ? 10.0 * std::abs(worst_seen) : 1e9;
        } else {
            any_success = true;
            worst_seen = std::max(worst_seen, std::abs(cost));
        }
        row.cost = cost;
        inputs.push_back(theta);
        costs.push_back(cost);
        if (!row.failed && cost < result.best_cost) {
            result.best_cost = cost;
            result.best_theta = theta;
        }
        row.incumbent_cost = result.best_cost;
        result.history.push_back(row);
    };

    const auto design = latin_hypercube(box, initial_design, seed);
    int iteration = 0;
    for (const auto& theta : design) evaluate(theta, iteration++);

    GpSurrogate gp(box);
    while (iteration < budget) {
        gp.fit(inputs, costs);
        const Eigen::VectorXd candidate =
            acquisition_argmax(gp, box, result.best_cost, seed + static_cast<std::uint64_t>(iteration));
        evaluate(candidate, iteration++);
    }
    if (!any_success) throw std::runtime_error("bo: every objective evaluation failed");
    return result;
}

}  // namespace til

#endif
