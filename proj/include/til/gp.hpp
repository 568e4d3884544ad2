#ifndef TIL_GP_HPP
#define TIL_GP_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace til {

struct ParameterBox {
    std::vector<std::string> names;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int dim() const { return static_cast<int>(lower.size()); }
    void validate() const;
    Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;    // into the unit box
    Eigen::VectorXd denormalize(const Eigen::VectorXd& u) const;  // back to raw units
    bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;
};

struct GpPosterior {
    double mean = 0.0;
    double variance = 0.0;
};

// Squared-exponential ARD surrogate over a parameter box. Inputs are
// normalized to the unit box, costs standardized; hyperparameters picked by
// marginal likelihood over a small deterministic grid with per-dimension
// refinement.
class GpSurrogate {
  public:
    explicit GpSurrogate(const ParameterBox& box);
    GpSurrogate() = default;

    // fixed_noise_variance >= 0 pins the (standardized) observation noise,
    // a negative value lets the likelihood grid choose it.
    void fit(const std::vector<Eigen::VectorXd>& inputs, const std::vector<double>& costs,
             double fixed_noise_variance = -1.0);

    bool fitted() const { return fitted_; }
    GpPosterior posterior(const Eigen::VectorXd& x) const;  // raw-unit query point
    double log_marginal_likelihood() const { return best_lml_; }
    const Eigen::VectorXd& lengthscales() const { return lengthscales_; }
    double noise_variance() const { return noise_variance_; }
    const ParameterBox& box() const { return box_; }

  private:
    double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
    double evaluate_hypers(const Eigen::VectorXd& lengthscales, double noise_var);
    void factorize();

    ParameterBox box_;
    std::vector<Eigen::VectorXd> train_norm_;
    Eigen::VectorXd targets_;  // standardized costs
    double cost_mean_ = 0.0;
    double cost_std_ = 1.0;
    Eigen::VectorXd lengthscales_;
    double signal_variance_ = 1.0;
    double noise_variance_ = 1e-6;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;
    double best_lml_ = 0.0;
    bool fitted_ = false;
};

// Expected improvement for minimization, in raw cost units.
double expected_improvement(const GpSurrogate& gp, const Eigen::VectorXd& x, double incumbent_cost);

// EI maximizer: 2048-point Halton scatter (seed shifts the sequence) plus a
// shrinking pattern-search polish, all inside the box. Falls back to the
// posterior-mean minimizer when the surrogate is certain everywhere.
Eigen::VectorXd acquisition_argmax(const GpSurrogate& gp, const ParameterBox& box, double incumbent_cost,
                                   std::uint64_t seed);

struct BoEvaluation {
    int iteration = 0;
    Eigen::VectorXd theta;
    double cost = 0.0;
    double incumbent_cost = 0.0;
    bool failed = false;
};

struct BoResult {
    Eigen::VectorXd best_theta;
    double best_cost = 0.0;
    std::vector<BoEvaluation> history;
};

// Gaussian-process Bayesian optimization: Latin-hypercube design, then
// fit / EI-argmax / evaluate until the budget is spent. Objective failures
// (thrown exceptions or non-finite costs) are recorded at a 10x-worst
// penalty and optimization continues.
template <typename Objective>
BoResult bo_optimize(Objective&& objective, const ParameterBox& box, int budget, std::uint64_t seed,
                     int initial_design = 8);

// Deterministic Latin hypercube sample of the box.
std::vector<Eigen::VectorXd> latin_hypercube(const ParameterBox& box, int count, std::uint64_t seed);

}  // namespace til

#include "til/gp_impl.hpp"

#endif
