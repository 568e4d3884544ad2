#include "til/gp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "til/sensors.hpp"  // GaussianRng

namespace til {

namespace {

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double standard_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double halton(std::uint64_t index, std::uint64_t base) {
    double f = 1.0;
    double r = 0.0;
    while (index > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

}  // namespace

void ParameterBox::validate() const {
    if (lower.size() != upper.size() || lower.size() == 0) {
        throw std::invalid_argument("box: empty or mismatched bounds");
    }
    if (!names.empty() && static_cast<int>(names.size()) != dim()) {
        throw std::invalid_argument("box: name count mismatch");
    }
    for (int i = 0; i < dim(); ++i) {
        if (!(lower(i) < upper(i))) throw std::invalid_argument("box: lower must be < upper elementwise");
    }
}

Eigen::VectorXd ParameterBox::normalize(const Eigen::VectorXd& x) const {
    return (x - lower).cwiseQuotient(upper - lower);
}

Eigen::VectorXd ParameterBox::denormalize(const Eigen::VectorXd& u) const {
    return lower + u.cwiseProduct(upper - lower);
}

bool ParameterBox::contains(const Eigen::VectorXd& x, double tol) const {
    for (int i = 0; i < dim(); ++i) {
        if (x(i) < lower(i) - tol || x(i) > upper(i) + tol) return false;
    }
    return true;
}

GpSurrogate::GpSurrogate(const ParameterBox& box) : box_(box) { box_.validate(); }

double GpSurrogate::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    double q = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        const double d = (a(i) - b(i)) / lengthscales_(i);
        q += d * d;
    }
    return signal_variance_ * std::exp(-0.5 * q);
}

void GpSurrogate::factorize() {
    const int n = static_cast<int>(train_norm_.size());
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            k(i, j) = k(j, i) = kernel(train_norm_[static_cast<std::size_t>(i)],
                                       train_norm_[static_cast<std::size_t>(j)]);
        }
    }
    double jitter = 1e-12;
    for (;;) {
        Eigen::MatrixXd kn = k + (noise_variance_ + jitter) * Eigen::MatrixXd::Identity(n, n);
        chol_.compute(kn);
        if (chol_.info() == Eigen::Success) break;
        jitter *= 10.0;
        if (jitter > 1e-6) throw std::runtime_error("gp: kernel matrix not positive definite");
    }
    alpha_ = chol_.solve(targets_);
}

double GpSurrogate::evaluate_hypers(const Eigen::VectorXd& lengthscales, double noise_var) {
    lengthscales_ = lengthscales;
    noise_variance_ = noise_var;
    factorize();
    const int n = static_cast<int>(train_norm_.size());
    double log_det = 0.0;
    for (int i = 0; i < n; ++i) log_det += std::log(chol_.matrixLLT()(i, i));
    return -0.5 * targets_.dot(alpha_) - log_det - 0.5 * n * std::log(2.0 * M_PI);
}

void GpSurrogate::fit(const std::vector<Eigen::VectorXd>& inputs, const std::vector<double>& costs,
                      double fixed_noise_variance) {
    if (inputs.size() != costs.size() || inputs.size() < 2) {
        throw std::invalid_argument("gp: need at least two observations");
    }
    const int d = box_.dim();
    train_norm_.clear();
    train_norm_.reserve(inputs.size());
    for (const auto& x : inputs) {
        if (x.size() != d) throw std::invalid_argument("gp: input dimension mismatch");
        train_norm_.push_back(box_.normalize(x));
    }
    bool distinct = false;
    for (std::size_t i = 1; i < train_norm_.size() && !distinct; ++i) {
        if ((train_norm_[i] - train_norm_[0]).lpNorm<Eigen::Infinity>() > 1e-12) distinct = true;
    }
    if (!distinct) throw std::invalid_argument("gp: degenerate data, all inputs identical");

    const int n = static_cast<int>(costs.size());
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = costs[static_cast<std::size_t>(i)];
    cost_mean_ = y.mean();
    const double var = (y.array() - cost_mean_).square().sum() / std::max(1, n - 1);
    cost_std_ = var > 1e-300 ? std::sqrt(var) : 1.0;
    targets_ = (y.array() - cost_mean_) / cost_std_;
    signal_variance_ = 1.0;

    const double ls_grid[] = {0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0};
    const double noise_grid[] = {1e-8, 1e-6, 1e-4, 1e-2};

    double best = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_ls = Eigen::VectorXd::Constant(d, 0.5);
    double best_noise = fixed_noise_variance >= 0.0 ? fixed_noise_variance : 1e-6;
    for (double ls : ls_grid) {
        const Eigen::VectorXd cand_ls = Eigen::VectorXd::Constant(d, ls);
        if (fixed_noise_variance >= 0.0) {
            const double lml = evaluate_hypers(cand_ls, fixed_noise_variance);
            if (lml > best) {
                best = lml;
                best_ls = cand_ls;
            }
        } else {
            for (double nv : noise_grid) {
                const double lml = evaluate_hypers(cand_ls, nv);
                if (lml > best) {
                    best = lml;
                    best_ls = cand_ls;
                    best_noise = nv;
                }
            }
        }
    }
    // per-dimension (ARD) refinement passes
    for (int pass = 0; pass < 2; ++pass) {
        for (int dim = 0; dim < d; ++dim) {
            for (double factor : {0.5, 2.0}) {
                Eigen::VectorXd cand = best_ls;
                cand(dim) = std::clamp(cand(dim) * factor, 0.02, 4.0);
                const double lml = evaluate_hypers(cand, best_noise);
                if (lml > best) {
                    best = lml;
                    best_ls = cand;
                }
            }
        }
    }
    best_lml_ = evaluate_hypers(best_ls, best_noise);
    fitted_ = true;
}

GpPosterior GpSurrogate::posterior(const Eigen::VectorXd& x) const {
    if (!fitted_) throw std::runtime_error("gp: posterior queried before fit");
    const Eigen::VectorXd q = box_.normalize(x);
    const int n = static_cast<int>(train_norm_.size());
    Eigen::VectorXd kvec(n);
    for (int i = 0; i < n; ++i) kvec(i) = kernel(q, train_norm_[static_cast<std::size_t>(i)]);
    const double mean_std = kvec.dot(alpha_);
    const Eigen::VectorXd v = chol_.matrixL().solve(kvec);
    const double var_std = std::max(0.0, signal_variance_ - v.squaredNorm());
    GpPosterior post;
    post.mean = cost_mean_ + cost_std_ * mean_std;
    post.variance = cost_std_ * cost_std_ * var_std;
    return post;
}

double expected_improvement(const GpSurrogate& gp, const Eigen::VectorXd& x, double incumbent_cost) {
    const GpPosterior post = gp.posterior(x);
    const double sigma = std::sqrt(std::max(0.0, post.variance));
    const double gap = incumbent_cost - post.mean;
    if (sigma < 1e-12) return std::max(0.0, gap);
    const double z = gap / sigma;
    return gap * standard_normal_cdf(z) + sigma * standard_normal_pdf(z);
}

Eigen::VectorXd acquisition_argmax(const GpSurrogate& gp, const ParameterBox& box, double incumbent_cost,
                                   std::uint64_t seed) {
    box.validate();
    const int d = box.dim();
    if (d > static_cast<int>(sizeof(kPrimes) / sizeof(kPrimes[0]))) {
        throw std::invalid_argument("acquisition: dimension too large for the Halton bases");
    }
    const std::uint64_t offset = 17 + seed % 4096;

    Eigen::VectorXd best_x;
    double best_ei = -1.0;
    Eigen::VectorXd best_mean_x;
    double best_mean = std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 0; k < 2048; ++k) {
        Eigen::VectorXd u(d);
        for (int i = 0; i < d; ++i) u(i) = halton(offset + k, kPrimes[i]);
        const Eigen::VectorXd x = box.denormalize(u);
        const double ei = expected_improvement(gp, x, incumbent_cost);
        if (ei > best_ei) {
            best_ei = ei;
            best_x = x;
        }
        const double mean = gp.posterior(x).mean;
        if (mean < best_mean) {
            best_mean = mean;
            best_mean_x = x;
        }
    }
    // Certain-everywhere surrogate: EI collapses, exploit the mean.
    Eigen::VectorXd x = best_ei > 1e-300 ? best_x : best_mean_x;
    auto score = [&](const Eigen::VectorXd& p) {
        return best_ei > 1e-300 ? expected_improvement(gp, p, incumbent_cost) : -gp.posterior(p).mean;
    };

    // Shrinking pattern-search polish, projected into the box.
    Eigen::VectorXd step = (box.upper - box.lower) / 16.0;
    double current = score(x);
    for (int round = 0; round < 24; ++round) {
        bool improved = false;
        for (int i = 0; i < d; ++i) {
            for (double sign : {1.0, -1.0}) {
                Eigen::VectorXd cand = x;
                cand(i) = std::clamp(cand(i) + sign * step(i), box.lower(i), box.upper(i));
                const double s = score(cand);
                if (s > current + 1e-18) {
                    current = s;
                    x = cand;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
        if (step.maxCoeff() < 1e-9 * (box.upper - box.lower).maxCoeff()) break;
    }
    return x;
}

std::vector<Eigen::VectorXd> latin_hypercube(const ParameterBox& box, int count, std::uint64_t seed) {
    box.validate();
    if (count < 1) throw std::invalid_argument("lhs: count must be >= 1");
    const int d = box.dim();
    GaussianRng rng(seed * 2654435761ull + 13);
    std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(count), Eigen::VectorXd::Zero(d));
    for (int dim = 0; dim < d; ++dim) {
        std::vector<int> perm(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) perm[static_cast<std::size_t>(i)] = i;
        for (int i = count - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
            std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
        for (int i = 0; i < count; ++i) {
            const double u = (perm[static_cast<std::size_t>(i)] + rng.uniform()) / count;
            out[static_cast<std::size_t>(i)](dim) = box.lower(dim) + u * (box.upper(dim) - box.lower(dim));
        }
    }
    return out;
}

}  // namespace til
