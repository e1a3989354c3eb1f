#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "ragopt/parallel.hpp"
#include "ragopt/rng.hpp"

namespace ragopt {

class IllConditionedFit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Gaussian-process regressor over the unit cube: Matern-5/2 kernel with
// per-dimension lengthscales, fitted output scale and noise variance,
// targets standardized internally. Immutable once built.
struct GPModel {
    Eigen::MatrixXd inputs;       // n x d
    Eigen::VectorXd targets_std;  // standardized targets, length n
    double target_mean = 0.0;
    double target_scale = 1.0;

    Eigen::VectorXd log_lengthscales;  // length d
    double log_signal_variance = 0.0;  // log sigma_f^2
    double log_noise_variance = 0.0;   // log sigma_n^2

    Eigen::LLT<Eigen::MatrixXd> chol;  // of K + (noise + jitter) I
    Eigen::VectorXd alpha;             // chol solve of targets_std
    double jitter = 0.0;

    Eigen::Index size() const { return inputs.rows(); }
    Eigen::Index dimension() const { return inputs.cols(); }
};

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;  // includes the fitted noise variance
};

struct LmlResult {
    double value = 0.0;
    Eigen::VectorXd gradient;  // w.r.t. [log_lengthscales..., log_sf2, log_sn2]
};

inline constexpr double kNoiseFloor = 1e-8;   // variance floor, standardized scale
inline constexpr double kJitterMax = 1e-4;    // jitter escalates x10 from the floor

// Builds a model at fixed hyperparameters (standardizes targets, factorizes
// the kernel matrix with jitter escalation). Throws IllConditionedFit when
// no jitter level factorizes.
GPModel make_model(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                   const Eigen::VectorXd& log_lengthscales, double log_signal_variance,
                   double log_noise_variance);

// Maximizes the log marginal likelihood by multi-start projected gradient
// ascent with backtracking (8 deterministic restarts). Restarts may run in
// parallel; the winner is picked serially (ties to the lowest restart).
GPModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, Exec exec = Exec::Parallel);

// Predictive mean/variance in the original target scale.
Posterior posterior(const GPModel& model, const Eigen::VectorXd& x);

// Joint noise-free draws from the predictive distribution at the given
// points (rows), de-standardized. Exactly duplicated rows receive identical
// draws. Returns n_draws x points.rows().
Eigen::MatrixXd sample_posterior(const GPModel& model, const Eigen::MatrixXd& points, int n_draws,
                                 Rng& rng);

LmlResult log_marginal_likelihood(const GPModel& model);

}  // namespace ragopt
