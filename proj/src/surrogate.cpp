#include "ragopt/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ragopt {

namespace {

constexpr double kSqrt5 = 2.2360679774997896;
constexpr int kRestarts = 8;
constexpr int kMaxAscentIters = 150;
constexpr std::uint64_t kFitSeed = 0x5a11e1ull;

constexpr double kLogLsMin = -4.605170185988091;   // ln 1e-2
constexpr double kLogLsMax = 4.605170185988092;    // ln 1e2
constexpr double kLogSf2Min = -9.210340371976182;  // ln 1e-4
constexpr double kLogSf2Max = 9.210340371976184;   // ln 1e4
const double kLogSn2Min = std::log(kNoiseFloor);
constexpr double kLogSn2Max = 2.302585092994046;   // ln 10

double matern52(double r) { return (1.0 + kSqrt5 * r + 5.0 / 3.0 * r * r) * std::exp(-kSqrt5 * r); }

// Scaled squared distance per dimension: u_i = (x_i - y_i)^2 / l_i^2.
template <typename RowA, typename RowB>
double scaled_sqdist(const Eigen::VectorXd& inv_ls2, const RowA& a, const RowB& b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < inv_ls2.size(); ++i) {
        const double d = a(i) - b(i);
        s += d * d * inv_ls2[i];
    }
    return s;
}

Eigen::VectorXd inverse_lengthscales_sq(const Eigen::VectorXd& log_ls) {
    return (-2.0 * log_ls).array().exp();
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::VectorXd& log_ls, double log_sf2) {
    const Eigen::VectorXd inv_ls2 = inverse_lengthscales_sq(log_ls);
    const double sf2 = std::exp(log_sf2);
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < B.rows(); ++j)
            K(i, j) = sf2 * matern52(std::sqrt(scaled_sqdist(inv_ls2, A.row(i), B.row(j))));
    return K;
}

struct Standardization {
    double mean, scale;
};

Standardization standardize(const Eigen::VectorXd& y) {
    const double mean = y.mean();
    double var = (y.array() - mean).square().sum() / static_cast<double>(y.size());
    double scale = std::sqrt(var);
    if (!(scale > 1e-12)) scale = 1.0;  // constant targets
    return {mean, scale};
}

// Factorize K + (sn2 + jitter) I, escalating jitter x10 up to kJitterMax.
bool factorize(const Eigen::MatrixXd& Kf, double sn2, Eigen::LLT<Eigen::MatrixXd>& llt,
               double& jitter_used) {
    static const double kJitterLadder[] = {0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};
    for (const double jitter : kJitterLadder) {
        Eigen::MatrixXd K = Kf;
        K.diagonal().array() += sn2 + jitter;
        llt.compute(K);
        if (llt.info() == Eigen::Success) {
            jitter_used = jitter;
            return true;
        }
    }
    return false;
}

struct LmlWorkspace {
    double value = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd gradient;
    bool ok = false;
};

// Log marginal likelihood of the standardized targets and its gradient via
// the trace identity d/dt LML = 0.5 tr((aa' - K^{-1}) dK/dt).
LmlWorkspace lml_with_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& z,
                               const Eigen::VectorXd& log_ls, double log_sf2, double log_sn2) {
    LmlWorkspace out;
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const double sf2 = std::exp(log_sf2);
    const double sn2 = std::exp(log_sn2);
    const Eigen::VectorXd inv_ls2 = inverse_lengthscales_sq(log_ls);

    Eigen::MatrixXd R(n, n);  // scaled distances r
    Eigen::MatrixXd Kf(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double r = std::sqrt(scaled_sqdist(inv_ls2, X.row(i), X.row(j)));
            R(i, j) = R(j, i) = r;
            const double k = sf2 * matern52(r);
            Kf(i, j) = Kf(j, i) = k;
        }

    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    if (!factorize(Kf, sn2, llt, jitter)) return out;

    const Eigen::VectorXd alpha = llt.solve(z);
    const Eigen::MatrixXd& packed = llt.matrixLLT();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(packed(i, i));
    out.value = -0.5 * z.dot(alpha) - logdet -
                0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);

    Eigen::MatrixXd G = alpha * alpha.transpose();
    G -= llt.solve(Eigen::MatrixXd::Identity(n, n));

    out.gradient.resize(d + 2);
    // d k / d log l_i = (5/3) sf2 e^{-sqrt5 r} (1 + sqrt5 r) u_i  (smooth at r=0)
    Eigen::MatrixXd E(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double r = R(i, j);
            const double e = (5.0 / 3.0) * sf2 * std::exp(-kSqrt5 * r) * (1.0 + kSqrt5 * r);
            E(i, j) = E(j, i) = e;
        }
    for (Eigen::Index t = 0; t < d; ++t) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const double diff = X(i, t) - X(j, t);
                acc += G(i, j) * E(i, j) * diff * diff * inv_ls2[t];
            }
        out.gradient[t] = 0.5 * acc;
    }
    out.gradient[d] = 0.5 * (G.array() * Kf.array()).sum();
    out.gradient[d + 1] = 0.5 * sn2 * G.trace();
    out.ok = true;
    return out;
}

Eigen::VectorXd clamp_params(Eigen::VectorXd theta, Eigen::Index d) {
    for (Eigen::Index i = 0; i < d; ++i) theta[i] = std::clamp(theta[i], kLogLsMin, kLogLsMax);
    theta[d] = std::clamp(theta[d], kLogSf2Min, kLogSf2Max);
    theta[d + 1] = std::clamp(theta[d + 1], kLogSn2Min, kLogSn2Max);
    return theta;
}

struct AscentResult {
    Eigen::VectorXd theta;
    double lml = -std::numeric_limits<double>::infinity();
};

AscentResult ascend(const Eigen::MatrixXd& X, const Eigen::VectorXd& z, Eigen::VectorXd theta) {
    const Eigen::Index d = X.cols();
    theta = clamp_params(std::move(theta), d);
    auto eval = [&](const Eigen::VectorXd& t) {
        return lml_with_gradient(X, z, t.head(d), t[d], t[d + 1]);
    };
    LmlWorkspace cur = eval(theta);
    if (!cur.ok) return {theta, cur.value};
    double step = 0.1;
    for (int iter = 0; iter < kMaxAscentIters; ++iter) {
        const double gnorm = cur.gradient.norm();
        if (gnorm < 1e-7) break;
        bool improved = false;
        for (int bt = 0; bt < 25; ++bt) {
            const Eigen::VectorXd cand = clamp_params(theta + (step / gnorm) * cur.gradient, d);
            if ((cand - theta).norm() < 1e-12) break;
            const LmlWorkspace next = eval(cand);
            if (next.ok && next.value > cur.value + 1e-12) {
                const double gain = next.value - cur.value;
                theta = cand;
                cur = next;
                improved = true;
                step = std::min(step * 1.5, 2.0);
                if (gain < 1e-9 * (1.0 + std::abs(cur.value))) iter = kMaxAscentIters;  // converged
                break;
            }
            step *= 0.4;
        }
        if (!improved) break;
    }
    return {theta, cur.value};
}

}  // namespace

GPModel make_model(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                   const Eigen::VectorXd& log_lengthscales, double log_signal_variance,
                   double log_noise_variance) {
    if (inputs.rows() != targets.size())
        throw std::invalid_argument("make_model: inputs and targets differ in length");
    if (inputs.rows() < 1) throw std::invalid_argument("make_model: need at least one point");
    if (log_lengthscales.size() != inputs.cols())
        throw std::invalid_argument("make_model: lengthscale count must match input dimension");

    GPModel m;
    m.inputs = inputs;
    const auto st = standardize(targets);
    m.target_mean = st.mean;
    m.target_scale = st.scale;
    m.targets_std = (targets.array() - st.mean) / st.scale;
    m.log_lengthscales = log_lengthscales;
    m.log_signal_variance = log_signal_variance;
    m.log_noise_variance = std::max(log_noise_variance, std::log(kNoiseFloor));

    const Eigen::MatrixXd Kf =
        kernel_matrix(inputs, inputs, m.log_lengthscales, m.log_signal_variance);
    if (!factorize(Kf, std::exp(m.log_noise_variance), m.chol, m.jitter))
        throw IllConditionedFit("kernel matrix not positive definite after jitter escalation");
    m.alpha = m.chol.solve(m.targets_std);
    return m;
}

GPModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, Exec exec) {
    if (inputs.rows() < 2) throw std::invalid_argument("fit: need at least two points");
    const Eigen::Index d = inputs.cols();
    const auto st = standardize(targets);
    const Eigen::VectorXd z = (targets.array() - st.mean) / st.scale;

    std::vector<Eigen::VectorXd> starts(kRestarts);
    for (int r = 0; r < kRestarts; ++r) {
        Eigen::VectorXd theta(d + 2);
        if (r == 0) {
            theta.head(d).setConstant(std::log(0.5));
            theta[d] = 0.0;           // sf2 = 1
            theta[d + 1] = std::log(1e-2);
        } else {
            Rng rng(mix64(kFitSeed, static_cast<std::uint64_t>(r)));
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (Eigen::Index i = 0; i < d; ++i)
                theta[i] = std::log(0.05) + u(rng) * (std::log(5.0) - std::log(0.05));
            theta[d] = std::log(0.1) + u(rng) * (std::log(10.0) - std::log(0.1));
            theta[d + 1] = std::log(1e-6) + u(rng) * (std::log(1.0) - std::log(1e-6));
        }
        starts[r] = std::move(theta);
    }

    std::vector<AscentResult> results(kRestarts);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
    for (int r = 0; r < kRestarts; ++r) results[r] = ascend(inputs, z, starts[r]);

    int best = -1;
    for (int r = 0; r < kRestarts; ++r)
        if (std::isfinite(results[r].lml) && (best < 0 || results[r].lml > results[best].lml))
            best = r;
    if (best < 0) throw IllConditionedFit("no restart produced a factorizable kernel matrix");

    const Eigen::VectorXd& theta = results[best].theta;
    return make_model(inputs, targets, theta.head(d), theta[d], theta[d + 1]);
}

Posterior posterior(const GPModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.dimension())
        throw std::invalid_argument("posterior: point dimension mismatch");
    const Eigen::MatrixXd kx =
        kernel_matrix(model.inputs, x.transpose(), model.log_lengthscales, model.log_signal_variance);
    const Eigen::VectorXd ks = kx.col(0);
    const double sf2 = std::exp(model.log_signal_variance);
    const double sn2 = std::exp(model.log_noise_variance);
    const double mean_std = ks.dot(model.alpha);
    const Eigen::VectorXd v = model.chol.solve(ks);
    const double var_std = std::max(0.0, sf2 - ks.dot(v)) + sn2;
    return {model.target_mean + model.target_scale * mean_std,
            model.target_scale * model.target_scale * var_std};
}

Eigen::MatrixXd sample_posterior(const GPModel& model, const Eigen::MatrixXd& points, int n_draws,
                                 Rng& rng) {
    if (n_draws < 1) throw std::invalid_argument("sample_posterior: n_draws must be >= 1");
    if (points.cols() != model.dimension())
        throw std::invalid_argument("sample_posterior: point dimension mismatch");
    const Eigen::Index m = points.rows();

    // Collapse exactly-duplicated rows so perfectly correlated points get
    // identical draws and the predictive covariance stays factorizable.
    std::vector<Eigen::Index> unique_rows;
    std::vector<Eigen::Index> owner(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Index found = -1;
        for (std::size_t u = 0; u < unique_rows.size() && found < 0; ++u)
            if ((points.row(i).array() == points.row(unique_rows[u]).array()).all())
                found = static_cast<Eigen::Index>(u);
        if (found < 0) {
            unique_rows.push_back(i);
            owner[i] = static_cast<Eigen::Index>(unique_rows.size()) - 1;
        } else {
            owner[i] = found;
        }
    }
    const auto mu_n = static_cast<Eigen::Index>(unique_rows.size());
    Eigen::MatrixXd P(mu_n, points.cols());
    for (Eigen::Index u = 0; u < mu_n; ++u) P.row(u) = points.row(unique_rows[u]);

    const Eigen::MatrixXd Kpx =
        kernel_matrix(P, model.inputs, model.log_lengthscales, model.log_signal_variance);
    const Eigen::MatrixXd Kpp =
        kernel_matrix(P, P, model.log_lengthscales, model.log_signal_variance);
    const Eigen::VectorXd mean = Kpx * model.alpha;
    const Eigen::MatrixXd cov = Kpp - Kpx * model.chol.solve(Kpx.transpose());

    Eigen::LLT<Eigen::MatrixXd> llt;
    bool ok = false;
    for (double jitter = kNoiseFloor; jitter <= kJitterMax; jitter *= 10.0) {
        Eigen::MatrixXd C = 0.5 * (cov + cov.transpose());
        C.diagonal().array() += jitter;
        llt.compute(C);
        if (llt.info() == Eigen::Success) {
            ok = true;
            break;
        }
    }
    if (!ok) throw IllConditionedFit("predictive covariance not factorizable after jitter escalation");
    const Eigen::MatrixXd L = llt.matrixL();

    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd draws(n_draws, m);
    Eigen::VectorXd xi(mu_n);
    for (int t = 0; t < n_draws; ++t) {
        for (Eigen::Index u = 0; u < mu_n; ++u) xi[u] = gauss(rng);
        const Eigen::VectorXd f = mean + L * xi;
        for (Eigen::Index i = 0; i < m; ++i)
            draws(t, i) = model.target_mean + model.target_scale * f[owner[i]];
    }
    return draws;
}

LmlResult log_marginal_likelihood(const GPModel& model) {
    const auto w = lml_with_gradient(model.inputs, model.targets_std, model.log_lengthscales,
                                     model.log_signal_variance, model.log_noise_variance);
    if (!w.ok) throw IllConditionedFit("kernel matrix not positive definite");
    return {w.value, w.gradient};
}

}  // namespace ragopt
