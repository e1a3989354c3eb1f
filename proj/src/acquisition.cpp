#include "ragopt/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ragopt/sobol.hpp"

namespace ragopt {

namespace {

constexpr int kSobolStarts = 16;
constexpr int kRefineStarts = 8;
constexpr double kRefineSteps[] = {0.25, 0.08, 0.03};

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows, std::size_t d) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

double log_mean_improvement(const std::vector<double>& improvements) {
    double sum = 0.0;
    for (const double v : improvements) sum += v;
    return std::log(sum / static_cast<double>(improvements.size()) + kLogFloor);
}

}  // namespace

double score(const AcquisitionContext& ctx, const std::vector<double>& candidate) {
    const std::size_t k = ctx.models.size();
    if (k == 0 || ctx.observed.empty())
        throw std::invalid_argument("score: context needs models and observations");
    const auto d = static_cast<std::size_t>(ctx.models.front().dimension());
    if (candidate.size() != d) throw std::invalid_argument("score: candidate dimension mismatch");
    const std::size_t n = ctx.inputs.size();

    if (ctx.variant == AcquisitionVariant::Noiseless) {
        std::vector<ObjectiveVector> front;
        for (const auto i : non_dominated_indices(ctx.observed)) front.push_back(ctx.observed[i]);

        Eigen::MatrixXd point(1, static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j) point(0, static_cast<Eigen::Index>(j)) = candidate[j];
        std::vector<Eigen::MatrixXd> draws;  // each mc_draws x 1
        draws.reserve(k);
        for (std::size_t m = 0; m < k; ++m) {
            Rng rng(mix64(ctx.seed, 0xd7a35ull, m));
            draws.push_back(sample_posterior(ctx.models[m], point, ctx.mc_draws, rng));
        }
        std::vector<double> improvements(ctx.mc_draws);
        ObjectiveVector y(k);
        for (int t = 0; t < ctx.mc_draws; ++t) {
            for (std::size_t m = 0; m < k; ++m) {
                y[m] = draws[m](t, 0);
                if (!std::isfinite(y[m])) return std::numeric_limits<double>::quiet_NaN();
            }
            improvements[t] = hypervolume_improvement(y, front, ctx.reference);
        }
        return log_mean_improvement(improvements);
    }

    // Noisy variant: joint draw at [observed inputs; candidate]; each MC
    // scenario re-forms the baseline front from the observed-input rows.
    Eigen::MatrixXd points(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ctx.inputs[i][j];
    for (std::size_t j = 0; j < d; ++j)
        points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) = candidate[j];

    std::vector<Eigen::MatrixXd> draws;  // each mc_draws x (n+1)
    draws.reserve(k);
    for (std::size_t m = 0; m < k; ++m) {
        Rng rng(mix64(ctx.seed, 0xd7a35ull, m));
        draws.push_back(sample_posterior(ctx.models[m], points, ctx.mc_draws, rng));
    }

    std::vector<double> improvements(ctx.mc_draws);
    std::vector<ObjectiveVector> scenario(n, ObjectiveVector(k));
    ObjectiveVector y(k);
    for (int t = 0; t < ctx.mc_draws; ++t) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t m = 0; m < k; ++m)
                scenario[i][m] = draws[m](t, static_cast<Eigen::Index>(i));
        for (std::size_t m = 0; m < k; ++m) {
            y[m] = draws[m](t, static_cast<Eigen::Index>(n));
            if (!std::isfinite(y[m])) return std::numeric_limits<double>::quiet_NaN();
        }
        std::vector<ObjectiveVector> front;
        for (const auto i : non_dominated_indices(scenario)) front.push_back(scenario[i]);
        improvements[t] = hypervolume_improvement(y, front, ctx.reference);
    }
    return log_mean_improvement(improvements);
}

namespace {

// One refinement trajectory: score-driven coordinate probes on scalar
// coordinates plus exhaustive one-hot enumeration. All probes are snapped to
// feasible encodings before scoring.
struct Refiner {
    const AcquisitionContext& ctx;
    const SearchSpace& space;
    std::map<std::vector<double>, double> cache;

    std::vector<double> snap(const std::vector<double>& x) const {
        return space.encode(space.decode(x));
    }

    double scored(const std::vector<double>& snapped) {
        const auto it = cache.find(snapped);
        if (it != cache.end()) return it->second;
        const double s = score(ctx, snapped);
        cache.emplace(snapped, s);
        return s;
    }

    std::pair<std::vector<double>, double> refine(std::vector<double> x) {
        x = snap(x);
        double best = scored(x);
        for (const double step : kRefineSteps) {
            std::size_t offset = 0;
            for (const auto& p : space.parameters()) {
                if (p.is_categorical()) {
                    const auto width = p.encoded_width();
                    for (std::size_t j = 0; j < width; ++j) {
                        std::vector<double> cand = x;
                        for (std::size_t l = 0; l < width; ++l) cand[offset + l] = (l == j) ? 1.0 : 0.0;
                        cand = snap(cand);
                        const double s = scored(cand);
                        if (s > best) {
                            best = s;
                            x = std::move(cand);
                        }
                    }
                    offset += width;
                } else {
                    for (const double delta : {step, -step}) {
                        std::vector<double> cand = x;
                        cand[offset] = std::clamp(cand[offset] + delta, 0.0, 1.0);
                        cand = snap(cand);
                        const double s = scored(cand);
                        if (s > best) {
                            best = s;
                            x = std::move(cand);
                        }
                    }
                    offset += 1;
                }
            }
        }
        return {x, best};
    }
};

}  // namespace

Proposal propose(const AcquisitionContext& ctx, const SearchSpace& space, Rng& rng, Exec exec) {
    if (ctx.observed.size() < 2)
        throw std::invalid_argument("propose: need at least two observations");
    const std::size_t d = space.encoded_dimension();

    // Starts: scrambled Sobol batch plus the current Pareto members.
    std::vector<std::vector<double>> starts;
    SobolStream stream(static_cast<unsigned>(d), rng());
    for (int i = 0; i < kSobolStarts; ++i) starts.push_back(stream.next());
    for (const auto i : non_dominated_indices(ctx.observed)) starts.push_back(ctx.inputs[i]);

    std::vector<std::vector<double>> snapped(starts.size());
    std::vector<double> start_scores(starts.size());
    const auto n_starts = static_cast<std::int64_t>(starts.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
    for (std::int64_t i = 0; i < n_starts; ++i) {
        snapped[i] = space.encode(space.decode(starts[i]));
        start_scores[i] = score(ctx, snapped[i]);
    }

    // Keep the best kRefineStarts starts for local refinement.
    std::vector<std::size_t> order(starts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (std::isfinite(start_scores[a]) != std::isfinite(start_scores[b]))
            return std::isfinite(start_scores[a]);
        return start_scores[a] > start_scores[b];
    });
    const auto n_refine = static_cast<std::int64_t>(
        std::min<std::size_t>(kRefineStarts, order.size()));

    std::vector<std::vector<double>> refined(n_refine);
    std::vector<double> refined_scores(n_refine,
                                       -std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
    for (std::int64_t i = 0; i < n_refine; ++i) {
        if (!std::isfinite(start_scores[order[i]])) continue;
        Refiner refiner{ctx, space, {}};
        auto [x, s] = refiner.refine(snapped[order[i]]);
        refined[i] = std::move(x);
        refined_scores[i] = s;
    }

    std::int64_t best = -1;
    for (std::int64_t i = 0; i < n_refine; ++i)
        if (std::isfinite(refined_scores[i]) && (best < 0 || refined_scores[i] > refined_scores[best]))
            best = i;

    Proposal out;
    if (best < 0) {  // every score non-finite: degrade to the next Sobol point
        out.config = space.decode(stream.next());
        out.fallback = true;
        out.score = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.config = space.decode(refined[best]);
    out.score = refined_scores[best];
    return out;
}

}  // namespace ragopt
