#include "ragopt/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ragopt/rng.hpp"

namespace ragopt {

namespace {

void require_same_dimension(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("objective vectors have mismatched dimensions");
}

// Recursive dimension-sweep over a set of points known to strictly dominate
// the reference. `idx` selects the active points; only the first k
// coordinates of each point are live at a given recursion depth.
double hv_sweep(const std::vector<ObjectiveVector>& pts, std::vector<std::size_t> idx,
                const ObjectiveVector& ref, std::size_t k) {
    if (idx.empty()) return 0.0;
    if (k == 1) {
        double best = ref[0];
        for (const auto i : idx) best = std::max(best, pts[i][0]);
        return best - ref[0];
    }
    if (k == 2) {
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (pts[a][0] != pts[b][0]) return pts[a][0] > pts[b][0];
            return a < b;
        });
        double area = 0.0;
        double covered = ref[1];
        for (const auto i : idx) {
            if (pts[i][1] > covered) {
                area += (pts[i][0] - ref[0]) * (pts[i][1] - covered);
                covered = pts[i][1];
            }
        }
        return area;
    }
    // Slice on the last coordinate: each slab contributes its height times
    // the (k-1)-dimensional hypervolume of the points reaching above it.
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a][k - 1] != pts[b][k - 1]) return pts[a][k - 1] > pts[b][k - 1];
        return a < b;
    });
    double volume = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const double high = pts[idx[j]][k - 1];
        const double low = (j + 1 < idx.size()) ? pts[idx[j + 1]][k - 1] : ref[k - 1];
        if (high <= low) continue;
        std::vector<std::size_t> prefix(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(j) + 1);
        volume += (high - low) * hv_sweep(pts, std::move(prefix), ref, k - 1);
    }
    return volume;
}

std::vector<std::size_t> strictly_dominating_indices(const std::vector<ObjectiveVector>& members,
                                                     const ObjectiveVector& reference) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < members.size(); ++i) {
        require_same_dimension(members[i], reference);
        bool above = true;
        for (std::size_t d = 0; d < reference.size(); ++d)
            if (!(members[i][d] > reference[d])) {
                above = false;
                break;
            }
        if (above) idx.push_back(i);
    }
    return idx;
}

}  // namespace

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    require_same_dimension(a, b);
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

std::vector<std::size_t> non_dominated_indices(const std::vector<ObjectiveVector>& points) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool keep = true;
        for (std::size_t j = 0; j < points.size() && keep; ++j) {
            if (j == i) continue;
            if (dominates(points[j], points[i])) keep = false;
            else if (j < i && points[j] == points[i]) keep = false;  // duplicates kept once
        }
        if (keep) out.push_back(i);
    }
    return out;
}

ParetoFront pareto_set(const std::vector<Configuration>& configurations,
                       const std::vector<ObjectiveVector>& objectives,
                       ObjectiveVector reference) {
    if (configurations.size() != objectives.size())
        throw std::invalid_argument("pareto_set: configurations and objectives differ in length");
    ParetoFront front;
    front.reference = std::move(reference);
    for (const auto i : non_dominated_indices(objectives)) {
        front.configurations.push_back(configurations[i]);
        front.objectives.push_back(objectives[i]);
    }
    return front;
}

double hypervolume_exact(const std::vector<ObjectiveVector>& members, const ObjectiveVector& reference) {
    const std::size_t k = reference.size();
    if (k < 1 || k > 4)
        throw std::invalid_argument("hypervolume_exact supports k in {1..4}; use hypervolume_mc");
    return hv_sweep(members, strictly_dominating_indices(members, reference), reference, k);
}

double hypervolume_exact(const ParetoFront& front) {
    return hypervolume_exact(front.objectives, front.reference);
}

HvEstimate hypervolume_mc(const std::vector<ObjectiveVector>& members, const ObjectiveVector& reference,
                          std::uint64_t n_samples, std::uint64_t seed, Exec exec) {
    if (n_samples == 0) throw std::invalid_argument("hypervolume_mc: n_samples must be positive");
    const std::size_t k = reference.size();
    const auto contrib = strictly_dominating_indices(members, reference);
    if (contrib.empty()) return {0.0, 0.0};

    ObjectiveVector upper(reference);
    for (const auto i : contrib)
        for (std::size_t d = 0; d < k; ++d) upper[d] = std::max(upper[d], members[i][d]);
    double box = 1.0;
    for (std::size_t d = 0; d < k; ++d) box *= upper[d] - reference[d];
    if (!(box > 0.0)) return {0.0, 0.0};

    const auto n = static_cast<std::int64_t>(n_samples);
    std::int64_t hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(static) if (exec == Exec::Parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        SplitMix64 g(mix64(seed, static_cast<std::uint64_t>(i)));
        double y[4];
        for (std::size_t d = 0; d < k; ++d)
            y[d] = reference[d] + (upper[d] - reference[d]) * g.next_double();
        for (const auto m : contrib) {
            bool dominated = true;
            for (std::size_t d = 0; d < k; ++d)
                if (members[m][d] < y[d]) {
                    dominated = false;
                    break;
                }
            if (dominated) {
                hits += 1;
                break;
            }
        }
    }
    const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
    return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples))};
}

double hypervolume_improvement(const ObjectiveVector& candidate,
                               const std::vector<ObjectiveVector>& front,
                               const ObjectiveVector& reference) {
    require_same_dimension(candidate, reference);
    const std::size_t k = reference.size();
    double box = 1.0;
    for (std::size_t d = 0; d < k; ++d) {
        if (!(candidate[d] > reference[d])) return 0.0;
        box *= candidate[d] - reference[d];
    }
    // Clip every front member into the candidate's box; the overlap of the
    // dominated regions is exactly the hypervolume of the clipped set.
    std::vector<ObjectiveVector> clipped;
    clipped.reserve(front.size());
    for (const auto& p : front) {
        require_same_dimension(p, reference);
        ObjectiveVector q(k);
        for (std::size_t d = 0; d < k; ++d) q[d] = std::min(p[d], candidate[d]);
        clipped.push_back(std::move(q));
    }
    return std::max(0.0, box - hypervolume_exact(clipped, reference));
}

}  // namespace ragopt
