#pragma once

#include <cstdint>
#include <vector>

#include "ragopt/parallel.hpp"
#include "ragopt/space.hpp"

namespace ragopt {

// Objective vectors are always in canonical maximization orientation (the
// optimizer negates cost and latency once, at record creation).
using ObjectiveVector = std::vector<double>;

// a >= b componentwise with at least one strict improvement.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// Indices of the non-dominated points, in first-appearance order; identical
// vectors are kept once (first occurrence).
std::vector<std::size_t> non_dominated_indices(const std::vector<ObjectiveVector>& points);

struct ParetoFront {
    std::vector<Configuration> configurations;
    std::vector<ObjectiveVector> objectives;
    ObjectiveVector reference;
};

ParetoFront pareto_set(const std::vector<Configuration>& configurations,
                       const std::vector<ObjectiveVector>& objectives,
                       ObjectiveVector reference);

// Lebesgue measure of the union of boxes [r, p] over members p that strictly
// dominate r. Exact recursive dimension-sweep; supports k in {1..4}.
double hypervolume_exact(const std::vector<ObjectiveVector>& members, const ObjectiveVector& reference);
double hypervolume_exact(const ParetoFront& front);

struct HvEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

// Uniform sampling over the bounding box of the contributing members,
// counting dominated samples. Per-sample counter-based seeding makes the
// result identical in Serial and Parallel modes.
HvEstimate hypervolume_mc(const std::vector<ObjectiveVector>& members, const ObjectiveVector& reference,
                          std::uint64_t n_samples, std::uint64_t seed, Exec exec = Exec::Parallel);

// HV(front ∪ {candidate}) − HV(front), computed as the candidate's exclusive
// box volume minus the hypervolume of the front clipped into that box.
double hypervolume_improvement(const ObjectiveVector& candidate,
                               const std::vector<ObjectiveVector>& front,
                               const ObjectiveVector& reference);

}  // namespace ragopt
