#pragma once

#include <cstdint>
#include <vector>

#include "ragopt/pareto.hpp"
#include "ragopt/space.hpp"
#include "ragopt/surrogate.hpp"

namespace ragopt {

enum class AcquisitionVariant { Noisy, Noiseless };

// Everything score/propose need for one optimizer iteration. Owns copies;
// immutable and shareable across threads.
struct AcquisitionContext {
    std::vector<GPModel> models;               // one per objective
    std::vector<std::vector<double>> inputs;   // encoded observed inputs
    std::vector<ObjectiveVector> observed;     // raw canonical objective vectors
    ObjectiveVector reference;
    int mc_draws = 128;
    AcquisitionVariant variant = AcquisitionVariant::Noisy;
    std::uint64_t seed = 0;
};

// Smoothing floor inside the log of the MC-averaged improvement.
inline constexpr double kLogFloor = 1e-10;

// log(mean hypervolume improvement + floor) over joint posterior draws at
// the candidate. The noisy variant re-forms the baseline front from a joint
// draw at all observed inputs per MC scenario (shared draws); the noiseless
// variant scores against the front of observed values.
double score(const AcquisitionContext& ctx, const std::vector<double>& candidate);

struct Proposal {
    Configuration config;
    double score = 0.0;
    bool fallback = false;  // all scores non-finite, fell back to a Sobol point
};

// Multi-start maximization of score: a scrambled Sobol batch plus the
// current Pareto members' encodings, then coordinate-wise refinement on
// scalar coordinates and exhaustive enumeration per one-hot block. All
// candidates are scored at their snapped (decoded-and-re-encoded) position,
// so the winner is always feasible. Deterministic per rng state; ties break
// to the lowest start index.
Proposal propose(const AcquisitionContext& ctx, const SearchSpace& space, Rng& rng,
                 Exec exec = Exec::Parallel);

}  // namespace ragopt
