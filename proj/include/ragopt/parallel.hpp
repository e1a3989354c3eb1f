#pragma once

namespace ragopt {

// Execution mode for the data-parallel kernels (MC hypervolume, per-query
// workload evaluation, GP restart fitting, multi-start acquisition search).
// Every parallel kernel is written so that Serial and Parallel produce
// bit-identical results: per-index seeding, per-slot output buffers, and
// serial reductions/argmax. Tests assert the equivalence and
// tools/perf_compare.cpp times the two modes against each other.
enum class Exec { Serial, Parallel };

}  // namespace ragopt
