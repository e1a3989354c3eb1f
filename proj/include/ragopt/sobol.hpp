#pragma once

#include <cstdint>
#include <vector>

namespace ragopt {

// Scrambled Sobol low-discrepancy stream in [0,1)^d, dimensions 1..64,
// Joe-Kuo D6 direction numbers, 64-bit states, digital-shift XOR scrambling.
// The all-zeros origin point (sequence index 0) is skipped by default; use
// seek(0) to include it. Reproducible from (dimension, scramble_seed, index).
class SobolStream {
public:
    SobolStream(unsigned dimension, std::uint64_t scramble_seed);
    static SobolStream unscrambled(unsigned dimension);

    unsigned dimension() const { return dim_; }
    std::uint64_t index() const { return index_; }  // sequence index of the next point

    std::vector<double> next();
    void seek(std::uint64_t index);
    SobolStream clone_at(std::uint64_t index) const;

    static constexpr unsigned kMaxDimension = 64;

private:
    SobolStream(unsigned dimension, std::uint64_t scramble_seed, bool scramble);

    unsigned dim_;
    std::uint64_t index_ = 0;
    std::vector<std::uint64_t> state_;       // integer state of the point at index_
    std::vector<std::uint64_t> shift_;       // per-dimension digital shift
    std::vector<std::uint64_t> directions_;  // dim_ * 64, row-major
};

}  // namespace ragopt
