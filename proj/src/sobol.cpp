#include "ragopt/sobol.hpp"

#include <bit>
#include <stdexcept>

#include "ragopt/rng.hpp"

namespace ragopt {

namespace {

#include "sobol_directions.inc"

constexpr int kBits = 64;

// Direction numbers for one dimension, v_j scaled so that bit j of the
// state corresponds to 2^-(j+1).
void build_directions(unsigned dim_index, std::uint64_t* v) {
    if (dim_index == 0) {
        for (int j = 0; j < kBits; ++j) v[j] = 1ULL << (63 - j);
        return;
    }
    const DirectionRow& row = kDirectionRows[dim_index - 1];
    const unsigned s = row.s;
    for (unsigned j = 0; j < s; ++j) v[j] = static_cast<std::uint64_t>(row.m[j]) << (63 - j);
    for (unsigned j = s; j < kBits; ++j) {
        std::uint64_t x = v[j - s] ^ (v[j - s] >> s);
        for (unsigned i = 1; i < s; ++i)
            if ((row.a >> (s - 1 - i)) & 1U) x ^= v[j - i];
        v[j] = x;
    }
}

}  // namespace

SobolStream::SobolStream(unsigned dimension, std::uint64_t scramble_seed)
    : SobolStream(dimension, scramble_seed, /*scramble=*/true) {}

SobolStream SobolStream::unscrambled(unsigned dimension) {
    return SobolStream(dimension, 0, /*scramble=*/false);
}

SobolStream::SobolStream(unsigned dimension, std::uint64_t scramble_seed, bool scramble)
    : dim_(dimension) {
    if (dim_ < 1 || dim_ > kMaxDimension)
        throw std::invalid_argument("SobolStream: dimension must be in [1, " +
                                    std::to_string(kMaxDimension) + "]");
    directions_.resize(static_cast<std::size_t>(dim_) * kBits);
    for (unsigned d = 0; d < dim_; ++d) build_directions(d, &directions_[d * kBits]);
    shift_.assign(dim_, 0);
    if (scramble) {
        Rng rng(mix64(scramble_seed));
        for (auto& s : shift_) s = rng();
    }
    state_.assign(dim_, 0);
    seek(1);  // skip the origin point
}

void SobolStream::seek(std::uint64_t index) {
    index_ = index;
    const std::uint64_t gray = index ^ (index >> 1);
    for (unsigned d = 0; d < dim_; ++d) {
        std::uint64_t x = 0;
        for (int j = 0; j < kBits; ++j)
            if ((gray >> j) & 1ULL) x ^= directions_[d * kBits + j];
        state_[d] = x;
    }
}

std::vector<double> SobolStream::next() {
    std::vector<double> point(dim_);
    for (unsigned d = 0; d < dim_; ++d)
        point[d] = static_cast<double>(state_[d] ^ shift_[d]) * 0x1.0p-64;
    ++index_;
    const int bit = std::countr_zero(index_);
    if (bit < kBits)  // index_ == 0 only after 2^64 points
        for (unsigned d = 0; d < dim_; ++d) state_[d] ^= directions_[d * kBits + bit];
    return point;
}

SobolStream SobolStream::clone_at(std::uint64_t index) const {
    SobolStream copy = *this;
    copy.seek(index);
    return copy;
}

}  // namespace ragopt
