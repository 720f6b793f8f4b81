#ifndef CAPSET_RNG_HPP
#define CAPSET_RNG_HPP

#include <cstdint>
#include <vector>

namespace capset {

// Counter-based generator: sample i of stream (seed) is a pure function of
// (seed, i), so parallel workers can draw disjoint index ranges and still
// reproduce the serial sequence bit for bit.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t counter) const {
        std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (counter + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1), 53 mantissa bits
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

// Pairwise reduction in fixed index order; the result does not depend on how
// the chunks were produced (serially or by several threads).
inline double pairwise_sum(std::vector<double> v) {
    if (v.empty()) return 0.0;
    while (v.size() > 1) {
        std::size_t half = (v.size() + 1) / 2;
        for (std::size_t i = 0; i + half < v.size(); ++i) v[i] += v[i + half];
        v.resize(half);
    }
    return v[0];
}

} // namespace capset

#endif
