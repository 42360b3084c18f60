#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace riggeo {

struct Interval;

/// Deterministic 64-bit generator (splitmix64). Small, serializable state and
/// identical streams on every platform, which keeps reports byte-stable.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0, 1) with 53 significant bits.
    double uniform() { return std::ldexp(static_cast<double>(next() >> 11), -53); }
    double in(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

/// Van der Corput radical inverse of `index` in the given base.
double halton(std::uint64_t index, int base);

/// Low-discrepancy point inside a box, coordinate d using the d-th prime
/// base (2, 3, 5, 7, 11, 13). Index 0 maps to the box corner; callers start
/// at 1. Supports up to 6 dimensions.
std::vector<double> halton_box(std::uint64_t index, std::span<const Interval> box);

} // namespace riggeo
