#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "efpix/bytes.hpp"

namespace efpix {

// splitmix64 generator. Deterministic across platforms, unlike the standard
// library distributions, which is what the simulator's reproducibility
// contract rests on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }

    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {  // inclusive bounds
        return lo + below(hi - lo + 1);
    }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Exponentially distributed microsecond interval with the given mean.
    std::uint64_t exp_interval(double mean_us) {
        double u = unit();
        if (u >= 1.0) u = 0.9999999999;
        double v = -std::log(1.0 - u) * mean_us;
        if (v < 1.0) return 1;
        return static_cast<std::uint64_t>(v);
    }

    void fill(std::span<std::uint8_t> out) {
        std::size_t i = 0;
        while (i < out.size()) {
            std::uint64_t v = next();
            for (int j = 0; j < 8 && i < out.size(); ++j, ++i) {
                out[i] = static_cast<std::uint8_t>(v >> (8 * j));
            }
        }
    }

    Seed32 seed32() {
        Seed32 s{};
        fill(s);
        return s;
    }

    // Independent child stream; pulling from the child does not advance this one.
    Rng fork(std::uint64_t stream) {
        Rng child(state_ ^ (0x5851f42d4c957f2dULL * (stream + 1)));
        child.next();
        return child;
    }

private:
    std::uint64_t state_;
};

}  // namespace efpix
