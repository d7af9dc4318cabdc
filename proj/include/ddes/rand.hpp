#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ddes {

// Deterministic RNG wrapper. std::mt19937_64 output is pinned by the standard;
// the uniform/normal transforms below avoid the implementation-defined
// std::*_distribution classes so streams are reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    std::uint64_t bits() { return eng_(); }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace ddes
