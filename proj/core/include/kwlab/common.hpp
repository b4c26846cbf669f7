#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kwlab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

// Precondition violation (bad degree, mismatched lattice, invalid config...).
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Runtime failure (divergence, eigenvalue collapse, bad file...).
struct RuntimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw PreconditionError(msg);
}

// Deterministic 64-bit RNG (splitmix64); portable across platforms, unlike
// the standard-library distributions.
struct Rng {
    std::uint64_t state = 0x9e3779b97f4a7c15ull;

    explicit Rng(std::uint64_t seed = 0) : state(seed + 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    // standard normal, Box-Muller
    double gauss() {
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }
    cplx gauss_cplx() { return {gauss(), gauss()}; }
};

}  // namespace kwlab
