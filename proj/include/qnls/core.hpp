// Basic scalar types, deterministic RNG and small utilities shared by all modules.
#ifndef QNLS_CORE_HPP
#define QNLS_CORE_HPP

#include <complex>
#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qnls {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;

/// Deterministic 64-bit generator (splitmix64). Used everywhere randomness is
/// needed so that identical seeds give bit-identical runs on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    /// Uniform in [0,1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    /// Uniform in [a,b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    /// Standard normal (Box-Muller, deterministic pairing).
    double normal() {
        if (have_spare_) { have_spare_ = false; return spare_; }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * pi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * pi * u2);
    }
    cplx cnormal() { double a = normal(); return {a, normal()}; }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Thrown when a state sample exceeds the magnitude threshold or turns non-finite.
struct BlowupError : std::runtime_error {
    double t;
    double max_abs;
    BlowupError(double t_, double m)
        : std::runtime_error("blowup at t=" + std::to_string(t_) +
                             ", max|state|=" + std::to_string(m)),
          t(t_), max_abs(m) {}
};

/// Thrown when the spectral tail of a field is too large for the grid.
struct ResolutionError : std::runtime_error {
    double t;
    double tail_fraction;
    ResolutionError(double t_, double f)
        : std::runtime_error("under-resolved state at t=" + std::to_string(t_) +
                             ", spectral tail fraction=" + std::to_string(f)),
          t(t_), tail_fraction(f) {}
};

} // namespace qnls

#endif
