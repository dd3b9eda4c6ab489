// Initial-condition families: plane waves, Gaussian su(2)-rotation bumps,
// scalar-reduction embeddings, and seeded band-limited random fields.
#ifndef QNLS_INITIAL_HPP
#define QNLS_INITIAL_HPP

#include "qnls/systems.hpp"

namespace qnls {

inline CVec plane_wave(const PeriodicGrid& g, double amplitude, long mode) {
    CVec u(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        u[i] = amplitude * std::exp(cplx(0, 2.0 * pi * double(mode) * g.x(i) / g.length));
    return u;
}

inline SpinorField random_spinor(const PeriodicGrid& g, Rng& rng, long kcut, double amplitude,
                                 Parity parity = Parity::none) {
    return {random_band_limited(g, rng, kcut, amplitude, parity),
            random_band_limited(g, rng, kcut, amplitude, parity)};
}

inline Spinor random_const_spinor(Rng& rng) {
    Spinor u;
    u << rng.cnormal(), rng.cnormal();
    return u;
}

/// Gaussian bump rotated through the one-parameter group of J: u = A g(x) (1,0) exp(phi(x) J)
/// with g a periodized Gaussian and phi a single-harmonic rotation profile.
inline SpinorField gaussian_su2_bump(const PeriodicGrid& g, const SU2Generator& J,
                                     double amplitude, double width, double rot_strength) {
    SpinorField u{CVec(g.n), CVec(g.n)};
    for (std::size_t i = 0; i < g.n; ++i) {
        const double xc = g.x(i) - 0.5 * g.length;
        double bump = 0;
        for (int p = -2; p <= 2; ++p) {
            const double d = xc + p * g.length;
            bump += std::exp(-d * d / (width * width));
        }
        const double phi = rot_strength * std::sin(2.0 * pi * g.x(i) / g.length);
        const Mat2 R = std::cos(phi) * Mat2::Identity() + std::sin(phi) * J.matrix;
        Spinor base;
        base << amplitude * bump, 0.0;
        Spinor rotated = base * R;
        u.c1[i] = rotated(0);
        u.c2[i] = rotated(1);
    }
    return u;
}

/// Embed a scalar profile as the first spinor component (u2 = 0).
inline SpinorField scalar_reduction_embed(const CVec& profile) {
    return {profile, CVec(profile.size(), 0.0)};
}

} // namespace qnls

#endif
