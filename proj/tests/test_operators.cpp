#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qnls/initial.hpp"
#include "qnls/laxpair.hpp"

using namespace qnls;

namespace {

double pair_spinor(const PeriodicGrid& g, const SpinorField& a, const SpinorField& b) {
    RVec f(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        f[i] = std::real(a.c1[i] * std::conj(b.c1[i]) + a.c2[i] * std::conj(b.c2[i]));
    return integrate(g, f);
}

double pair_pair(const PeriodicGrid& g, const PairField& a, const PairField& b) {
    RVec f(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        f[i] = a.scalar[i] * b.scalar[i] +
               std::real(a.spinor.c1[i] * std::conj(b.spinor.c1[i]) +
                         a.spinor.c2[i] * std::conj(b.spinor.c2[i]));
    return integrate(g, f);
}

double spinor_max(const SpinorField& f) {
    double m = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        m = std::max({m, std::abs(f.c1[i]), std::abs(f.c2[i])});
    return m;
}

} // namespace

TEST_CASE("hop/jop trivial limits") {
    auto g = make_grid(64, 2 * pi);
    Rng rng(21);
    SUBCASE("f = 0 maps to 0") {
        SpinorField z{CVec(g.n, 0.0), CVec(g.n, 0.0)};
        SpinorField u = random_spinor(g, rng, 8, 0.5);
        CHECK(spinor_max(hop_sys1(g, z, u)) == 0.0);
        CHECK(spinor_max(jop_sys1(g, z, u)) == 0.0);
    }
    SUBCASE("u = 0: Hop = Jop = D_x, recursion = D_x^2") {
        SpinorField z{CVec(g.n, 0.0), CVec(g.n, 0.0)};
        SpinorField f = random_spinor(g, rng, 8, 1.0);
        SpinorField df = dx(g, f);
        SpinorField h = hop_sys1(g, f, z), j = jop_sys1(g, f, z), r = recursion_sys1(g, f, z);
        SpinorField ddf = dx(g, df);
        double worst = 0;
        for (std::size_t i = 0; i < g.n; ++i) {
            worst = std::max(worst, std::abs(h.c1[i] - df.c1[i]));
            worst = std::max(worst, std::abs(j.c2[i] - df.c2[i]));
            worst = std::max(worst, std::abs(r.c1[i] - ddf.c1[i]));
        }
        CHECK(worst < 1e-11);
    }
    SUBCASE("sys2 zero state: Hop = diag(D_x/2-row form, D_x); Jop = diag(D_x/4, D_x)") {
        StateSys2 z{RVec(g.n, 0.0), {CVec(g.n, 0.0), CVec(g.n, 0.0)}};
        PairField f;
        CVec f0 = random_band_limited(g, rng, 8, 1.0, Parity::none, true);
        f.scalar.resize(g.n);
        for (std::size_t i = 0; i < g.n; ++i) f.scalar[i] = f0[i].real();
        f.spinor = random_spinor(g, rng, 8, 1.0);
        PairField h = hop_sys2(g, f, z), j = jop_sys2(g, f, z);
        CVec df0 = dx(g, f0);
        SpinorField dF = dx(g, f.spinor);
        double worst = 0;
        for (std::size_t i = 0; i < g.n; ++i) {
            worst = std::max(worst, std::abs(h.scalar[i] - 0.5 * df0[i].real()));
            worst = std::max(worst, std::abs(j.scalar[i] - 0.25 * df0[i].real()));
            worst = std::max(worst, std::abs(h.spinor.c1[i] - dF.c1[i]));
            worst = std::max(worst, std::abs(j.spinor.c2[i] - dF.c2[i]));
        }
        CHECK(worst < 1e-11);
    }
}

TEST_CASE("skew-adjointness under the real L2 pairing") {
    auto g = make_grid(64, 2 * pi);
    Rng rng(23);
    double worst1 = 0, worstJ1 = 0, worst2 = 0, worstJ2 = 0;
    for (int trial = 0; trial < 100; ++trial) {
        SpinorField u = random_spinor(g, rng, 8, 0.8);
        SpinorField f = random_spinor(g, rng, 8, 1.0);
        SpinorField h = random_spinor(g, rng, 8, 1.0);
        worst1 = std::max(worst1, std::abs(pair_spinor(g, h, hop_sys1(g, f, u)) +
                                           pair_spinor(g, hop_sys1(g, h, u), f)));
        worstJ1 = std::max(worstJ1, std::abs(pair_spinor(g, h, jop_sys1(g, f, u)) +
                                             pair_spinor(g, jop_sys1(g, h, u), f)));
        // sys2
        StateSys2 s;
        s.u = u;
        CVec vc = random_band_limited(g, rng, 8, 0.6, Parity::none, true);
        s.v.resize(g.n);
        for (std::size_t i = 0; i < g.n; ++i) s.v[i] = vc[i].real();
        PairField fp, hp;
        CVec f0 = random_band_limited(g, rng, 8, 1.0, Parity::none, true);
        CVec h0 = random_band_limited(g, rng, 8, 1.0, Parity::none, true);
        fp.scalar.resize(g.n);
        hp.scalar.resize(g.n);
        for (std::size_t i = 0; i < g.n; ++i) {
            fp.scalar[i] = f0[i].real();
            hp.scalar[i] = h0[i].real();
        }
        fp.spinor = random_spinor(g, rng, 8, 1.0);
        hp.spinor = random_spinor(g, rng, 8, 1.0);
        worst2 = std::max(worst2, std::abs(pair_pair(g, hp, hop_sys2(g, fp, s)) +
                                           pair_pair(g, hop_sys2(g, hp, s), fp)));
        worstJ2 = std::max(worstJ2, std::abs(pair_pair(g, hp, jop_sys2(g, fp, s)) +
                                             pair_pair(g, jop_sys2(g, hp, s), fp)));
    }
    CHECK(worst1 < 1e-10);
    CHECK(worstJ1 < 1e-10);
    CHECK(worst2 < 1e-10);
    CHECK(worstJ2 < 1e-10);
}

TEST_CASE("Jop maps the root symmetry to the gradient/flow variables") {
    auto g = make_grid(64, 2 * pi);
    Rng rng(25);
    auto J = make_generator(0.9, 0.2);
    SUBCASE("sys1: Jop(uJ) = u_x J") {
        SpinorField u = random_spinor(g, rng, 8, 0.6);
        SpinorField uJ{CVec(g.n), CVec(g.n)};
        for (std::size_t i = 0; i < g.n; ++i) {
            Spinor ui;
            ui << u.c1[i], u.c2[i];
            const Spinor r = ui * J.matrix;
            uJ.c1[i] = r(0);
            uJ.c2[i] = r(1);
        }
        SpinorField lhs = jop_sys1(g, uJ, u);
        SpinorField ux = dx(g, u);
        double worst = 0;
        for (std::size_t i = 0; i < g.n; ++i) {
            Spinor uxi;
            uxi << ux.c1[i], ux.c2[i];
            const Spinor r = uxi * J.matrix;
            worst = std::max(worst, std::abs(lhs.c1[i] - r(0)));
            worst = std::max(worst, std::abs(lhs.c2[i] - r(1)));
        }
        CHECK(worst < 1e-11);
    }
    SUBCASE("sys2: Jop((0, uJ)) = (W, w) of the canonical flow") {
        StateSys2 s;
        s.u = random_spinor(g, rng, 8, 0.6);
        CVec vc = random_band_limited(g, rng, 8, 0.5, Parity::none, true);
        s.v.resize(g.n);
        for (std::size_t i = 0; i < g.n; ++i) s.v[i] = vc[i].real();
        PairField root;
        root.scalar.assign(g.n, 0.0);
        root.spinor = {CVec(g.n), CVec(g.n)};
        for (std::size_t i = 0; i < g.n; ++i) {
            Spinor ui;
            ui << s.u.c1[i], s.u.c2[i];
            const Spinor r = ui * J.matrix;
            root.spinor.c1[i] = r(0);
            root.spinor.c2[i] = r(1);
        }
        PairField out = jop_sys2(g, root, s);
        SpinorField ux = dx(g, s.u);
        double worst = 0;
        for (std::size_t i = 0; i < g.n; ++i) {
            Spinor ui, uxi;
            ui << s.u.c1[i], s.u.c2[i];
            uxi << ux.c1[i], ux.c2[i];
            const double W = 0.5 * spinor_pairing(ui, J.matrix).imag();
            const Spinor w = uxi * J.matrix - cplx(0, s.v[i]) * (ui * J.matrix);
            worst = std::max(worst, std::abs(out.scalar[i] - W));
            worst = std::max(worst, std::abs(out.spinor.c1[i] - w(0)));
            worst = std::max(worst, std::abs(out.spinor.c2[i] - w(1)));
        }
        CHECK(worst < 1e-11);
    }
}

TEST_CASE("check_hamiltonian_form") {
    auto g = make_grid(64, 2 * pi);
    Rng rng(27);
    SUBCASE("zero state returns 0 by convention") {
        StateSys2 z{RVec(g.n, 0.0), {CVec(g.n, 0.0), CVec(g.n, 0.0)}};
        CHECK(check_hamiltonian_form(g, 1, z, make_generator(0.5, 0.5)) == 0.0);
    }
    SUBCASE("system 1 random small-amplitude states") {
        for (int trial = 0; trial < 3; ++trial) {
            auto J = make_generator(rng.uniform(0, 2 * pi), rng.uniform(0, 2 * pi));
            StateSys2 s;
            s.u = random_spinor(g, rng, 8, 0.5);
            s.v.assign(g.n, 0.0);
            CHECK(check_hamiltonian_form(g, 1, s, J) < 1e-5);
        }
    }
    SUBCASE("system 1 scalar-reduction state") {
        StateSys2 s;
        s.u = scalar_reduction_embed(random_band_limited(g, rng, 8, 0.5));
        s.v.assign(g.n, 0.0);
        CHECK(check_hamiltonian_form(g, 1, s, make_generator(0, 0)) < 1e-5);
    }
    SUBCASE("system 2 random small-amplitude states") {
        for (int trial = 0; trial < 3; ++trial) {
            auto J = make_generator(rng.uniform(0, 2 * pi), rng.uniform(0, 2 * pi));
            StateSys2 s;
            s.u = random_spinor(g, rng, 8, 0.5);
            CVec vc = random_band_limited(g, rng, 8, 0.4, Parity::none, true);
            s.v.resize(g.n);
            for (std::size_t i = 0; i < g.n; ++i) s.v[i] = vc[i].real();
            CHECK(check_hamiltonian_form(g, 2, s, J) < 1e-5);
        }
    }
}

TEST_CASE("semidiscrete conservation: <grad H, rhs> = 0") {
    auto g = make_grid(64, 2 * pi);
    Rng rng(29);
    SUBCASE("system 1") {
        for (int trial = 0; trial < 5; ++trial) {
            auto J = make_generator(rng.uniform(0, 2 * pi), rng.uniform(0, 2 * pi));
            StateSys1 s{random_spinor(g, rng, 8, 0.5)};
            SpinorField r = rhs_sys1(g, s, J);
            SpinorField ux = dx(g, s.u);
            SpinorField grad{CVec(g.n), CVec(g.n)};
            for (std::size_t i = 0; i < g.n; ++i) {
                Spinor uxi;
                uxi << ux.c1[i], ux.c2[i];
                const Spinor w = uxi * J.matrix;
                grad.c1[i] = w(0);
                grad.c2[i] = w(1);
            }
            // dH/dt = 2 Re <grad, u_t>
            CHECK(std::abs(2.0 * pair_spinor(g, grad, r)) < 1e-10);
        }
    }
    SUBCASE("system 2") {
        for (int trial = 0; trial < 5; ++trial) {
            auto J = make_generator(rng.uniform(0, 2 * pi), rng.uniform(0, 2 * pi));
            StateSys2 s;
            s.u = random_spinor(g, rng, 8, 0.5);
            CVec vc = random_band_limited(g, rng, 8, 0.4, Parity::none, true);
            s.v.resize(g.n);
            for (std::size_t i = 0; i < g.n; ++i) s.v[i] = vc[i].real();
            auto r = rhs_sys2(g, s, J);
            SpinorField ux = dx(g, s.u);
            RVec f(g.n);
            for (std::size_t i = 0; i < g.n; ++i) {
                Spinor ui, uxi;
                ui << s.u.c1[i], s.u.c2[i];
                uxi << ux.c1[i], ux.c2[i];
                const Spinor gradu = uxi * J.matrix - cplx(0, s.v[i]) * (ui * J.matrix);
                const double gradv = spinor_pairing(ui, J.matrix).imag();
                f[i] = gradv * r.v_t[i] +
                       2.0 * std::real(gradu(0) * std::conj(r.u_t.c1[i]) +
                                       gradu(1) * std::conj(r.u_t.c2[i]));
            }
            CHECK(std::abs(integrate(g, f)) < 1e-10);
        }
    }
}
