// Right-hand sides of the three evolution systems (cubic NLS, the two SU(2)
// spinor systems) in spinor and quaternion encodings, their alternate nonlocal
// forms, and the first Hamiltonians.
#ifndef QNLS_SYSTEMS_HPP
#define QNLS_SYSTEMS_HPP

#include "qnls/grid.hpp"

namespace qnls {

struct StateNLS {
    CVec u;
};
struct StateSys1 {
    SpinorField u;
};
struct StateSys2 {
    RVec v;
    SpinorField u;
};

struct EvalOptions {
    MeanPolicy policy = MeanPolicy::project;
    bool dealias = false;
};

/// Norms of the means removed from the nonlocal integrands during one evaluation.
struct NonlocalLog {
    double comm_mean = 0;      // commutator integrand (both systems)
    double v_comm_mean = 0;    // v [J, ubar^T u] integrand (system 2)
};

namespace detail {

inline void spin_axpy(SpinorField& y, cplx a, const SpinorField& x) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        y.c1[i] += a * x.c1[i];
        y.c2[i] += a * x.c2[i];
    }
}

inline Spinor at(const SpinorField& u, std::size_t i) {
    Spinor s;
    s << u.c1[i], u.c2[i];
    return s;
}
inline void set(SpinorField& u, std::size_t i, const Spinor& s) {
    u.c1[i] = s(0);
    u.c2[i] = s(1);
}
inline SpinorField zero_spinor(std::size_t n) { return {CVec(n, 0.0), CVec(n, 0.0)}; }

} // namespace detail

inline SpinorField dealias(const PeriodicGrid& g, const SpinorField& u) {
    return {dealias(g, u.c1), dealias(g, u.c2)};
}

/// Antiderivative of the su(2) integrand I0 = (ubar^T u_x J + J ubar_x^T u)_0 in the
/// split convention: the exact-derivative half D_x({J, ubar^T u}_0)/2 is integrated in
/// closed form, the commutator half [ubar^T u_x - ubar_x^T u, J]/2 through the
/// zero-mean antiderivative (mean projected per policy and logged).
inline Mat2Field nonlocal_antiderivative(const PeriodicGrid& g, const SpinorField& u,
                                         const Mat2& J, MeanPolicy policy,
                                         double* removed = nullptr) {
    const std::size_t n = u.size();
    SpinorField ux = dx(g, u);
    Mat2Field comm(n);
    Mat2Field closed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Spinor ui = detail::at(u, i), uxi = detail::at(ux, i);
        const Mat2 A = ui.adjoint() * uxi;
        const Mat2 B = uxi.adjoint() * ui;
        const Mat2 D = A - B;
        comm[i] = 0.5 * (D * J - J * D);
        const Mat2 P = ui.adjoint() * ui;
        Mat2 anti = J * P + P * J;
        closed[i] = 0.5 * trace_free(anti);
    }
    Mat2Field W = mat_dx_inv(g, comm, policy, removed);
    for (std::size_t i = 0; i < n; ++i) W[i] += closed[i];
    return W;
}

// ---------------------------------------------------------------------------
// NLS baseline: u_t = i(u_xx + |u|^2 u / 2)
// ---------------------------------------------------------------------------

inline CVec rhs_nls(const PeriodicGrid& g, const StateNLS& s, const EvalOptions& opts = {}) {
    CVec uxx = dx(g, dx(g, s.u));
    CVec out(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        out[i] = cplx(0, 1) * (uxx[i] + 0.5 * std::norm(s.u[i]) * s.u[i]);
    return opts.dealias ? dealias(g, out) : out;
}

inline double hamiltonian_nls(const PeriodicGrid& g, const StateNLS& s) {
    CVec ux = dx(g, s.u);
    RVec f(g.n);
    for (std::size_t i = 0; i < g.n; ++i) f[i] = std::imag(std::conj(ux[i]) * s.u[i]);
    return integrate(g, f);
}

// ---------------------------------------------------------------------------
// first SU(2) system: u_t = u_xx J + |u|^2 u J + 2 u D_x^{-1}(ubar^T u_x J + J ubar_x^T u)_0
// ---------------------------------------------------------------------------

inline SpinorField rhs_sys1(const PeriodicGrid& g, const StateSys1& s, const SU2Generator& J,
                            const EvalOptions& opts = {}, NonlocalLog* log = nullptr) {
    const std::size_t n = g.n;
    SpinorField uxx = dx(g, dx(g, s.u));
    double removed = 0;
    Mat2Field W = nonlocal_antiderivative(g, s.u, J.matrix, opts.policy, &removed);
    if (log) log->comm_mean = removed;
    SpinorField out = detail::zero_spinor(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Spinor ui = detail::at(s.u, i);
        const double n2 = ui.squaredNorm();
        Spinor r = detail::at(uxx, i) * J.matrix + n2 * (ui * J.matrix) + 2.0 * (ui * W[i]);
        detail::set(out, i, r);
    }
    return opts.dealias ? dealias(g, out) : out;
}

/// Alternate rewritings of the nonlocal term. The three variants differ from
/// rhs_sys1 by u(x) times a constant matrix (a D_x^{-1} integration constant).
inline SpinorField rhs_sys1_alt(const PeriodicGrid& g, const StateSys1& s, const SU2Generator& J,
                                int variant, const EvalOptions& opts = {}) {
    if (variant < 1 || variant > 3) throw std::invalid_argument("rhs_sys1_alt: variant in 1..3");
    const std::size_t n = g.n;
    SpinorField ux = dx(g, s.u);
    SpinorField uxx = dx(g, ux);
    Mat2Field comm(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Spinor ui = detail::at(s.u, i), uxi = detail::at(ux, i);
        const Mat2 A = ui.adjoint() * uxi;
        const Mat2 B = uxi.adjoint() * ui;
        Mat2 M;
        if (variant == 1) M = A;
        else if (variant == 2) M = B;
        else M = A - B;
        comm[i] = M * J.matrix - J.matrix * M;
    }
    Mat2Field W = mat_dx_inv(g, comm, opts.policy);
    SpinorField out = detail::zero_spinor(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Spinor ui = detail::at(s.u, i);
        const double n2 = ui.squaredNorm();
        const cplx ss = spinor_pairing(ui, J.matrix);
        Spinor r = detail::at(uxx, i) * J.matrix;
        if (variant == 1)
            r += n2 * (ui * J.matrix) + cplx(0, 1) * ss.imag() * ui + 2.0 * (ui * W[i]);
        else if (variant == 2)
            r += 3.0 * n2 * (ui * J.matrix) - cplx(0, 1) * ss.imag() * ui - 2.0 * (ui * W[i]);
        else
            r += 2.0 * n2 * (ui * J.matrix) + (ui * W[i]);
        detail::set(out, i, r);
    }
    return opts.dealias ? dealias(g, out) : out;
}

inline double hamiltonian_sys1(const PeriodicGrid& g, const StateSys1& s, const SU2Generator& J) {
    SpinorField ux = dx(g, s.u);
    RVec f(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const Spinor ui = detail::at(s.u, i), uxi = detail::at(ux, i);
        f[i] = ((uxi * J.matrix) * ui.adjoint()).value().real();
    }
    return integrate(g, f);
}

// ---------------------------------------------------------------------------
// second SU(2) system
// ---------------------------------------------------------------------------

struct RhsSys2 {
    RVec v_t;
    SpinorField u_t;
};

inline RhsSys2 rhs_sys2(const PeriodicGrid& g, const StateSys2& s, const SU2Generator& J,
                        const EvalOptions& opts = {}, NonlocalLog* log = nullptr) {
    const std::size_t n = g.n;
    SpinorField ux = dx(g, s.u);
    SpinorField uxx = dx(g, ux);
    CVec vc(s.v.begin(), s.v.end());
    CVec vx_c = dx(g, vc);
    double removed = 0;
    Mat2Field W = nonlocal_antiderivative(g, s.u, J.matrix, opts.policy, &removed);
    Mat2Field vComm(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Spinor ui = detail::at(s.u, i);
        const Mat2 P = ui.adjoint() * ui;
        vComm[i] = cplx(0, s.v[i]) * (J.matrix * P - P * J.matrix);
    }
    double removed_v = 0;
    Mat2Field Wv = mat_dx_inv(g, vComm, opts.policy, &removed_v);
    if (log) {
        log->comm_mean = removed;
        log->v_comm_mean = removed_v;
    }
    RVec vt(n);
    SpinorField out = detail::zero_spinor(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Spinor ui = detail::at(s.u, i), uxi = detail::at(ux, i);
        const Spinor uJ = ui * J.matrix;
        vt[i] = 2.0 * std::imag((uxi.conjugate().cwiseProduct(uJ)).sum());
        const cplx ss = spinor_pairing(ui, J.matrix);
        Spinor r = detail::at(uxx, i) * J.matrix
                 - cplx(0, 1) * vx_c[i] * uJ
                 + s.v[i] * s.v[i] * uJ
                 + cplx(0, 0.5) * ss.imag() * ui
                 + ui * W[i]
                 + ui * Wv[i];
        detail::set(out, i, r);
    }
    if (opts.dealias) {
        CVec vtc(vt.begin(), vt.end());
        vtc = dealias(g, vtc);
        for (std::size_t i = 0; i < n; ++i) vt[i] = vtc[i].real();
        out = dealias(g, out);
    }
    return {std::move(vt), std::move(out)};
}

inline SpinorField rhs_sys2_alt(const PeriodicGrid& g, const StateSys2& s, const SU2Generator& J,
                                int variant, const EvalOptions& opts = {}) {
    if (variant < 1 || variant > 3) throw std::invalid_argument("rhs_sys2_alt: variant in 1..3");
    const std::size_t n = g.n;
    SpinorField ux = dx(g, s.u);
    SpinorField uxx = dx(g, ux);
    CVec vc(s.v.begin(), s.v.end());
    CVec vx_c = dx(g, vc);
    Mat2Field comm(n), vComm(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Spinor ui = detail::at(s.u, i), uxi = detail::at(ux, i);
        const Mat2 A = ui.adjoint() * uxi;
        const Mat2 B = uxi.adjoint() * ui;
        Mat2 M;
        if (variant == 1) M = A;
        else if (variant == 2) M = B;
        else M = A - B;
        comm[i] = M * J.matrix - J.matrix * M;
        const Mat2 P = ui.adjoint() * ui;
        vComm[i] = cplx(0, s.v[i]) * (J.matrix * P - P * J.matrix);
    }
    Mat2Field W = mat_dx_inv(g, comm, opts.policy);
    Mat2Field Wv = mat_dx_inv(g, vComm, opts.policy);
    SpinorField out = detail::zero_spinor(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Spinor ui = detail::at(s.u, i);
        const double n2 = ui.squaredNorm();
        const cplx ss = spinor_pairing(ui, J.matrix);
        const Spinor uJ = ui * J.matrix;
        Spinor r = detail::at(uxx, i) * J.matrix - cplx(0, 1) * vx_c[i] * uJ
                 + s.v[i] * s.v[i] * uJ + ui * Wv[i];
        if (variant == 1)
            r += cplx(0, 1) * ss.imag() * ui + ui * W[i];
        else if (variant == 2)
            r += n2 * uJ - ui * W[i];
        else
            r += 0.5 * n2 * uJ + cplx(0, 0.5) * ss.imag() * ui + 0.5 * (ui * W[i]);
        detail::set(out, i, r);
    }
    return opts.dealias ? dealias(g, out) : out;
}

inline double hamiltonian_sys2(const PeriodicGrid& g, const StateSys2& s, const SU2Generator& J) {
    SpinorField ux = dx(g, s.u);
    RVec f(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const Spinor ui = detail::at(s.u, i), uxi = detail::at(ux, i);
        const double re = ((uxi * J.matrix) * ui.adjoint()).value().real();
        const double im = spinor_pairing(ui, J.matrix).imag();
        f[i] = re + s.v[i] * im;
    }
    return integrate(g, f);
}

// ---------------------------------------------------------------------------
// quaternion encodings. A spinor field u = (u1,u2) is the quaternion field
// qu = u1 + u2 j through the Cayley pairing; complex scalars act by left
// multiplication, the generator by right multiplication with q = quat(J).
// ---------------------------------------------------------------------------

namespace detail {

inline Quaternion qat(const SpinorField& u, std::size_t i) {
    return Quaternion::cayley(u.c1[i], u.c2[i]);
}

/// componentwise zero-mean antiderivative of a quaternion field stored as Cayley pairs
inline void quat_dx_inv(const PeriodicGrid& g, CVec& a, CVec& b, MeanPolicy policy,
                        double* removed) {
    cplx ma, mb;
    a = dx_inv(g, a, policy, &ma);
    b = dx_inv(g, b, policy, &mb);
    if (removed) *removed = std::max(std::abs(ma), std::abs(mb));
}

} // namespace detail

inline SpinorField rhs_sys1_quaternion(const PeriodicGrid& g, const StateSys1& s,
                                       const SU2Generator& J, const EvalOptions& opts = {},
                                       NonlocalLog* log = nullptr) {
    const std::size_t n = g.n;
    const Quaternion q = generator_to_quaternion(J);
    SpinorField ux = dx(g, s.u);
    SpinorField uxx = dx(g, ux);
    // integrand ubar u_x q + q ubar_x u, minus its exact-derivative part Dx(|u|^2) q
    CVec Ia(n), Ib(n);
    CVec n2c(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Quaternion qu = detail::qat(s.u, i), qux = detail::qat(ux, i);
        const Quaternion I = qu.conj() * qux * q + q * qux.conj() * qu;
        Ia[i] = I.a();
        Ib[i] = I.b();
        n2c[i] = qu.norm2();
    }
    CVec dn2 = dx(g, n2c);
    for (std::size_t i = 0; i < n; ++i) {
        const Quaternion dq = dn2[i].real() * q;
        Ia[i] -= dq.a();
        Ib[i] -= dq.b();
    }
    double removed = 0;
    detail::quat_dx_inv(g, Ia, Ib, opts.policy, &removed);
    if (log) log->comm_mean = removed;
    SpinorField out = detail::zero_spinor(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Quaternion qu = detail::qat(s.u, i);
        const Quaternion W = Quaternion::cayley(Ia[i], Ib[i]) + n2c[i].real() * q;
        const Quaternion r = detail::qat(uxx, i) * q + qu.norm2() * (qu * q) + qu * W;
        detail::set(out, i, spinor_of_quat(r));
    }
    return opts.dealias ? dealias(g, out) : out;
}

inline RhsSys2 rhs_sys2_quaternion(const PeriodicGrid& g, const StateSys2& s,
                                   const SU2Generator& J, const EvalOptions& opts = {},
                                   NonlocalLog* log = nullptr) {
    const std::size_t n = g.n;
    const Quaternion q = generator_to_quaternion(J);
    const Quaternion qi(0, 1, 0, 0);
    SpinorField ux = dx(g, s.u);
    SpinorField uxx = dx(g, ux);
    CVec vc(s.v.begin(), s.v.end());
    CVec vx_c = dx(g, vc);

    CVec Ia(n), Ib(n), Va(n), Vb(n), n2c(n);
    RVec vt(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Quaternion qu = detail::qat(s.u, i), qux = detail::qat(ux, i);
        const Quaternion I = qu.conj() * qux * q + q * qux.conj() * qu;
        Ia[i] = I.a();
        Ib[i] = I.b();
        n2c[i] = qu.norm2();
        const Quaternion ubiu = qu.conj() * qi * qu;
        const Quaternion C = (q * ubiu - ubiu * q) * s.v[i];
        Va[i] = C.a();
        Vb[i] = C.b();
        vt[i] = -2.0 * (qux.conj() * qi * qu * q).w;
    }
    CVec dn2 = dx(g, n2c);
    for (std::size_t i = 0; i < n; ++i) {
        const Quaternion dq = dn2[i].real() * q;
        Ia[i] -= dq.a();
        Ib[i] -= dq.b();
    }
    double removed = 0, removed_v = 0;
    detail::quat_dx_inv(g, Ia, Ib, opts.policy, &removed);
    detail::quat_dx_inv(g, Va, Vb, opts.policy, &removed_v);
    if (log) {
        log->comm_mean = removed;
        log->v_comm_mean = removed_v;
    }
    SpinorField out = detail::zero_spinor(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Quaternion qu = detail::qat(s.u, i);
        // half split: the spinor evaluator's u W with W = ES antiderivative of I0
        // maps to qu (ES-quat)/2 because the quaternion integrand is 2 I0's image
        const Quaternion W = 0.5 * (Quaternion::cayley(Ia[i], Ib[i]) + n2c[i].real() * q);
        const Quaternion Wv = Quaternion::cayley(Va[i], Vb[i]);
        const Quaternion ubiuq = qu.conj() * qi * qu * q;
        const Quaternion r = detail::qat(uxx, i) * q
                           + Quaternion::cayley(cplx(0, -vx_c[i].real()), 0) * (qu * q)
                           + s.v[i] * s.v[i] * (qu * q)
                           + (-0.5 * ubiuq.w) * (qi * qu)
                           + qu * W
                           + 0.5 * (qu * Wv);
        detail::set(out, i, spinor_of_quat(r));
    }
    if (opts.dealias) {
        CVec vtc(vt.begin(), vt.end());
        vtc = dealias(g, vtc);
        for (std::size_t i = 0; i < n; ++i) vt[i] = vtc[i].real();
        out = dealias(g, out);
    }
    return {std::move(vt), std::move(out)};
}

} // namespace qnls

#endif
