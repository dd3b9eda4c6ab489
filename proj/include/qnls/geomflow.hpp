// Geometric flows: the R^3 vortex-filament bi-normal flow with the Hasimoto map,
// and the SU(2) bi-normal structures J_r on R^5 (su(4)/sp(2)) and R^6 (so(6)/u(3))
// with their Schrodinger-map residuals.
#ifndef QNLS_GEOMFLOW_HPP
#define QNLS_GEOMFLOW_HPP

#include <Eigen/Eigenvalues>

#include "qnls/grid.hpp"

namespace qnls {

using VecD = Eigen::VectorXd;
using MatD = Eigen::MatrixXd;

/// Sampled curve r(x) = p(x) + x*drift with p periodic; drift = 0 for closed curves.
/// Unit-speed parameterization is an invariant monitored by speed_error().
struct CurveState {
    int dim = 3;
    PeriodicGrid grid;
    std::vector<VecD> p;       // periodic part per sample
    VecD drift;                // winding vector per unit x

    bool closed() const { return drift.isZero(0.0); }
};

struct FrameDegeneracyError : std::runtime_error {
    explicit FrameDegeneracyError(double kmin)
        : std::runtime_error("curvature below frame threshold: " + std::to_string(kmin)) {}
};

namespace detail {

inline std::vector<VecD> dx_curve(const PeriodicGrid& g, const std::vector<VecD>& p) {
    const int d = int(p[0].size());
    std::vector<VecD> out(g.n, VecD::Zero(d));
    for (int c = 0; c < d; ++c) {
        CVec comp(g.n);
        for (std::size_t i = 0; i < g.n; ++i) comp[i] = p[i](c);
        CVec dcomp = dx(g, comp);
        for (std::size_t i = 0; i < g.n; ++i) out[i](c) = dcomp[i].real();
    }
    return out;
}

} // namespace detail

inline std::vector<VecD> tangent(const CurveState& c) {
    std::vector<VecD> T = detail::dx_curve(c.grid, c.p);
    for (auto& t : T) t += c.drift;
    return T;
}

inline double speed_error(const CurveState& c) {
    double worst = 0;
    for (const auto& t : tangent(c)) worst = std::max(worst, std::abs(t.norm() - 1.0));
    return worst;
}

// ---------------------------------------------------------------------------
// R^3: Frenet frame, bi-normal flow, Hasimoto map
// ---------------------------------------------------------------------------

struct FrenetFrame {
    std::vector<VecD> T, N, B;
    RVec kappa, tau;
};

inline FrenetFrame build_frenet(const CurveState& c, double kappa_min = 1e-8) {
    if (c.dim != 3) throw std::invalid_argument("Frenet frame requires dimension 3");
    FrenetFrame f;
    f.T = tangent(c);
    std::vector<VecD> Tx = detail::dx_curve(c.grid, f.T);
    const std::size_t n = c.grid.n;
    f.N.resize(n);
    f.B.resize(n);
    f.kappa.resize(n);
    f.tau.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        f.kappa[i] = Tx[i].norm();
        if (f.kappa[i] < kappa_min) throw FrameDegeneracyError(f.kappa[i]);
        f.N[i] = Tx[i] / f.kappa[i];
        f.B[i] = VecD(3);
        f.B[i] << f.T[i](1) * f.N[i](2) - f.T[i](2) * f.N[i](1),
                  f.T[i](2) * f.N[i](0) - f.T[i](0) * f.N[i](2),
                  f.T[i](0) * f.N[i](1) - f.T[i](1) * f.N[i](0);
    }
    std::vector<VecD> Nx = detail::dx_curve(c.grid, f.N);
    for (std::size_t i = 0; i < n; ++i) f.tau[i] = Nx[i].dot(f.B[i]);
    return f;
}

/// r_t = r_x x r_xx, evaluated spectrally per sample.
inline std::vector<VecD> binormal_rhs_r3(const CurveState& c, double speed_tol = 1e-6) {
    if (c.dim != 3) throw std::invalid_argument("binormal_rhs_r3 requires dimension 3");
    if (speed_error(c) > speed_tol)
        throw std::invalid_argument("curve is not unit-speed within tolerance");
    std::vector<VecD> T = tangent(c);
    std::vector<VecD> Tx = detail::dx_curve(c.grid, T);
    std::vector<VecD> v(c.grid.n, VecD::Zero(3));
    for (std::size_t i = 0; i < c.grid.n; ++i) {
        v[i] << T[i](1) * Tx[i](2) - T[i](2) * Tx[i](1),
                T[i](2) * Tx[i](0) - T[i](0) * Tx[i](2),
                T[i](0) * Tx[i](1) - T[i](1) * Tx[i](0);
    }
    return v;
}

/// Hasimoto field u = kappa exp(i int_0^x tau), phase anchored to 0 at x = 0.
/// The cumulative torsion integral is spectral: zero-mean antiderivative plus
/// the secular mean(tau) x part.
inline CVec hasimoto_map(const CurveState& c, double kappa_min = 1e-8) {
    FrenetFrame f = build_frenet(c, kappa_min);
    const std::size_t n = c.grid.n;
    CVec tauc(f.tau.begin(), f.tau.end());
    const double mt = mean(tauc).real();
    CVec F = dx_inv(c.grid, tauc);
    CVec u(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phase = F[i].real() - F[0].real() + mt * c.grid.x(i);
        u[i] = f.kappa[i] * std::exp(cplx(0, phase));
    }
    return u;
}

struct CurveTrajectory {
    std::vector<double> times;
    std::vector<CurveState> snapshots;
    RVec speed_errors;
};

namespace detail {

template <class Vel>
CurveState rk4_curve_step(const CurveState& c, double dt, Vel&& vel) {
    auto add = [&](const CurveState& base, double a, const std::vector<VecD>& k) {
        CurveState out = base;
        for (std::size_t i = 0; i < out.p.size(); ++i) out.p[i] += a * k[i];
        return out;
    };
    std::vector<VecD> k1 = vel(c);
    std::vector<VecD> k2 = vel(add(c, 0.5 * dt, k1));
    std::vector<VecD> k3 = vel(add(c, 0.5 * dt, k2));
    std::vector<VecD> k4 = vel(add(c, dt, k3));
    CurveState out = c;
    for (std::size_t i = 0; i < out.p.size(); ++i)
        out.p[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    return out;
}

} // namespace detail

struct CurveEvolutionConfig {
    double dt = 1e-4;
    double t_final = 1.0;
    std::size_t snapshot_stride = 1;
};

inline CurveTrajectory evolve_filament(const CurveState& c0, const CurveEvolutionConfig& cfg) {
    CurveTrajectory traj;
    CurveState c = c0;
    const std::size_t steps = std::size_t(std::llround(cfg.t_final / cfg.dt));
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.snapshots.push_back(c);
        traj.speed_errors.push_back(speed_error(c));
    };
    record(0.0);
    for (std::size_t nstep = 1; nstep <= steps; ++nstep) {
        c = detail::rk4_curve_step(c, cfg.dt, [](const CurveState& s) {
            return binormal_rhs_r3(s, 1e-3);
        });
        for (const auto& pt : c.p)
            if (!pt.allFinite()) throw BlowupError(double(nstep) * cfg.dt, 0.0);
        if (nstep % cfg.snapshot_stride == 0 || nstep == steps) record(double(nstep) * cfg.dt);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// symmetric-space structures on R^5 and R^6
// ---------------------------------------------------------------------------

enum class NormalCase { su4sp2, so6u3 };

/// Reference data at the Cartan alignment: the base complex structure J_base
/// (J_base e = 0, J_base^2 = -P_perp), the aligned direction e, and for the R^6
/// case the ambient Hermitian structure Jherm = ad(J)/2 with Jherm^2 = -I.
struct ReferenceStructure {
    NormalCase ncase;
    int dim;
    VecD e;
    MatD Jbase;
    MatD Jherm;       // R^6 only
};

namespace detail {

// --- su(4)/sp(2): m is parameterized by (a_par, Re a, Im a, Re b, Im b) ---
inline Eigen::Matrix4cd su4_m(double a_par, cplx a, cplx b) {
    Eigen::Matrix4cd M = Eigen::Matrix4cd::Zero();
    Mat2 A, B;
    A << cplx(0, -a_par), a, -std::conj(a), cplx(0, a_par);
    B << 0, b, -b, 0;
    M.block<2, 2>(0, 0) = A;
    M.block<2, 2>(0, 2) = B;
    M.block<2, 2>(2, 0) = B.conjugate();
    M.block<2, 2>(2, 2) = -A.conjugate();
    return M;
}

inline std::array<Eigen::Matrix4cd, 5> su4_m_basis() {
    std::array<Eigen::Matrix4cd, 5> basis = {
        su4_m(1, 0, 0), su4_m(0, 1, 0), su4_m(0, cplx(0, 1), 0),
        su4_m(0, 0, 1), su4_m(0, 0, cplx(0, 1))};
    for (auto& X : basis) X /= std::sqrt(-(X * X).trace().real());
    return basis;
}

inline Eigen::Matrix4cd su4_J_embed(double theta, double psi) {
    Eigen::Matrix4cd M = Eigen::Matrix4cd::Zero();
    Mat2 C, D;
    C << cplx(0, std::cos(theta)), 0, 0, cplx(0, -std::cos(theta));
    D << std::exp(cplx(0, -psi)) * std::sin(theta), 0, 0, 0;
    M.block<2, 2>(0, 0) = C;
    M.block<2, 2>(0, 2) = D;
    M.block<2, 2>(2, 0) = -D.conjugate();
    M.block<2, 2>(2, 2) = C.conjugate();
    return M;
}

// --- so(6)/u(3): m(A) and h(B) block embeddings of complex 3x3 matrices ---
inline MatD so6_m(const Eigen::Matrix3cd& A) {
    MatD M(6, 6);
    M.block<3, 3>(0, 0) = A.real();
    M.block<3, 3>(0, 3) = A.imag();
    M.block<3, 3>(3, 0) = A.imag();
    M.block<3, 3>(3, 3) = -A.real();
    return M;
}
inline MatD so6_h(const Eigen::Matrix3cd& B) {
    MatD M(6, 6);
    M.block<3, 3>(0, 0) = B.real();
    M.block<3, 3>(0, 3) = B.imag();
    M.block<3, 3>(3, 0) = -B.imag();
    M.block<3, 3>(3, 3) = B.real();
    return M;
}

inline Eigen::Matrix3cd so6_m_param(double a_par, double a_perp, cplx a1, cplx a2) {
    Eigen::Matrix3cd A = Eigen::Matrix3cd::Zero();
    A(0, 1) = a_par + cplx(0, a_perp);
    A(1, 0) = -A(0, 1);
    A(0, 2) = a1; A(2, 0) = -a1;
    A(1, 2) = a2; A(2, 1) = -a2;
    return A;
}

inline std::array<MatD, 6> so6_m_basis() {
    std::array<MatD, 6> basis = {
        so6_m(so6_m_param(1, 0, 0, 0)),  so6_m(so6_m_param(0, 1, 0, 0)),
        so6_m(so6_m_param(0, 0, 1, 0)),  so6_m(so6_m_param(0, 0, cplx(0, 1), 0)),
        so6_m(so6_m_param(0, 0, 0, 1)),  so6_m(so6_m_param(0, 0, 0, cplx(0, 1)))};
    for (auto& X : basis) X /= std::sqrt((X.transpose() * X).trace());
    return basis;
}

inline Eigen::Matrix3cd so6_J_embed(double theta, double psi) {
    Eigen::Matrix3cd B = Eigen::Matrix3cd::Zero();
    B(0, 0) = cplx(0, std::cos(theta));
    B(1, 1) = cplx(0, -std::cos(theta));
    B(0, 1) = -std::exp(cplx(0, -psi)) * std::sin(theta);
    B(1, 0) = std::exp(cplx(0, psi)) * std::sin(theta);
    return B;
}

/// self-dual / anti-self-dual split of a 4x4 skew matrix; returns the self-dual part
inline Eigen::Matrix4d selfdual_part(const Eigen::Matrix4d& B) {
    auto wedge = [](int i, int j) {
        Eigen::Matrix4d W = Eigen::Matrix4d::Zero();
        W(i, j) = 1;
        W(j, i) = -1;
        return W;
    };
    const Eigen::Matrix4d s1 = (wedge(0, 1) + wedge(2, 3)) / 2;
    const Eigen::Matrix4d s2 = (wedge(0, 2) - wedge(1, 3)) / 2;
    const Eigen::Matrix4d s3 = (wedge(0, 3) + wedge(1, 2)) / 2;
    Eigen::Matrix4d out = Eigen::Matrix4d::Zero();
    for (const auto& s : {s1, s2, s3})
        out += ((B.transpose() * s).trace() / (s.transpose() * s).trace()) * s;
    return out;
}

} // namespace detail

inline ReferenceStructure reference_structure(NormalCase ncase, double theta, double psi) {
    ReferenceStructure ref;
    ref.ncase = ncase;
    if (ncase == NormalCase::su4sp2) {
        ref.dim = 5;
        auto basis = detail::su4_m_basis();
        auto coords = [&](const Eigen::Matrix4cd& X) {
            VecD v(5);
            for (int i = 0; i < 5; ++i) v(i) = -(X * basis[i]).trace().real();
            return v;
        };
        // e direction: a_par slot (sign fixed so that e = +e1 in coordinates)
        ref.e = VecD::Zero(5);
        ref.e(0) = 1;
        Eigen::Matrix4cd Jm = detail::su4_J_embed(theta, psi);
        MatD ad(5, 5);
        for (int i = 0; i < 5; ++i) ad.col(i) = coords(Jm * basis[i] - basis[i] * Jm);
        // ad(J_embed) mixes the two isotropy ideals; its self-dual component on the
        // normal 4-space is the complex structure (degenerate only at theta = pi)
        Eigen::Matrix4d Bperp = ad.block<4, 4>(1, 1);
        Eigen::Matrix4d Bp = detail::selfdual_part(Bperp);
        const double lam = std::sqrt(-(Bp * Bp).trace() / 4.0);
        if (lam < 1e-10)
            throw std::invalid_argument("degenerate normal structure (theta near pi)");
        ref.Jbase = MatD::Zero(5, 5);
        ref.Jbase.block<4, 4>(1, 1) = Bp / lam;
        return ref;
    }
    ref.dim = 6;
    auto basis = detail::so6_m_basis();
    auto coords = [&](const MatD& X) {
        VecD v(6);
        for (int i = 0; i < 6; ++i) v(i) = (X.transpose() * basis[i]).trace();
        return v;
    };
    ref.e = VecD::Zero(6);
    ref.e(0) = 1;
    MatD Jm = detail::so6_h(detail::so6_J_embed(theta, psi));
    MatD Jh = detail::so6_h(Eigen::Matrix3cd::Identity() * cplx(0, 1));
    MatD ad(6, 6), adh(6, 6);
    for (int i = 0; i < 6; ++i) {
        ad.col(i) = coords(Jm * basis[i] - basis[i] * Jm);
        adh.col(i) = coords(Jh * basis[i] - basis[i] * Jh);
    }
    ref.Jbase = ad;
    ref.Jherm = adh / 2.0;   // squares to -I
    return ref;
}

/// Per-sample normal complex structure along a curve.
struct NormalComplexStructure {
    NormalCase ncase;
    int sign_choice = 1;
    std::vector<MatD> J;
    double holonomy_angle = 0;   // magnitude of the distributed loop holonomy
};

namespace detail {

inline MatD minimal_rotation(const VecD& a, const VecD& b) {
    const int n = int(a.size());
    const double c = a.dot(b);
    if (c > 1.0 - 1e-15) return MatD::Identity(n, n);
    VecD v = b - c * a;
    const double s = v.norm();
    v /= s;
    MatD R = MatD::Identity(n, n) - a * a.transpose() - v * v.transpose()
           + c * (a * a.transpose() + v * v.transpose())
           + s * (v * a.transpose() - a * v.transpose());
    return R;
}

/// principal real logarithm via complex eigendecomposition (near-identity input)
inline MatD real_log(const MatD& H) {
    Eigen::ComplexEigenSolver<MatX> es(H.cast<cplx>());
    MatX V = es.eigenvectors();
    MatX L = MatX::Zero(H.rows(), H.cols());
    for (int i = 0; i < H.rows(); ++i) L(i, i) = std::log(es.eigenvalues()(i));
    MatD out = (V * L * V.inverse()).real();
    return 0.5 * (out - out.transpose());   // clean roundoff: log of orthogonal is skew
}

/// W(x) = exp(s*Om) evaluated via one eigendecomposition of Om
struct SkewExp {
    MatX V, Vinv;
    Eigen::VectorXcd lam;
    int n = 0;
    explicit SkewExp(const MatD& Om) : n(int(Om.rows())) {
        Eigen::ComplexEigenSolver<MatX> es(Om.cast<cplx>());
        V = es.eigenvectors();
        Vinv = V.inverse();
        lam = es.eigenvalues();
    }
    MatD operator()(double s) const {
        MatX D = MatX::Zero(n, n);
        for (int i = 0; i < n; ++i) D(i, i) = std::exp(s * lam(i));
        return (V * D * Vinv).real();
    }
};

/// Complexification of R^6 adapted to the Hermitian structure Jherm: an
/// orthonormal real basis b1, J b1, b2, J b2, b3, J b3.
struct Complexifier {
    MatD basis;   // columns: b1, Jb1, b2, Jb2, b3, Jb3
    MatD Jh;
    explicit Complexifier(const MatD& Jherm) : Jh(Jherm) {
        basis = MatD(6, 6);
        std::vector<VecD> cols;
        for (int seed = 0; seed < 6 && int(cols.size()) < 6; ++seed) {
            VecD v = VecD::Zero(6);
            v(seed) = 1;
            for (const auto& c : cols) v -= c.dot(v) * c;
            if (v.norm() < 1e-8) continue;
            v.normalize();
            cols.push_back(v);
            VecD w = Jh * v;
            for (const auto& c : cols) w -= c.dot(w) * c;
            w.normalize();
            cols.push_back(w);
        }
        for (int i = 0; i < 6; ++i) basis.col(i) = cols[std::size_t(i)];
    }
    Eigen::Vector3cd to_c(const VecD& v) const {
        Eigen::Vector3cd z;
        for (int j = 0; j < 3; ++j)
            z(j) = cplx(basis.col(2 * j).dot(v), basis.col(2 * j + 1).dot(v));
        return z;
    }
    VecD to_r(const Eigen::Vector3cd& z) const {
        VecD v = VecD::Zero(6);
        for (int j = 0; j < 3; ++j)
            v += z(j).real() * basis.col(2 * j) + z(j).imag() * basis.col(2 * j + 1);
        return v;
    }
    /// real 6x6 matrix of a complex-linear map
    MatD real_matrix(const Eigen::Matrix3cd& W) const {
        MatD M(6, 6);
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3cd ej = Eigen::Vector3cd::Zero();
            ej(j) = 1;
            M.col(2 * j) = to_r(W * ej);
            ej(j) = cplx(0, 1);
            M.col(2 * j + 1) = to_r(W * ej);
        }
        return M;
    }
};

/// minimal U(3) rotation taking unit complex vector za to unit zt
inline Eigen::Matrix3cd complex_minimal_rotation(const Eigen::Vector3cd& za,
                                                 const Eigen::Vector3cd& zt) {
    const cplx p = za.dot(zt);   // Eigen dot conjugates the first argument
    Eigen::Vector3cd w = zt - p * za;
    const double r = w.norm();
    Eigen::Matrix3cd G = Eigen::Matrix3cd::Identity();
    if (r < 1e-15) {
        const cplx phase = p / std::abs(p);
        G += (phase - 1.0) * (za * za.adjoint());
        return G;
    }
    w /= r;
    G -= za * za.adjoint() + w * w.adjoint();
    G += p * (za * za.adjoint()) + std::conj(p) * (w * w.adjoint());
    G += r * (w * za.adjoint()) - r * (za * w.adjoint());
    return G;
}

inline Eigen::Matrix3cd unitary_log(const Eigen::Matrix3cd& H) {
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(H);
    Eigen::Matrix3cd L = Eigen::Matrix3cd::Zero();
    for (int i = 0; i < 3; ++i) L(i, i) = std::log(es.eigenvalues()(i));
    Eigen::Matrix3cd out = es.eigenvectors() * L * es.eigenvectors().inverse();
    return 0.5 * (out - out.adjoint());
}

} // namespace detail

/// Build J_r along a loop of unit tangents: align the Cartan direction with T(0),
/// transport by minimal rotations (complex-minimal for the R^6 case so the
/// Hermitian constraint is preserved), and distribute the loop holonomy so the
/// structure field is periodic. sign > 0 keeps the base orientation.
inline NormalComplexStructure build_structure_field(const std::vector<VecD>& T,
                                                    const ReferenceStructure& ref,
                                                    int sign = 1) {
    const std::size_t n = T.size();
    NormalComplexStructure out;
    out.ncase = ref.ncase;
    out.sign_choice = sign;
    out.J.resize(n);
    if (ref.ncase == NormalCase::su4sp2) {
        std::vector<MatD> G(n);
        G[0] = detail::minimal_rotation(ref.e, T[0]);
        for (std::size_t i = 1; i < n; ++i)
            G[i] = detail::minimal_rotation(T[i - 1], T[i]) * G[i - 1];
        MatD A = detail::minimal_rotation(T[n - 1], T[0]) * G[n - 1];
        MatD H = G[0].transpose() * A;            // holonomy in the isotropy of e
        MatD Om = detail::real_log(H);
        out.holonomy_angle = Om.cwiseAbs().maxCoeff();
        detail::SkewExp W(Om);
        for (std::size_t i = 0; i < n; ++i) {
            MatD Gt = G[i] * W(-double(i) / double(n));
            out.J[i] = double(sign) * (Gt * ref.Jbase * Gt.transpose());
        }
        return out;
    }
    detail::Complexifier cx(ref.Jherm);
    std::vector<Eigen::Matrix3cd> G(n);
    std::vector<Eigen::Vector3cd> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = cx.to_c(T[i]);
    const Eigen::Vector3cd ze = cx.to_c(ref.e);
    G[0] = detail::complex_minimal_rotation(ze, z[0]);
    for (std::size_t i = 1; i < n; ++i)
        G[i] = detail::complex_minimal_rotation(z[i - 1], z[i]) * G[i - 1];
    Eigen::Matrix3cd A = detail::complex_minimal_rotation(z[n - 1], z[0]) * G[n - 1];
    Eigen::Matrix3cd H = G[0].adjoint() * A;
    Eigen::Matrix3cd Om = detail::unitary_log(H);
    out.holonomy_angle = Om.cwiseAbs().maxCoeff();
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(Om);
    for (std::size_t i = 0; i < n; ++i) {
        const double sfrac = -double(i) / double(n);
        Eigen::Matrix3cd D = Eigen::Matrix3cd::Zero();
        for (int k = 0; k < 3; ++k) D(k, k) = std::exp(sfrac * es.eigenvalues()(k));
        Eigen::Matrix3cd Wc = es.eigenvectors() * D * es.eigenvectors().inverse();
        MatD Gt = cx.real_matrix(G[i] * Wc);
        out.J[i] = double(sign) * (Gt * ref.Jbase * Gt.transpose());
    }
    return out;
}

inline NormalComplexStructure build_normal_structure(const CurveState& c, NormalCase ncase,
                                                     double theta, double psi, int sign = 1) {
    const ReferenceStructure ref = reference_structure(ncase, theta, psi);
    if (c.dim != ref.dim) throw std::invalid_argument("curve dimension does not match case");
    std::vector<VecD> T = tangent(c);
    for (auto& t : T) {
        const double nm = t.norm();
        if (nm < 1e-12) throw std::invalid_argument("degenerate tangent");
        t /= nm;
    }
    return build_structure_field(T, ref, sign);
}

/// r_t = J_r(D_x r_x).
inline std::vector<VecD> su2_binormal_rhs(const CurveState& c,
                                          const NormalComplexStructure& S) {
    std::vector<VecD> T = tangent(c);
    std::vector<VecD> Tx = detail::dx_curve(c.grid, T);
    std::vector<VecD> v(c.grid.n);
    for (std::size_t i = 0; i < c.grid.n; ++i) v[i] = S.J[i] * Tx[i];
    return v;
}

/// RK4 evolution of the R^5 bi-normal flow (structure rebuilt every stage).
inline CurveTrajectory evolve_su2_filament(const CurveState& c0, double theta, double psi,
                                           const CurveEvolutionConfig& cfg) {
    const ReferenceStructure ref = reference_structure(NormalCase::su4sp2, theta, psi);
    CurveTrajectory traj;
    CurveState c = c0;
    auto vel = [&](const CurveState& s) {
        std::vector<VecD> T = tangent(s);
        for (auto& t : T) t.normalize();
        NormalComplexStructure S = build_structure_field(T, ref);
        std::vector<VecD> Tx = detail::dx_curve(s.grid, tangent(s));
        std::vector<VecD> v(s.grid.n);
        for (std::size_t i = 0; i < s.grid.n; ++i) v[i] = S.J[i] * Tx[i];
        return v;
    };
    const std::size_t steps = std::size_t(std::llround(cfg.t_final / cfg.dt));
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.snapshots.push_back(c);
        traj.speed_errors.push_back(speed_error(c));
    };
    record(0.0);
    for (std::size_t nstep = 1; nstep <= steps; ++nstep) {
        c = detail::rk4_curve_step(c, cfg.dt, vel);
        if (nstep % cfg.snapshot_stride == 0 || nstep == steps) record(double(nstep) * cfg.dt);
    }
    return traj;
}

/// Residual of the Schrodinger-map form gamma_t = J_gamma(nabla_x gamma_x) for a
/// sequence of unit-sphere maps (finite-difference gamma_t, spectral x-derivatives).
/// For S^2 the structure is gamma x .; for S^4 it is the transported J field.
inline double schrodinger_map_residual(const PeriodicGrid& g,
                                       const std::vector<std::vector<VecD>>& gammas,
                                       double dt_snap, NormalCase ncase, double theta,
                                       double psi) {
    if (gammas.size() < 3) throw std::invalid_argument("need >= 3 snapshots");
    const int d = int(gammas[0][0].size());
    double worst = 0;
    ReferenceStructure ref;
    const bool s2 = (d == 3);
    if (!s2) ref = reference_structure(ncase, theta, psi);
    for (std::size_t j = 1; j + 1 < gammas.size(); ++j) {
        const auto& gam = gammas[j];
        std::vector<VecD> gx = detail::dx_curve(g, gam);
        std::vector<VecD> gxx = detail::dx_curve(g, gx);
        std::vector<VecD> gn(g.n);
        for (std::size_t i = 0; i < g.n; ++i) gn[i] = gam[i] / gam[i].norm();
        NormalComplexStructure S;
        if (!s2) S = build_structure_field(gn, ref);
        for (std::size_t i = 0; i < g.n; ++i) {
            VecD gt = (gammas[j + 1][i] - gammas[j - 1][i]) / (2.0 * dt_snap);
            VecD nab = gxx[i] + gx[i].squaredNorm() * gn[i];
            VecD Jn;
            if (s2) {
                Jn = VecD(3);
                Jn << gn[i](1) * nab(2) - gn[i](2) * nab(1),
                      gn[i](2) * nab(0) - gn[i](0) * nab(2),
                      gn[i](0) * nab(1) - gn[i](1) * nab(0);
            } else {
                Jn = S.J[i] * nab;
            }
            worst = std::max(worst, (gt - Jn).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// curve constructors
// ---------------------------------------------------------------------------

/// circle of radius R in the (d1,d2) coordinate plane; unit speed requires L = 2 pi R
inline CurveState make_circle(const PeriodicGrid& g, double R, int dim, int d1 = 0, int d2 = 1) {
    if (std::abs(g.length - 2 * pi * R) > 1e-12)
        throw std::invalid_argument("unit-speed circle needs L = 2 pi R");
    CurveState c;
    c.dim = dim;
    c.grid = g;
    c.drift = VecD::Zero(dim);
    c.p.assign(g.n, VecD::Zero(dim));
    for (std::size_t i = 0; i < g.n; ++i) {
        const double s = g.x(i) / R;
        c.p[i](d1) = R * std::cos(s);
        c.p[i](d2) = R * std::sin(s);
    }
    return c;
}

/// helix with a^2 + b^2 = 1 over one period: r = (a cos x, a sin x, b x)
inline CurveState make_helix(const PeriodicGrid& g, double a, double b) {
    if (std::abs(a * a + b * b - 1.0) > 1e-12)
        throw std::invalid_argument("unit-speed helix needs a^2 + b^2 = 1");
    if (std::abs(g.length - 2 * pi) > 1e-12)
        throw std::invalid_argument("helix parameterization expects L = 2 pi");
    CurveState c;
    c.dim = 3;
    c.grid = g;
    c.drift = VecD::Zero(3);
    c.drift(2) = b;
    c.p.assign(g.n, VecD::Zero(3));
    for (std::size_t i = 0; i < g.n; ++i) {
        c.p[i](0) = a * std::cos(g.x(i));
        c.p[i](1) = a * std::sin(g.x(i));
    }
    return c;
}

/// Closed unit-speed curve built from a unit tangent loop: a base great circle in
/// the (d1,d2) plane plus band-limited perturbations, projected onto closure
/// (zero mean) and renormalized, then integrated spectrally.
inline CurveState make_closed_curve(const PeriodicGrid& g, int dim, Rng& rng, double eps,
                                    long kcut, int d1 = 0, int d2 = 1) {
    std::vector<VecD> T(g.n, VecD::Zero(dim));
    std::vector<CVec> pert;
    for (int c = 0; c < dim; ++c)
        pert.push_back(random_band_limited_real(g, rng, kcut, eps));
    for (std::size_t i = 0; i < g.n; ++i) {
        const double s = 2 * pi * double(i) / double(g.n);
        T[i](d1) = std::cos(s);
        T[i](d2) = std::sin(s);
        for (int c = 0; c < dim; ++c) T[i](c) += pert[std::size_t(c)][i].real();
    }
    for (int iter = 0; iter < 200; ++iter) {
        for (auto& t : T) t.normalize();
        VecD m = VecD::Zero(dim);
        for (const auto& t : T) m += t;
        m /= double(g.n);
        if (m.norm() < 1e-15) break;
        for (auto& t : T) t -= m;
    }
    for (auto& t : T) t.normalize();
    // remove the residual mean exactly (it is tiny after the iteration)
    VecD m = VecD::Zero(dim);
    for (const auto& t : T) m += t;
    m /= double(g.n);
    CurveState c;
    c.dim = dim;
    c.grid = g;
    c.drift = VecD::Zero(dim);
    c.p.assign(g.n, VecD::Zero(dim));
    for (int comp = 0; comp < dim; ++comp) {
        CVec f(g.n);
        for (std::size_t i = 0; i < g.n; ++i) f[i] = T[i](comp) - m(comp);
        CVec F = dx_inv(g, f);
        for (std::size_t i = 0; i < g.n; ++i) c.p[i](comp) = F[i].real();
    }
    // the tiny projected mean makes the speed deviate at O(|m|); it is monitored
    return c;
}

inline void write_curve_csv(const std::string& path, const CurveState& c) {
    std::ofstream os(path);
    os.precision(17);
    os << "x";
    for (int d = 0; d < c.dim; ++d) os << ",r" << d;
    os << "\n";
    for (std::size_t i = 0; i < c.grid.n; ++i) {
        os << c.grid.x(i);
        const VecD r = c.p[i] + c.grid.x(i) * c.drift;
        for (int d = 0; d < c.dim; ++d) os << "," << r(d);
        os << "\n";
    }
}

} // namespace qnls

#endif
