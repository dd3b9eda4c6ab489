// su(2)/quaternion/small-matrix algebra: the normalized generator J(theta,psi),
// projections, Cartan-Killing pairing, and the spinor <-> quaternion dictionary.
#ifndef QNLS_ALGEBRA_HPP
#define QNLS_ALGEBRA_HPP

#include <Eigen/Dense>

#include "qnls/core.hpp"

namespace qnls {

using Mat2 = Eigen::Matrix2cd;
using MatX = Eigen::MatrixXcd;
using Spinor = Eigen::RowVector2cd;   // row vector u = (u1, u2)

/// Normalized su(2) element J(theta,psi): anti-Hermitian, trace-free, J^2 = -I.
struct SU2Generator {
    double theta = 0.0;
    double psi = 0.0;
    Mat2 matrix = Mat2::Zero();
};

inline SU2Generator make_generator(double theta, double psi) {
    const double c = std::cos(theta), s = std::sin(theta);
    SU2Generator J;
    J.theta = theta;
    J.psi = psi;
    J.matrix << cplx(0, c), std::exp(cplx(0, psi)) * s,
               -std::exp(cplx(0, -psi)) * s, cplx(0, -c);
    return J;
}

// ---------------------------------------------------------------------------
// quaternions: basis 1, i, j, k with k = ij and the convention z j = j conj(z)
// ---------------------------------------------------------------------------

struct Quaternion {
    double w = 0, x = 0, y = 0, z = 0;

    Quaternion() = default;
    Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}
    /// Cayley pair a + b j with a = w + x i, b = y + z i.
    static Quaternion cayley(cplx a, cplx b) { return {a.real(), a.imag(), b.real(), b.imag()}; }
    cplx a() const { return {w, x}; }
    cplx b() const { return {y, z}; }

    Quaternion conj() const { return {w, -x, -y, -z}; }
    double norm2() const { return w * w + x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }

    Quaternion operator+(const Quaternion& q) const { return {w + q.w, x + q.x, y + q.y, z + q.z}; }
    Quaternion operator-(const Quaternion& q) const { return {w - q.w, x - q.x, y - q.y, z - q.z}; }
    Quaternion operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
    Quaternion operator*(const Quaternion& q) const {
        return {w * q.w - x * q.x - y * q.y - z * q.z,
                w * q.x + x * q.w + y * q.z - z * q.y,
                w * q.y - x * q.z + y * q.w + z * q.x,
                w * q.z + x * q.y - y * q.x + z * q.w};
    }
};

inline Quaternion operator*(double s, const Quaternion& q) { return q * s; }

inline Quaternion quat_of_spinor(const Spinor& u) { return Quaternion::cayley(u(0), u(1)); }
inline Spinor spinor_of_quat(const Quaternion& q) { Spinor u; u << q.a(), q.b(); return u; }

/// Right multiplication u -> u M for a quaternionic matrix [[a,b],[-conj(b),conj(a)]]
/// corresponds to right multiplication of the Cayley image by cayley(M00, M01).
inline Quaternion quat_of_mat(const Mat2& M) { return Quaternion::cayley(M(0, 0), M(0, 1)); }

inline Quaternion generator_to_quaternion(const SU2Generator& J) { return quat_of_mat(J.matrix); }

/// || quat(u J) - quat(u) q || for the adopted dictionary; ~1e-15 when consistent.
inline double check_spinor_quaternion_dictionary(const Spinor& u, const SU2Generator& J) {
    Quaternion lhs = quat_of_spinor(u * J.matrix);
    Quaternion rhs = quat_of_spinor(u) * generator_to_quaternion(J);
    return (lhs - rhs).norm();
}

// ---------------------------------------------------------------------------
// small-matrix helpers
// ---------------------------------------------------------------------------

inline MatX trace_free(const MatX& M) {
    return M - (M.trace() / double(M.rows())) * MatX::Identity(M.rows(), M.cols());
}

/// Projection onto the skew-Hermitian trace-free part: ((M - M^dag)/2)_0.
inline MatX proj_su(const MatX& M) { return trace_free((M - M.adjoint()) / 2.0); }

/// Projection onto the skew part: (M - M^T)/2.
inline MatX proj_so(const MatX& M) { return ((M - M.transpose()) / 2.0).eval(); }

enum class AlgebraTag { su2, su4, so4, so6, so2c, s2c, generic };

inline const char* tag_name(AlgebraTag t) {
    switch (t) {
        case AlgebraTag::su2: return "su2";
        case AlgebraTag::su4: return "su4";
        case AlgebraTag::so4: return "so4";
        case AlgebraTag::so6: return "so6";
        case AlgebraTag::so2c: return "so2c";
        case AlgebraTag::s2c: return "s2c";
        default: return "generic";
    }
}

/// Deviation of M from the membership predicate of the tag (0 = member).
inline double membership_residual(const MatX& M, AlgebraTag tag) {
    switch (tag) {
        case AlgebraTag::su2:
        case AlgebraTag::su4:
            return std::max((M + M.adjoint()).cwiseAbs().maxCoeff(), std::abs(M.trace()));
        case AlgebraTag::so4:
        case AlgebraTag::so6:
            return std::max((M + M.transpose()).cwiseAbs().maxCoeff(),
                            M.imag().cwiseAbs().maxCoeff());
        case AlgebraTag::so2c:
            return (M + M.transpose()).cwiseAbs().maxCoeff();
        case AlgebraTag::s2c:
            return (M - M.transpose()).cwiseAbs().maxCoeff();
        default: return 0.0;
    }
}

/// Cartan-Killing pairing in the paper's normalization. The per-algebra constants
/// are calibrated against K(e,e) = -2 chi^2 (so(4)) and -4 chi^2 (su(4), so(6));
/// plain Re tr(XY) reproduces all of them, so every c_tag is 1.
inline double cartan_killing(const MatX& X, const MatX& Y, AlgebraTag tag) {
    if (X.rows() != Y.rows() || X.cols() != Y.cols())
        throw std::invalid_argument("cartan_killing: shape mismatch");
    (void)tag; // c_tag == 1 for every supported tag
    return (X * Y).trace().real();
}

/// Residuals of the two rewriting identities
///   u (J ubar^T u)_0        = (i/2) Im(ubar.(uJ)) u
///   u (ubar^T u J)_0        = |u|^2 u J - (i/2) Im(ubar.(uJ)) u
inline std::pair<double, double> rewrite_identity_residuals(const Spinor& u, const SU2Generator& J) {
    const Mat2 P = u.adjoint() * u;            // ubar^T u
    const cplx s = (u * J.matrix) * u.adjoint();
    const double n2 = u.squaredNorm();
    Spinor lhs1 = u * trace_free(J.matrix * P);
    Spinor rhs1 = cplx(0, 0.5) * s.imag() * u;
    Spinor lhs2 = u * trace_free(P * J.matrix);
    Spinor rhs2 = n2 * (u * J.matrix) - cplx(0, 0.5) * s.imag() * u;
    return {(lhs1 - rhs1).norm(), (lhs2 - rhs2).norm()};
}

/// ubar.(u J) = u J u^dag; purely imaginary for anti-Hermitian J.
inline cplx spinor_pairing(const Spinor& u, const Mat2& J) { return (u * J) * u.adjoint(); }

} // namespace qnls

#endif
