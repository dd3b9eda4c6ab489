#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qnls/algebra.hpp"

using namespace qnls;

namespace {

SU2Generator random_generator(Rng& rng) {
    return make_generator(rng.uniform(0, 2 * pi), rng.uniform(0, 2 * pi));
}

Spinor random_spinor(Rng& rng) {
    Spinor u;
    u << rng.cnormal(), rng.cnormal();
    return u;
}

} // namespace

TEST_CASE("generator matrix and invariants") {
    SUBCASE("theta=0 gives diag(i,-i)") {
        auto J = make_generator(0, 0);
        CHECK(std::abs(J.matrix(0, 0) - cplx(0, 1)) < 1e-15);
        CHECK(std::abs(J.matrix(1, 1) - cplx(0, -1)) < 1e-15);
        CHECK(std::abs(J.matrix(0, 1)) < 1e-15);
    }
    SUBCASE("theta=pi/2 gives [[0,1],[-1,0]]") {
        auto J = make_generator(pi / 2, 0);
        CHECK(std::abs(J.matrix(0, 1) - 1.0) < 1e-15);
        CHECK(std::abs(J.matrix(1, 0) + 1.0) < 1e-15);
        CHECK(std::abs(J.matrix(0, 0)) < 1e-15);
    }
    SUBCASE("random: J^2=-I, anti-Hermitian, traceless, unit norm") {
        Rng rng(101);
        double worst = 0;
        for (int i = 0; i < 10000; ++i) {
            auto J = random_generator(rng);
            const Mat2 sq = J.matrix * J.matrix + Mat2::Identity();
            worst = std::max(worst, sq.cwiseAbs().maxCoeff());
            worst = std::max(worst, (J.matrix + J.matrix.adjoint()).cwiseAbs().maxCoeff());
            worst = std::max(worst, std::abs(J.matrix.trace()));
            // tr(J J^dag) = 2 is the unit normalization
            worst = std::max(worst, std::abs((J.matrix * J.matrix.adjoint()).trace().real() - 2.0));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("quaternion algebra") {
    Rng rng(7);
    SUBCASE("associativity and multiplicativity of the norm") {
        for (int i = 0; i < 200; ++i) {
            Quaternion p(rng.normal(), rng.normal(), rng.normal(), rng.normal());
            Quaternion q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
            Quaternion r(rng.normal(), rng.normal(), rng.normal(), rng.normal());
            CHECK(((p * q) * r - p * (q * r)).norm() < 1e-12);
            CHECK(std::abs((p * q).norm() - p.norm() * q.norm()) < 1e-10);
        }
    }
    SUBCASE("k = ij") {
        Quaternion i(0, 1, 0, 0), j(0, 0, 1, 0), k(0, 0, 0, 1);
        CHECK(((i * j) - k).norm() < 1e-15);
    }
}

TEST_CASE("generator_to_quaternion") {
    Rng rng(11);
    SUBCASE("diag(i,-i) maps to i") {
        auto q = generator_to_quaternion(make_generator(0, 0));
        CHECK((q - Quaternion(0, 1, 0, 0)).norm() < 1e-15);
    }
    for (int i = 0; i < 500; ++i) {
        auto J = random_generator(rng);
        auto q = generator_to_quaternion(J);
        // q^2 = -1, |q| = 1
        CHECK((q * q - Quaternion(-1, 0, 0, 0)).norm() < 1e-12);
        CHECK(std::abs(q.norm() - 1.0) < 1e-12);
        // component form (0, cos th, sin th cos psi, sin th sin psi)
        CHECK(std::abs(q.w) < 1e-15);
        CHECK(std::abs(q.x - std::cos(J.theta)) < 1e-12);
    }
}

TEST_CASE("spinor-quaternion dictionary") {
    Rng rng(13);
    SUBCASE("u=(1,0), J=diag(i,-i)") {
        Spinor u;
        u << 1.0, 0.0;
        CHECK(check_spinor_quaternion_dictionary(u, make_generator(0, 0)) < 1e-15);
    }
    SUBCASE("zero spinor") {
        Spinor u = Spinor::Zero();
        CHECK(check_spinor_quaternion_dictionary(u, random_generator(rng)) == 0.0);
    }
    SUBCASE("10^4 random pairs") {
        double worst = 0;
        for (int i = 0; i < 10000; ++i)
            worst = std::max(worst,
                             check_spinor_quaternion_dictionary(random_spinor(rng),
                                                                random_generator(rng)));
        CHECK(worst < 1e-12);
    }
    SUBCASE("additive homomorphism") {
        for (int i = 0; i < 200; ++i) {
            Spinor u = random_spinor(rng), w = random_spinor(rng);
            Quaternion d = quat_of_spinor(u + w) - (quat_of_spinor(u) + quat_of_spinor(w));
            CHECK(d.norm() < 1e-14);
        }
    }
}

TEST_CASE("trace_free and projections") {
    Rng rng(17);
    SUBCASE("diag(z,0) -> diag(z/2,-z/2)") {
        MatX M = MatX::Zero(2, 2);
        M(0, 0) = cplx(0.3, -1.1);
        MatX T = trace_free(M);
        CHECK(std::abs(T(0, 0) - cplx(0.15, -0.55)) < 1e-15);
        CHECK(std::abs(T(1, 1) + cplx(0.15, -0.55)) < 1e-15);
    }
    auto rand_mat = [&](int n) {
        MatX M(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) M(a, b) = rng.cnormal();
        return M;
    };
    SUBCASE("traceless input unchanged; random trace vanishes") {
        for (int i = 0; i < 100; ++i) {
            MatX M = rand_mat(3);
            MatX T = trace_free(M);
            CHECK(std::abs(T.trace()) < 1e-14);
            CHECK((trace_free(T) - T).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
    SUBCASE("proj_su idempotent, kills Hermitian traceless complement") {
        for (int i = 0; i < 100; ++i) {
            MatX M = rand_mat(2);
            MatX P = proj_su(M);
            CHECK((proj_su(P) - P).cwiseAbs().maxCoeff() < 1e-14);
            MatX H = rand_mat(2);
            H = ((H + H.adjoint()) / 2).eval();
            H = trace_free(H);
            CHECK(proj_su(H).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
    SUBCASE("proj_so idempotent, kills symmetric matrices") {
        for (int i = 0; i < 100; ++i) {
            MatX M = rand_mat(2);
            MatX P = proj_so(M);
            CHECK((proj_so(P) - P).cwiseAbs().maxCoeff() < 1e-14);
            MatX S = rand_mat(2);
            S = ((S + S.transpose()) / 2).eval();
            CHECK(proj_so(S).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
    SUBCASE("orthogonality of projections under Re tr(X Y^dag)") {
        for (int i = 0; i < 100; ++i) {
            MatX M = rand_mat(2);
            MatX P = proj_su(M);
            MatX R = M - P;   // complement
            CHECK(std::abs((P * R.adjoint()).trace().real()) < 1e-12);
        }
    }
}

TEST_CASE("rewrite identities") {
    Rng rng(19);
    SUBCASE("zero spinor") {
        auto [r1, r2] = rewrite_identity_residuals(Spinor::Zero(), random_generator(rng));
        CHECK(r1 == 0.0);
        CHECK(r2 == 0.0);
    }
    SUBCASE("u=(1,0) with diag(i,-i)") {
        Spinor u;
        u << 1.0, 0.0;
        auto [r1, r2] = rewrite_identity_residuals(u, make_generator(0, 0));
        CHECK(r1 < 1e-14);
        CHECK(r2 < 1e-14);
    }
    SUBCASE("10^4 random") {
        double worst = 0;
        for (int i = 0; i < 10000; ++i) {
            auto [r1, r2] = rewrite_identity_residuals(random_spinor(rng), random_generator(rng));
            worst = std::max({worst, r1, r2});
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("cartan_killing reproduces the quoted normalizations") {
    const double chi = 1.37;
    SUBCASE("so(4): K(e,e) = -2 chi^2") {
        MatX e = MatX::Zero(4, 4);
        e(0, 1) = chi;
        e(1, 0) = -chi;
        CHECK(std::abs(cartan_killing(e, e, AlgebraTag::so4) + 2 * chi * chi) < 1e-12);
    }
    SUBCASE("su(4): K(e,e) = -4 chi^2") {
        MatX e = MatX::Zero(4, 4);
        e(0, 0) = cplx(0, chi); e(1, 1) = cplx(0, -chi);
        e(2, 2) = cplx(0, chi); e(3, 3) = cplx(0, -chi);
        CHECK(std::abs(cartan_killing(e, e, AlgebraTag::su4) + 4 * chi * chi) < 1e-12);
    }
    SUBCASE("so(6): K(e,e) = -4 chi^2") {
        MatX e = MatX::Zero(6, 6);
        e(0, 1) = chi; e(1, 0) = -chi;
        e(3, 4) = -chi; e(4, 3) = chi;
        CHECK(std::abs(cartan_killing(e, e, AlgebraTag::so6) + 4 * chi * chi) < 1e-12);
    }
    SUBCASE("symmetry and tag mismatch") {
        Rng rng(23);
        MatX X(3, 3), Y(3, 3);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                X(a, b) = rng.cnormal();
                Y(a, b) = rng.cnormal();
            }
        CHECK(std::abs(cartan_killing(X, Y, AlgebraTag::generic) -
                       cartan_killing(Y, X, AlgebraTag::generic)) < 1e-12);
        MatX Z(2, 2);
        CHECK_THROWS_AS((void)cartan_killing(X, Z, AlgebraTag::generic), std::invalid_argument);
    }
}

TEST_CASE("membership predicates") {
    auto J = make_generator(0.7, 1.2);
    CHECK(membership_residual(J.matrix, AlgebraTag::su2) < 1e-15);
    MatX notsu = MatX::Identity(2, 2);
    CHECK(membership_residual(notsu, AlgebraTag::su2) > 0.5);
}
