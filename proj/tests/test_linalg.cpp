#include <catch_amalgamated.hpp>

#include "mcpsel/linalg.hpp"
#include "mcpsel/random.hpp"

using namespace mcpsel;
using Catch::Approx;

TEST_CASE("eigenvalues of a 2x2 symmetric matrix") {
    Mat a(2, 2);
    a << 2, 1, 1, 2;
    RVec ev = eigenvalues(a);
    CHECK(ev(0) == Approx(1).margin(1e-14));
    CHECK(ev(1) == Approx(3).margin(1e-14));
    CHECK(operator_norm(a) == Approx(3));
    CHECK(trace(a) == 4);
}

TEST_CASE("hermitian wrapper rejects asymmetric input") {
    Mat a(2, 2);
    a << 1, 2, 0, 1;
    CHECK_THROWS_AS(HermitianMatrix(a), Error);
    Mat b(2, 3);
    CHECK_THROWS_AS(HermitianMatrix(b), Error);
}

TEST_CASE("psd wrapper clips rounding-level negatives and rejects real ones") {
    Mat a = Mat::Identity(2, 2);
    a(1, 1) = -1e-12;
    PsdMatrix p(a);
    CHECK(lambda_min(p.mat()) >= 0);
    a(1, 1) = -1e-3;
    CHECK_THROWS_AS(PsdMatrix(a), Error);
}

TEST_CASE("direct sum places blocks on the diagonal, empty parts allowed") {
    Mat a = Mat::Constant(1, 1, 2.0), b = Mat::Constant(2, 2, 3.0), e(0, 0);
    Mat s = direct_sum({a, e, b});
    REQUIRE(s.rows() == 3);
    CHECK(s(0, 0) == cplx(2));
    CHECK(s(0, 1) == cplx(0));
    CHECK(s(2, 1) == cplx(3));
    CHECK(direct_sum({e, e}).rows() == 0);
}

TEST_CASE("psd square root squares back, on random matrices") {
    Rng g(3);
    for (int it = 0; it < 50; ++it) {
        int d = g.integer(1, 6);
        Mat p = random_psd(g, d, g.integer(1, d)) * g.uniform(0.1, 5);
        Mat r = psd_sqrt(p);
        CHECK((r * r - p).norm() <= 1e-10 * std::max(1.0, p.norm()));
        CHECK(is_psd(r, 1e-12));
    }
}

TEST_CASE("loewner order on random pairs A <= A + P") {
    Rng g(4);
    for (int it = 0; it < 50; ++it) {
        int d = g.integer(1, 5);
        Mat a = random_psd(g, d), p = random_psd(g, d, g.integer(1, d));
        CHECK(psd_order_leq(a, Mat(a + p), 1e-12));
        CHECK_FALSE(psd_order_leq(Mat(a + p), a, 1e-12));
    }
}

TEST_CASE("principal submatrix keeps the listed rows and columns") {
    Mat g(3, 3);
    g << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    Mat p = principal(g, {0, 2});
    CHECK(p(0, 1) == cplx(3));
    CHECK(p(1, 0) == cplx(7));
    CHECK(p(1, 1) == cplx(9));
}

TEST_CASE("random unitary is unitary and parseval frames are parseval") {
    Rng g(5);
    for (int d : {1, 3, 7}) {
        Mat u = random_unitary(g, d);
        CHECK((u.adjoint() * u - Mat::Identity(d, d)).norm() < 1e-12);
        auto s = random_parseval(g, d, 3 * d);
        CHECK((s.frame_operator() - Mat::Identity(d, d)).norm() < 1e-12);
    }
}
