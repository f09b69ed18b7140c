#include <catch_amalgamated.hpp>

#include <functional>

#include "mcpsel/exponentials.hpp"
#include "mcpsel/random.hpp"

using namespace mcpsel;
using Catch::Approx;

namespace {

// adaptive Simpson on a complex integrand
cplx simpson(const std::function<cplx(double)>& f, double a, double b, double t, int depth = 0) {
    double m = (a + b) / 2;
    cplx fa = f(a), fm = f(m), fb = f(b);
    cplx whole = (b - a) / 6 * (fa + 4.0 * fm + fb);
    double l = (a + m) / 2, r = (m + b) / 2;
    cplx left = (m - a) / 6 * (fa + 4.0 * f(l) + fm), right = (b - m) / 6 * (fm + 4.0 * f(r) + fb);
    if (depth > 40 || std::abs(left + right - whole) < 15 * t) return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, t / 2, depth + 1) + simpson(f, m, b, t / 2, depth + 1);
}

cplx quad_fourier(const IntervalUnion& s, long k) {
    cplx acc = 0;
    for (auto [a, b] : s.intervals) {
        // split so each piece sees at most a few oscillations
        int pieces = std::max(1L, 4 * std::abs(k));
        for (int p = 0; p < pieces; ++p) {
            double x0 = a + (b - a) * p / pieces, x1 = a + (b - a) * (p + 1) / pieces;
            acc += simpson([k](double x) { return std::polar(1.0, -2 * kPi * double(k) * x); }, x0, x1, 1e-13 / pieces);
        }
    }
    return acc;
}

}  // namespace

TEST_CASE("gram of {e_0, e_1} on [0,1/2), frozen by hand") {
    // integral_0^{1/2} e^{2 pi i x} dx = i/pi
    Mat g = exp_gram(IntervalUnion({{0, 0.5}}), {0, 1});
    CHECK(std::abs(g(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(g(1, 1) - 0.5) < 1e-15);
    CHECK(std::abs(g(0, 1) - cplx(0, 1 / kPi)) < 1e-15);
    CHECK(std::abs(g(1, 0) - cplx(0, -1 / kPi)) < 1e-15);
}

TEST_CASE("closed-form fourier coefficients match quadrature") {
    Rng g(81);
    for (int it = 0; it < 6; ++it) {
        double a = g.uniform(0, 0.4), b = g.uniform(0.45, 0.6), c = g.uniform(0.7, 1);
        IntervalUnion s({{a, b}, {c, 1}});
        for (long k = -64; k <= 64; k += 7) CHECK(std::abs(indicator_fourier(s, k) - quad_fourier(s, k)) < 1e-10);
    }
}

TEST_CASE("exp gram is hermitian toeplitz with measure on the diagonal") {
    IntervalUnion s({{0.1, 0.3}, {0.6, 0.75}});
    std::vector<int> f{-3, -1, 0, 2, 5};
    Mat g = exp_gram(s, f);
    CHECK((g - g.adjoint()).norm() < 1e-14);
    for (int i = 0; i < 5; ++i) CHECK(g(i, i).real() == Approx(0.35));
    Mat h = exp_gram(s, {0, 2, 3, 5, 8});
    CHECK(std::abs(h(1, 0) - exp_gram(s, {7, 9})(1, 0)) < 1e-14);
}

TEST_CASE("bad interval unions are rejected") {
    CHECK_THROWS_AS(IntervalUnion({{0.5, 0.4}}), Error);
    CHECK_THROWS_AS(IntervalUnion({{0.1, 0.5}, {0.4, 0.6}}), Error);
    CHECK_THROWS_AS(IntervalUnion({{0.1, 1.2}}), Error);
}

TEST_CASE("lambda_min does not grow as frequencies are added") {
    Rng g(82);
    IntervalUnion s({{0.2, 0.7}});
    std::vector<int> f;
    double prev = 1e9;
    for (int k = -10; k <= 10; ++k) {
        if (g.uniform() < 0.4) continue;
        f.push_back(k);
        double lm = lambda_min(exp_gram(s, f));
        CHECK(lm <= prev + 1e-12);
        prev = lm;
    }
}

TEST_CASE("syndetic riesz selection on half the circle") {
    IntervalUnion s({{0, 0.5}});
    auto c = syndetic_riesz_select(s, 0.5, 32, 0.5);
    CHECK(c.r == 4);
    REQUIRE(c.lambda.selected.size() > 1);
    CHECK(c.lambda_min >= c.target_lo - 1e-8);
    CHECK(c.lambda_max <= c.target_hi + 1e-8);
    CHECK(c.max_gap <= 2 * c.r - 1);
    RVec ev = eigenvalues(exp_gram(s, c.lambda.selected));
    CHECK(ev.minCoeff() == Approx(c.lambda_min).margin(1e-12));
}

TEST_CASE("full circle needs no selection") {
    auto c = syndetic_riesz_select(IntervalUnion({{0, 1}}), 0.5, 8, 0.5);
    CHECK(c.mode == "exact");
    CHECK(c.lambda.selected.size() == 17u);
    CHECK(c.lambda_min == Approx(1));
}

TEST_CASE("removing a sparse set keeps the rest a riesz sequence") {
    RemovalOptions o;
    o.r = 2;
    o.sparse.depth = 4;
    auto out = unit_norm_removal({IntervalUnion({{0, 0.95}})}, 64, o);
    CHECK(!out.removed.empty());
    CHECK(out.cert.min_gap >= 2);
    CHECK(out.cert.lambda_min >= out.cert.target_lo - 1e-9);
    CHECK(out.cert.lambda_max <= 1 + 1e-9);
    CHECK(out.cert.target_lo == std::ldexp(1.0, -5));
}

TEST_CASE("bounded frame sample: leaf deviation below eps") {
    SparseOptions o;
    o.depth = 4;
    auto out = bounded_frame_sample(IntervalUnion({{0, 1.0 / 32}}), 0.9, 64, 2, o);
    CHECK(out.a == 16);
    CHECK(out.cert.lambda_min >= -0.9);
    CHECK(out.cert.lambda_max <= 0.9);
    CHECK(out.cert.min_gap >= 2);
}
