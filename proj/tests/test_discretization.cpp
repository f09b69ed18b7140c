#include <catch_amalgamated.hpp>

#include "mcpsel/discretization.hpp"
#include "mcpsel/random.hpp"

using namespace mcpsel;
using Catch::Approx;

namespace {

struct Family {
    std::vector<Mat> ops;
    std::vector<double> w;
};

Family weighted_family(Rng& g, int d, int n, double norm) {
    Family f;
    Mat t = Mat::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        Vec v = random_gaussian(g, d, 1).col(0);
        v /= v.norm();
        f.ops.push_back(v * v.adjoint() * g.uniform(0.2, 1));
        f.w.push_back(g.uniform(0.5, 1.5));
        t += f.w.back() * f.ops.back();
    }
    double s = norm / operator_norm(t);
    for (auto& x : f.w) x *= s;
    return f;
}

}  // namespace

TEST_CASE("binary expansion of 1/3 to 8 bits is 0.01010101") {
    auto r = binary_expand(1.0 / 3, 8);
    CHECK(r == std::vector<int>{2, 4, 6, 8});
    CHECK(dyadic_value(r) == 0.33203125);
    CHECK(binary_expand(1.0, 4) == std::vector<int>{0});
    CHECK(binary_expand(2.5, 4) == std::vector<int>{-1, 1});
}

TEST_CASE("binary expansion truncates from below within 2^-bits") {
    Rng g(71);
    for (int it = 0; it < 200; ++it) {
        double a = g.uniform(1e-3, 5);
        int bits = g.integer(4, 30);
        double v = dyadic_value(binary_expand(a, bits));
        CHECK(v <= a);
        CHECK(a - v < std::ldexp(1.0, -bits));
    }
}

TEST_CASE("off-diagonal part of a psd matrix is bounded by sqrt(gamma1 gamma2)") {
    Rng g(72);
    for (int it = 0; it < 40; ++it) {
        int d = g.integer(2, 6), k = g.integer(0, d);
        Mat t = random_psd(g, d) * g.uniform(0.1, 2);
        Mat kk = random_isometry(g, d, k);
        CHECK(projection_split_check(t, kk).max_violation <= 1e-10);
    }
}

TEST_CASE("weighted sampling: deviation below eps, a inside its bracket, multiplicities bounded") {
    Rng g(73);
    for (int it = 0; it < 4; ++it) {
        double norm = it % 2 ? 1.0 : 0.7;
        auto f = weighted_family(g, 3, 6, norm);
        double eps = 0.3;
        auto r = scal_sample(f.ops, f.w, eps);
        int d = 3;
        Mat t = Mat::Zero(d, d), s = Mat::Zero(d, d);
        for (size_t i = 0; i < f.ops.size(); ++i) t += f.w[i] * f.ops[i];
        for (auto& x : r.samples) s += double(x.multiplicity) * f.ops[x.index];
        double dev = operator_norm(Mat(s / r.a - t));
        CHECK(dev == Approx(r.deviation).margin(1e-12));
        CHECK(dev < eps);
        CHECK(r.a >= r.bracket_lo * (1 - 1e-12));
        CHECK(r.a <= r.bracket_hi * (1 + 1e-12));
        CHECK(r.c0 == Approx(c_derived() * c_derived()));
        for (auto& x : r.samples) CHECK(double(x.multiplicity) * operator_norm(f.ops[x.index]) <= r.a * (1 + eps));
    }
}

TEST_CASE("norms above one rescale the bracket") {
    Rng g(74);
    auto f = weighted_family(g, 2, 4, 2.0);
    auto r = scal_sample(f.ops, f.w, 0.4);
    CHECK(r.norm_T == Approx(2.0));
    CHECK(r.deviation < 0.4);
    CHECK(r.a >= r.bracket_lo * (1 - 1e-12));
}

TEST_CASE("coarse weight truncation is refused with the needed precision") {
    Rng g(75);
    auto f = weighted_family(g, 2, 4, 1.0);
    SamplingOptions o;
    o.bits = 3;
    try {
        scal_sample(f.ops, f.w, 0.3, o);
        FAIL("expected a precision error");
    } catch (const Error& e) {
        CHECK(e.reason == "precision");
        CHECK(std::string(e.what()).find("bits") != std::string::npos);
    }
}

TEST_CASE("continuous frame discretization keeps the frame bounds within eps") {
    Rng g(76);
    int d = 2, n = 5;
    std::vector<Vec> psi;
    std::vector<double> w;
    for (int i = 0; i < n; ++i) {
        Vec v = random_gaussian(g, d, 1).col(0);
        psi.push_back(v / v.norm() * g.uniform(0.5, 1));
        w.push_back(g.uniform(0.2, 0.5));
    }
    double eps = 0.3;
    auto out = discretize_continuous_frame(w, psi, eps);
    double a = out.sampling.a;
    CHECK(out.lower / a >= out.A - eps);
    CHECK(out.upper / a <= out.B + eps);
    std::int64_t total = 0;
    for (auto& s : out.sampling.samples) total += s.multiplicity;
    CHECK(out.system.size() == total);
}
