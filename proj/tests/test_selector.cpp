#include <catch_amalgamated.hpp>

#include "mcpsel/random.hpp"
#include "mcpsel/selector.hpp"

using namespace mcpsel;
using Catch::Approx;

namespace {

SelectorInstance frame_instance(Rng& g, int d, int n, int block) {
    SelectorInstance in;
    in.operators = rank_one_operators(random_parseval(g, d, n));
    in.blocks = consecutive_blocks(n, block);
    for (auto& op : in.operators) in.epsilon = std::max(in.epsilon, trace(op));
    return in;
}

std::vector<FiniteRandomPsd> random_family(Rng& g, int d, int m, int outcomes) {
    std::vector<FiniteRandomPsd> fam;
    for (int i = 0; i < m; ++i) {
        std::vector<Mat> o;
        for (int k = 0; k < outcomes; ++k) o.push_back(random_psd(g, d, 1) * g.uniform(0.1, 1));
        fam.push_back(FiniteRandomPsd::uniform(o));
    }
    return fam;
}

}  // namespace

TEST_CASE("finite random matrices validate their probabilities") {
    FiniteRandomPsd x{{{Mat::Identity(2, 2), 0.5}, {Mat::Zero(2, 2), 0.4}}};
    CHECK_THROWS_AS(x.validate(), Error);
    x.outcomes[1].prob = 0.5;
    CHECK_NOTHROW(x.validate());
    CHECK((expected_matrix(x) - 0.5 * Mat::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("greedy witness never exceeds the expectation, which bounds the exhaustive optimum") {
    Rng g(31);
    for (int it = 0; it < 25; ++it) {
        int d = g.integer(2, 3), m = g.integer(2, 5), k = g.integer(2, 3);
        auto fam = random_family(g, d, m, k);
        auto gr = greedy_interlacing_select(fam);
        REQUIRE(gr.mode == GreedyMode::exact);
        REQUIRE(gr.witness);
        double top = gr.trajectory.front();
        CHECK(maxroot(*gr.witness).value <= top + 1e-7);
        // the trajectory never rises
        for (size_t s = 1; s < gr.trajectory.size(); ++s) CHECK(gr.trajectory[s] <= gr.trajectory[s - 1] + 1e-7);
        auto ex = exhaustive_select(fam);
        CHECK(top >= ex.value - 1e-7);
        CHECK(maxroot(*gr.witness).value >= ex.value - 1e-7);
    }
}

TEST_CASE("exhaustive search refuses oversized problems") {
    Rng g(32);
    auto fam = random_family(g, 2, 18, 2);
    CHECK_THROWS_AS(exhaustive_select(fam, 1e5), Error);
}

TEST_CASE("weaver selector meets (1/sqrt(r)+sqrt(eps))^2 on random frames") {
    Rng g(33);
    for (int it = 0; it < 15; ++it) {
        int d = g.integer(2, 5), r = g.integer(2, 3);
        int n = r * g.integer(std::max(2, (d + r - 1) / r), 16 / r);
        if (n < d) continue;
        auto in = frame_instance(g, d, n, r);
        auto c = weaver_ksr_select(in, r);
        CHECK(selector_valid(in, c.selected));
        auto ach = selector_achieved("weaver", in, c.selected);
        CHECK(ach[0] == Approx(c.achieved[0]));
        CHECK(ach[0] <= std::pow(1 / std::sqrt(double(r)) + std::sqrt(in.epsilon), 2) + 1e-9);
    }
}

TEST_CASE("ks2 selector meets 2 sqrt(eps) + eps on both halves") {
    Rng g(34);
    for (int it = 0; it < 15; ++it) {
        int d = g.integer(2, 6), n = 2 * g.integer(d, 8);
        auto in = frame_instance(g, d, n, 2);
        auto c = ks2_select(in);
        double bound = 2 * std::sqrt(in.epsilon) + in.epsilon;
        CHECK(c.promised[0] == Approx(bound));
        auto ach = selector_achieved("ks2", in, c.selected);
        CHECK(ach[0] <= bound + 1e-9);
        CHECK(ach[1] <= bound + 1e-9);
    }
}

TEST_CASE("ks2 rejects blocks that are not pairs") {
    Rng g(35);
    auto in = frame_instance(g, 2, 6, 3);
    CHECK_THROWS_AS(ks2_select(in), Error);
}

TEST_CASE("ks2 on a sub-identity family with tiny eps stays cheap") {
    // tr(I - T)/(2 eps) is huge here; the padding must not blow up
    Rng g(36);
    auto s = random_parseval(g, 2, 8);
    SelectorInstance in;
    for (auto& v : s.vectors) in.operators.push_back(Mat(1e-6 * v * v.adjoint()));
    in.blocks = consecutive_blocks(8, 2);
    for (auto& op : in.operators) in.epsilon = std::max(in.epsilon, trace(op));
    auto c = ks2_select(in);
    CHECK(c.achieved[0] <= c.promised[0] + 1e-12);
}

TEST_CASE("block bounds, frozen") {
    auto b = block_weaver_bounds({0.1, 0.2}, 4);
    // 1/4 + eps_j + 2 sqrt(0.3/4)
    CHECK(b[0] == Approx(0.8977225575051661).epsilon(1e-13));
    CHECK(b[1] == Approx(0.9977225575051661).epsilon(1e-13));
}

TEST_CASE("block selector meets the per-block bound") {
    Rng g(37);
    for (int it = 0; it < 10; ++it) {
        int k = g.integer(1, 3), r = 2, n = 12;
        SelectorInstance in;
        std::vector<std::vector<Mat>> per(n);
        for (int j = 0; j < k; ++j) {
            int d = g.integer(1, 3);
            in.block_dims.push_back(d);
            auto ops = rank_one_operators(random_parseval(g, d, n));
            double e = 0;
            for (int i = 0; i < n; ++i) {
                per[i].push_back(ops[i]);
                e = std::max(e, trace(ops[i]));
            }
            in.block_eps.push_back(e);
        }
        for (auto& p : per) in.operators.push_back(direct_sum(p));
        in.blocks = consecutive_blocks(n, r);
        auto c = block_weaver_select(in, r);
        auto ach = selector_achieved("block", in, c.selected);
        for (int j = 0; j < k; ++j) CHECK(ach[j] <= c.promised[j] + 1e-9);
    }
}

TEST_CASE("partition from a selector covers every index exactly once") {
    Rng g(38);
    auto ops = rank_one_operators(random_parseval(g, 3, 12));
    double eps = 0;
    for (auto& op : ops) eps = std::max(eps, trace(op));
    for (int n : {2, 3}) {
        auto p = partition_from_selector(ops, n, eps);
        std::vector<int> seen(12, 0);
        for (auto& part : p.parts)
            for (int i : part) ++seen[i];
        for (int c : seen) CHECK(c == 1);
    }
}

TEST_CASE("hypotheses are rejected with machine-readable reasons") {
    SelectorInstance in;
    in.operators = {Mat(Mat::Identity(2, 2)), Mat(Mat::Identity(2, 2))};
    in.blocks = {{0, 1}};
    in.epsilon = 2;
    try {
        ks2_select(in);
        FAIL("expected a hypothesis failure");
    } catch (const Error& e) {
        CHECK(e.reason == "hypothesis:sum_leq_identity");
    }
}
