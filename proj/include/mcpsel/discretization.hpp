#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mcpsel/binary.hpp"
#include "mcpsel/frames.hpp"
#include "mcpsel/linalg.hpp"
#include "mcpsel/selector.hpp"

namespace mcpsel {

// Exponents r_k, ascending, with sum 2^{-r_k} <= a < sum + 2^{-bits}.
inline std::vector<int> binary_expand(double a, int bits) {
    if (!(a > 0)) throw Error("nonpositive_weight", "weights must be positive");
    if (!(a < std::ldexp(1.0, bits))) throw Error("weight_range", "weight exceeds 2^bits");
    std::vector<int> r;
    double rest = a;
    int top = static_cast<int>(std::floor(std::log2(a)));
    for (int k = -top; k <= bits; ++k) {
        double p = std::ldexp(1.0, -k);
        if (p <= rest) {
            r.push_back(k);
            rest -= p;
        }
    }
    return r;
}

inline double dyadic_value(const std::vector<int>& r) {
    double s = 0;
    for (int k : r) s += std::ldexp(1.0, -k);
    return s;
}

struct SplitCheck {
    double gamma1, gamma2, max_violation;
};

// k: orthonormal columns spanning K (possibly zero columns)
inline SplitCheck projection_split_check(const Mat& t, const Mat& k) {
    int d = static_cast<int>(t.rows());
    Mat p = k.cols() ? Mat(k * k.adjoint()) : Mat(Mat::Zero(d, d));
    Mat q = Mat::Identity(d, d) - p;
    Mat a = p * t * p, b = q * t * q;
    SplitCheck s;
    s.gamma1 = d ? operator_norm(a) : 0;
    s.gamma2 = d ? operator_norm(b) : 0;
    s.max_violation = (d ? operator_norm(Mat(t - a - b)) : 0) - std::sqrt(s.gamma1 * s.gamma2);
    return s;
}

struct SampleCount {
    int index;
    std::int64_t multiplicity;
};

struct SamplingResult {
    std::vector<SampleCount> samples;
    double a = 0;
    double c0 = 0;
    double deviation = 0;
    double delta = 0, eps = 0;
    double norm_T = 0;
    int r = 0, N = 0;
    std::string leaf;
    double bracket_lo = 0, bracket_hi = 0;  // c0 delta/eps^2 and twice that (times ||T|| when ||T|| > 1)
    double truncation = 0;                   // ||T - dyadic T||
    bool sandwich_ok = true;
    std::vector<std::string> modes;
};

struct SamplingOptions {
    double C = -1;  // <= 0 selects the derived constant
    int bits = 24;
    GreedyOptions greedy;
};

namespace detail {

// Multiset node of the replicated family: counts[i] copies of 2^{-r} T_i.
struct MultiNode {
    std::vector<std::int64_t> counts;
};

inline Mat multiset_sum(const std::vector<Mat>& ops, const std::vector<std::int64_t>& c, double scale) {
    int d = static_cast<int>(ops[0].rows());
    Mat s = Mat::Zero(d, d);
    for (size_t i = 0; i < ops.size(); ++i)
        if (c[i]) s += (scale * double(c[i])) * ops[i];
    return s;
}

// Splits a multiset: identical copies are shared evenly, singletons go
// through a KS2 split on the family (2^j/B_j) 2^{-r} T_i.
inline std::pair<MultiNode, MultiNode> split_multiset(const std::vector<Mat>& ops, const MultiNode& node, double scale, const GreedyOptions& opt,
                                                      double eps_cap, std::string& mode) {
    MultiNode a, b;
    a.counts.resize(node.counts.size());
    b.counts.resize(node.counts.size());
    std::vector<int> singles;
    for (size_t i = 0; i < node.counts.size(); ++i) {
        a.counts[i] = b.counts[i] = node.counts[i] / 2;
        if (node.counts[i] % 2) singles.push_back(static_cast<int>(i));
    }
    mode = "exact";
    if (singles.empty()) return {a, b};
    int d = static_cast<int>(ops[0].rows());
    SelectorInstance in;
    for (int i : singles) in.operators.push_back(Mat(scale * ops[i]));
    if (singles.size() % 2) in.operators.push_back(Mat::Zero(d, d));
    for (size_t k = 0; k < in.operators.size(); k += 2) in.blocks.push_back({int(k), int(k + 1)});
    in.epsilon = eps_cap;
    auto c = ks2_select(in, opt);
    mode = c.mode;
    std::vector<char> chosen(in.operators.size(), 0);
    for (int s : c.selected) chosen[s] = 1;
    for (size_t k = 0; k < singles.size(); ++k) (chosen[k] ? a : b).counts[singles[k]] += 1;
    return {a, b};
}

}  // namespace detail

// Dyadic weights 2^{-r_i}; K given by orthonormal columns (zero columns for the trivial subspace).
inline SamplingResult scaf_sample(const std::vector<Mat>& ops, const std::vector<std::vector<int>>& exps, const Mat& k, double eps,
                                  const SamplingOptions& opt = {}) {
    if (ops.empty() || ops.size() != exps.size()) throw Error("hypothesis:family", "one exponent list per operator is required");
    if (!(eps > 0)) throw Error("hypothesis:eps", "eps must be positive");
    int d = static_cast<int>(ops[0].rows());
    SamplingResult res;
    res.eps = eps;
    double C = opt.C > 0 ? opt.C : c_derived();
    res.c0 = C * C;
    int rmax = std::numeric_limits<int>::min();
    Mat t = Mat::Zero(d, d);
    for (size_t i = 0; i < ops.size(); ++i) {
        res.delta = std::max(res.delta, trace(ops[i]));
        for (int e : exps[i]) {
            rmax = std::max(rmax, e);
            t += std::ldexp(1.0, -e) * ops[i];
        }
    }
    detail::check_sum_below_identity(t);
    res.norm_T = operator_norm(t);
    Mat p = k.cols() ? Mat(k * k.adjoint()) : Mat(Mat::Zero(d, d));
    Mat q = Mat::Identity(d, d) - p;
    double gamma = trace(Mat(p * t * p));
    if (gamma > 1 + tol().eq) throw Error("hypothesis:gamma", "tr(P_K T P_K) exceeds 1");
    // common level r and depth N with 2^N < 2^r eps^2/(C^2 delta) <= 2^{N+1}
    double x = res.delta > 0 ? eps * eps / (res.c0 * res.delta) : 1.0;
    int r = std::max(rmax, 0);
    while (std::ldexp(x, r) <= 1) ++r;
    int N = static_cast<int>(std::ceil(std::log2(std::ldexp(x, r)))) - 1;
    while (std::ldexp(1.0, N) >= std::ldexp(x, r)) --N;
    while (std::ldexp(1.0, N + 1) < std::ldexp(x, r)) ++N;
    if (r > 62) throw Error("precision", "replication level exceeds 62 bits");
    res.r = r;
    res.N = N;
    res.a = std::ldexp(1.0, r - N);
    res.bracket_lo = res.c0 * res.delta / (eps * eps);
    res.bracket_hi = 2 * res.bracket_lo;
    detail::MultiNode node;
    for (auto& e : exps) {
        std::int64_t m = 0;
        for (int v : e) m += std::int64_t(1) << (r - v);
        node.counts.push_back(m);
    }
    double base = std::ldexp(1.0, -r);
    auto bj = bj_values(base * res.delta, N);
    for (int j = 0; j < N; ++j) {
        double scale = std::ldexp(1.0, j) * base / bj[j];
        std::string mode;
        auto [c0n, c1n] = detail::split_multiset(ops, node, scale, opt.greedy, scale * res.delta, mode);
        res.modes.push_back(mode);
        // the child with the smaller trace on K; on a trivial K, the smaller deviation
        double f = std::ldexp(1.0, j + 1) * base;
        auto key = [&](const detail::MultiNode& c) {
            Mat s = detail::multiset_sum(ops, c.counts, f);
            return k.cols() ? trace(Mat(p * s * p)) : operator_norm(Mat(s - t));
        };
        bool first = key(c0n) <= key(c1n);
        node = first ? c0n : c1n;
        res.leaf += first ? "0" : "1";
    }
    for (size_t i = 0; i < ops.size(); ++i)
        if (node.counts[i]) res.samples.push_back({static_cast<int>(i), node.counts[i]});
    Mat s = detail::multiset_sum(ops, node.counts, 1.0 / res.a);
    res.deviation = operator_norm(Mat(s - t));
    Mat lhs = s - t;
    Mat band = eps * q + 4 * std::sqrt(std::max(gamma, 0.0)) * Mat::Identity(d, d);
    res.sandwich_ok = psd_order_leq(HermitianMatrix(lhs), HermitianMatrix(band), tol().eq) &&
                      psd_order_leq(HermitianMatrix(Mat(-band)), HermitianMatrix(lhs), tol().eq);
    return res;
}

inline SamplingResult scal_sample(const std::vector<Mat>& ops, const std::vector<double>& weights, double eps, const SamplingOptions& opt = {}) {
    if (ops.empty() || ops.size() != weights.size()) throw Error("hypothesis:family", "one weight per operator is required");
    if (!(eps > 0)) throw Error("hypothesis:eps", "eps must be positive");
    int d = static_cast<int>(ops[0].rows());
    Mat t = Mat::Zero(d, d);
    for (size_t i = 0; i < ops.size(); ++i) {
        if (!(weights[i] > 0)) throw Error("nonpositive_weight", "weights must be positive");
        t += weights[i] * ops[i];
    }
    double nt = operator_norm(t);
    double scale = nt > 1 ? nt : 1.0;
    double e2 = eps / scale;
    std::vector<std::vector<int>> exps;
    Mat td = Mat::Zero(d, d);
    for (size_t i = 0; i < ops.size(); ++i) {
        exps.push_back(binary_expand(weights[i] / scale, opt.bits));
        td += dyadic_value(exps.back()) * ops[i];
    }
    double trunc = operator_norm(Mat(t / scale - td));
    if (trunc >= 1e-3 * e2) {
        int need = opt.bits;
        double tot = 0;
        for (auto& op : ops) tot += operator_norm(op);
        while (std::ldexp(tot, -need) >= 1e-3 * e2) ++need;
        throw Error("precision", "weight truncation too coarse; needs " + std::to_string(need) + " bits");
    }
    SamplingResult res = scaf_sample(ops, exps, Mat(d, 0), e2, opt);
    // report in the original scale
    res.eps = eps;
    res.norm_T = nt;
    res.truncation = trunc * scale;
    res.a = res.a / scale;
    Mat s = Mat::Zero(d, d);
    for (auto& smp : res.samples) s += double(smp.multiplicity) * ops[smp.index];
    res.deviation = operator_norm(Mat(s / res.a - t));
    res.bracket_lo = res.c0 * res.delta / (eps * eps) * scale;
    res.bracket_hi = 2 * res.bracket_lo;
    return res;
}

struct DiscretizedFrame {
    SamplingResult sampling;
    VectorSystem system;  // sampled vectors with repetition
    double A = 0, B = 0;  // bounds of the finitely supported frame
    double lower = 0, upper = 0;  // bounds of the sampled system
};

inline DiscretizedFrame discretize_continuous_frame(const std::vector<double>& weights, const std::vector<Vec>& psi, double eps,
                                                    const SamplingOptions& opt = {}) {
    if (psi.empty() || psi.size() != weights.size()) throw Error("hypothesis:family", "one weight per atom is required");
    int d = static_cast<int>(psi[0].size());
    std::vector<Mat> ops;
    Mat s = Mat::Zero(d, d);
    for (size_t i = 0; i < psi.size(); ++i) {
        ops.push_back(psi[i] * psi[i].adjoint());
        s += weights[i] * ops.back();
    }
    DiscretizedFrame out;
    RVec ev = eigenvalues(s);
    out.A = ev.minCoeff();
    out.B = ev.maxCoeff();
    out.sampling = scal_sample(ops, weights, eps, opt);
    out.system.dim = d;
    Mat f = Mat::Zero(d, d);
    for (auto& smp : out.sampling.samples)
        for (std::int64_t c = 0; c < smp.multiplicity; ++c) out.system.vectors.push_back(psi[smp.index]);
    for (auto& smp : out.sampling.samples) f += double(smp.multiplicity) * ops[smp.index];
    RVec fe = eigenvalues(f);
    out.lower = fe.minCoeff();
    out.upper = fe.maxCoeff();
    return out;
}

}  // namespace mcpsel
