#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "mcpsel/binary.hpp"
#include "mcpsel/frames.hpp"
#include "mcpsel/linalg.hpp"

namespace mcpsel {

struct IntervalUnion {
    std::vector<std::pair<double, double>> intervals;  // [a,b), sorted and disjoint

    IntervalUnion() = default;
    explicit IntervalUnion(std::vector<std::pair<double, double>> iv) : intervals(std::move(iv)) { validate(); }

    void validate() const {
        double last = 0;
        for (size_t k = 0; k < intervals.size(); ++k) {
            auto [a, b] = intervals[k];
            if (!(a >= 0 && b <= 1 && a < b)) throw Error("bad_interval", "intervals must satisfy 0 <= a < b <= 1");
            if (k && a < last) throw Error("bad_interval", "intervals must be sorted and disjoint");
            last = b;
        }
    }
    double measure() const {
        double m = 0;
        for (auto [a, b] : intervals) m += b - a;
        return m;
    }
};

inline const double kPi = std::acos(-1.0);

// integral over S of e^{-2 pi i k x}
inline cplx indicator_fourier(const IntervalUnion& s, long k) {
    if (k == 0) return s.measure();
    cplx acc = 0;
    double w = -2 * kPi * double(k);
    for (auto [a, b] : s.intervals) acc += (std::polar(1.0, w * b) - std::polar(1.0, w * a)) / cplx(0, w);
    return acc;
}

struct FrequencySet {
    int window = 0;             // [-W, W]
    std::vector<int> selected;  // sorted

    std::vector<int> all() const {
        std::vector<int> v;
        for (int k = -window; k <= window; ++k) v.push_back(k);
        return v;
    }
};

// Entry (row mu, column lambda) = <e_lambda, e_mu> = indicator_fourier(S, mu - lambda).
inline Mat exp_gram(const IntervalUnion& s, const std::vector<int>& freqs) {
    int n = static_cast<int>(freqs.size());
    Mat g(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            cplx v = indicator_fourier(s, long(freqs[a]) - freqs[b]);
            g(a, b) = v;
            g(b, a) = std::conj(v);
        }
        g(a, a) = s.measure();
    }
    return g;
}

inline int max_consecutive_gap(const std::vector<int>& v) {
    int g = 0;
    for (size_t k = 1; k < v.size(); ++k) g = std::max(g, v[k] - v[k - 1]);
    return g;
}

inline int min_consecutive_gap(const std::vector<int>& v) {
    int g = std::numeric_limits<int>::max();
    for (size_t k = 1; k < v.size(); ++k) g = std::min(g, v[k] - v[k - 1]);
    return g;
}

struct ExpCertificate {
    double lambda_min = 0, lambda_max = 0;
    double target_lo = 0, target_hi = 0;
    int min_gap = 0;
    int max_gap = 0;
    int r = 0;
    FrequencySet lambda;
    std::string mode;
};

inline ExpCertificate syndetic_riesz_select(const IntervalUnion& s, double eps, int window, double C, const GreedyOptions& opt = {}) {
    double m = s.measure();
    if (!(m > 0)) throw Error("hypothesis:measure", "S must have positive measure");
    int r = static_cast<int>(std::ceil(C / (m * eps * eps) - 1e-12));
    int n = 2 * window + 1;
    if (n < 2 * r) throw Error("hypothesis:window", "window holds fewer than two blocks of length r");
    FrequencySet f;
    f.window = window;
    auto freqs = f.all();
    Mat g = exp_gram(s, freqs) / m;
    std::vector<std::vector<int>> blocks;
    for (int k = 0; k + r <= n; k += r) {
        std::vector<int> b;
        for (int i = k; i < k + r; ++i) b.push_back(i);
        blocks.push_back(b);
    }
    ExpCertificate c;
    c.r = r;
    if (lambda_max(g) <= 1 + tol().eq) {
        // orthonormal after normalising: every frequency qualifies
        f.selected = freqs;
        c.mode = "exact";
    } else {
        RepsOptions ro;
        ro.C = C;
        ro.greedy = opt;
        auto rc = r_eps_select({gram_coordinates(g)}, blocks, eps, ro);
        for (int i : rc.selected) f.selected.push_back(freqs[i]);
        c.mode = rc.modes.back();
    }
    Mat gs = exp_gram(s, f.selected);
    c.lambda_min = lambda_min(gs);
    c.lambda_max = lambda_max(gs);
    c.target_lo = (1 - eps) * m;
    c.target_hi = (1 + eps) * m;
    c.min_gap = min_consecutive_gap(f.selected);
    c.max_gap = max_consecutive_gap(f.selected);
    c.lambda = f;
    return c;
}

struct RemovalOptions {
    double r = -1;  // separation radius; <= 0 selects the largest r allowed by the removal hypothesis
    SparseOptions sparse;
};

struct ExpRemoval {
    RemovalResult removal;
    ExpCertificate cert;  // lambda_* on the kept frequencies, gap of the removed set
    std::vector<int> removed;
};

inline double largest_radius(const DoublingPointSet& sp, double cap) {
    double r = 0;
    for (int k = 1; k <= sp.size(); ++k)
        if (sp.sup_ball(k) <= cap) r = k;
    return r;
}

// Several sets share one removed set; systems are Gram coordinates of exp_gram(S_n, window).
inline ExpRemoval unit_norm_removal(const std::vector<IntervalUnion>& sets, int window, const RemovalOptions& opt = {}) {
    FrequencySet f;
    f.window = window;
    auto freqs = f.all();
    auto space = DoublingPointSet::integers(-window, window + 1);
    std::vector<VectorSystem> sys;
    std::vector<double> eps;
    double delta0 = 0;
    for (auto& s : sets) {
        sys.push_back(gram_coordinates(exp_gram(s, freqs)));
        if (sys.back().dim == 0) throw Error("hypothesis:measure", "S must have positive measure");
        eps.push_back(std::min(s.measure(), 1.0));
        delta0 += 1 - eps.back();
    }
    double r = opt.r;
    if (r <= 0) {
        double C = opt.sparse.C > 0 ? opt.sparse.C : c_derived();
        double c_hat = std::ldexp(1.0, opt.sparse.eta - 1) / (C * C);
        r = delta0 > 0 ? largest_radius(space, c_hat / (4 * delta0)) : 1;
        if (r < 1) throw Error("hypothesis:mpa2", "no radius satisfies sup #B(x,r) <= c_hat/(4 delta0)");
    }
    ExpRemoval out;
    out.removal = remove_sparse_set(space, sys, eps, r, opt.sparse);
    for (int i : out.removal.removed) out.removed.push_back(freqs[i]);
    std::vector<int> kept;
    for (int i : complement_of(out.removal.removed, int(freqs.size()))) kept.push_back(freqs[i]);
    out.cert.lambda.window = window;
    out.cert.lambda.selected = kept;
    out.cert.r = static_cast<int>(r);
    out.cert.min_gap = out.removed.size() > 1 ? min_consecutive_gap(out.removed) : std::numeric_limits<int>::max();
    out.cert.lambda_min = std::numeric_limits<double>::infinity();
    out.cert.lambda_max = 0;
    for (auto& s : sets) {
        Mat g = exp_gram(s, kept);
        out.cert.lambda_min = std::min(out.cert.lambda_min, lambda_min(g));
        out.cert.lambda_max = std::max(out.cert.lambda_max, lambda_max(g));
    }
    out.cert.target_lo = out.removal.promised_lower;
    out.cert.target_hi = 1;
    out.cert.mode = out.removal.sparse.ks2.tree.levels.size() > 1 ? out.removal.sparse.ks2.tree.levels[0][0].mode : "exact";
    return out;
}

struct ExpFrameSample {
    SparseResult sparse;
    ExpCertificate cert;  // lambda_* are extreme eigenvalues of 2^N sum_leaf T - T; targets are -eps, eps
    int leaf = 0;
    double a = 1;
    double frame_lower = 0, frame_upper = 0;  // spectrum of 2^N exp_gram(S, leaf)
};

inline ExpFrameSample bounded_frame_sample(const IntervalUnion& s, double eps, int window, double r, const SparseOptions& opt = {}) {
    FrequencySet f;
    f.window = window;
    auto freqs = f.all();
    auto space = DoublingPointSet::integers(-window, window + 1);
    Mat g = exp_gram(s, freqs);
    VectorSystem u = gram_coordinates(g);
    if (u.dim == 0) throw Error("hypothesis:measure", "S must have positive measure");
    std::vector<Mat> ops;
    for (auto& v : u.vectors) ops.push_back(v * v.adjoint());
    ExpFrameSample out;
    out.sparse = sparse_selector_partition(space, ops, eps, r, opt);
    // the leaf with the smallest deviation
    for (size_t k = 1; k < out.sparse.deviations.size(); ++k)
        if (out.sparse.deviations[k] < out.sparse.deviations[out.leaf]) out.leaf = static_cast<int>(k);
    auto& leaf = out.sparse.leaves[out.leaf];
    out.a = std::ldexp(1.0, out.sparse.N);
    Mat t = Mat::Zero(u.dim, u.dim), sl = Mat::Zero(u.dim, u.dim);
    for (auto& op : ops) t += op;
    for (int i : leaf) sl += ops[i];
    RVec ev = eigenvalues(Mat(out.a * sl - t));
    out.cert.lambda_min = ev.minCoeff();
    out.cert.lambda_max = ev.maxCoeff();
    out.cert.target_lo = -eps;
    out.cert.target_hi = eps;
    std::vector<int> sel;
    for (int i : leaf) sel.push_back(freqs[i]);
    out.cert.lambda.window = window;
    out.cert.lambda.selected = sel;
    out.cert.r = static_cast<int>(r);
    out.cert.min_gap = sel.size() > 1 ? min_consecutive_gap(sel) : std::numeric_limits<int>::max();
    if (!sel.empty()) {
        RVec fe = eigenvalues(Mat(out.a * exp_gram(s, sel)));
        out.frame_lower = fe.minCoeff();
        out.frame_upper = fe.maxCoeff();
    }
    return out;
}

}  // namespace mcpsel
