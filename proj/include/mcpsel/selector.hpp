#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mcpsel/linalg.hpp"
#include "mcpsel/mcp.hpp"
#include "mcpsel/parallel.hpp"

namespace mcpsel {

struct Outcome {
    Mat m;
    double prob;
};

struct FiniteRandomPsd {
    std::vector<Outcome> outcomes;

    int dim() const { return outcomes.empty() ? 0 : static_cast<int>(outcomes[0].m.rows()); }
    void validate() const {
        if (outcomes.empty()) throw Error("empty_support", "random matrix has no outcomes");
        double s = 0;
        for (auto& o : outcomes) {
            if (!(o.prob > 0 && o.prob <= 1)) throw Error("probability", "outcome probability outside (0,1]");
            if (o.m.rows() != dim()) throw Error("dimension", "outcomes differ in dimension");
            s += o.prob;
        }
        if (std::abs(s - 1) > 1e-12) throw Error("probability", "outcome probabilities do not sum to 1");
    }
    static FiniteRandomPsd constant(Mat a) { return {{{std::move(a), 1.0}}}; }
    static FiniteRandomPsd uniform(std::vector<Mat> ms) {
        FiniteRandomPsd x;
        for (auto& a : ms) x.outcomes.push_back({std::move(a), 1.0 / ms.size()});
        return x;
    }
};

inline Mat expected_matrix(const FiniteRandomPsd& x) {
    Mat e = Mat::Zero(x.dim(), x.dim());
    for (auto& o : x.outcomes) e += o.prob * o.m;
    return e;
}

struct GreedyOptions {
    // largest number of subset-sum eigensolves one exact evaluation may take
    double exact_budget = 16384;
    // sharpness of the spectral soft maximum used when the exact path is too costly
    double softmax_beta = 24;
};

enum class GreedyMode { exact, mean_field };

inline const char* mode_name(GreedyMode m) { return m == GreedyMode::exact ? "exact" : "mean_field"; }

struct GreedyResult {
    std::vector<int> assignment;
    GreedyMode mode = GreedyMode::exact;
    std::optional<RealPolynomial> witness;
    // exact: maxroot after each step (entry 0 is the full expectation);
    // mean-field: soft maximum after each step
    std::vector<double> trajectory;
};

namespace detail {

inline double soft_max(const Mat& s, const std::vector<std::vector<int>>& blocks, double beta) {
    std::vector<double> ev;
    spectrum_by_blocks(s, blocks, ev);
    double top = *std::max_element(ev.begin(), ev.end());
    double acc = 0;
    for (double x : ev) acc += std::exp(beta * (x - top));
    return top + std::log(acc) / beta;
}

}  // namespace detail

inline GreedyResult greedy_interlacing_select(const std::vector<FiniteRandomPsd>& fam, const GreedyOptions& opt = {}) {
    int m = static_cast<int>(fam.size());
    GreedyResult res;
    if (m == 0) return res;
    int d = fam[0].dim();
    for (auto& x : fam) {
        x.validate();
        if (x.dim() != d) throw Error("dimension", "random matrices differ in dimension");
    }
    std::vector<Mat> args(m);
    for (int i = 0; i < m; ++i) args[i] = expected_matrix(fam[i]);
    res.assignment.assign(m, 0);
    res.mode = mcp_cost(args) <= opt.exact_budget ? GreedyMode::exact : GreedyMode::mean_field;

    if (res.mode == GreedyMode::exact) {
        RealPolynomial cur = mcp(args, d);
        res.trajectory.push_back(maxroot(cur).value);
        for (int i = 0; i < m; ++i) {
            int n = static_cast<int>(fam[i].outcomes.size());
            if (n == 1) {
                args[i] = fam[i].outcomes[0].m;
                cur = mcp(args, d);
                res.trajectory.push_back(maxroot(cur).value);
                continue;
            }
            std::vector<RealPolynomial> polys(n);
            std::vector<double> vals(n);
            parallel_for(n, [&](int c) {
                std::vector<Mat> a(args);
                a[i] = fam[i].outcomes[c].m;
                polys[c] = mcp(a, d);
                vals[c] = maxroot(polys[c]).value;
            });
            int best = 0;
            for (int c = 1; c < n; ++c)
                if (vals[c] < vals[best]) best = c;
            res.assignment[i] = best;
            args[i] = fam[i].outcomes[best].m;
            cur = polys[best];
            res.trajectory.push_back(vals[best]);
        }
        res.witness = cur;
        return res;
    }

    std::vector<Mat> all;
    for (auto& x : fam)
        for (auto& o : x.outcomes) all.push_back(o.m);
    auto blocks = detail::common_blocks(all, d);
    Mat s = Mat::Zero(d, d);
    for (auto& a : args) s += a;
    double beta = opt.softmax_beta / std::max(lambda_max(s), 1e-300);
    res.trajectory.push_back(detail::soft_max(s, blocks, beta));
    for (int i = 0; i < m; ++i) {
        Mat base = s - args[i];
        int n = static_cast<int>(fam[i].outcomes.size());
        std::vector<double> vals(n);
        parallel_for(n, [&](int c) { vals[c] = detail::soft_max(base + fam[i].outcomes[c].m, blocks, beta); });
        int best = 0;
        for (int c = 1; c < n; ++c)
            if (vals[c] < vals[best]) best = c;
        res.assignment[i] = best;
        args[i] = fam[i].outcomes[best].m;
        s = base + args[i];
        res.trajectory.push_back(vals[best]);
    }
    if (mcp_cost(args) <= opt.exact_budget) res.witness = mcp(args, d);
    return res;
}

struct ExhaustiveResult {
    std::vector<int> assignment;
    double value;
    RealPolynomial witness;
};

// Global minimiser of maxroot mu over all assignments; ties go to the
// lexicographically first assignment.
inline ExhaustiveResult exhaustive_select(const std::vector<FiniteRandomPsd>& fam, double budget = 1e5) {
    double total = 1;
    for (auto& x : fam) {
        x.validate();
        total *= x.outcomes.size();
    }
    if (total > budget) throw Error("budget_exceeded", "exhaustive search exceeds the assignment budget");
    int m = static_cast<int>(fam.size());
    int d = m ? fam[0].dim() : 0;
    std::vector<int> idx(m, 0);
    ExhaustiveResult best{{}, std::numeric_limits<double>::infinity(), {}};
    std::vector<Mat> args(m);
    while (true) {
        for (int i = 0; i < m; ++i) args[i] = fam[i].outcomes[idx[i]].m;
        RealPolynomial p = mcp(args, d);
        double v = d ? maxroot(p).value : 0.0;
        if (v < best.value) best = {idx, v, p};
        int i = m - 1;
        while (i >= 0 && idx[i] + 1 == int(fam[i].outcomes.size())) idx[i--] = 0;
        if (i < 0) break;
        ++idx[i];
    }
    return best;
}

// ---------------------------------------------------------------------------
// Selector theorems

struct SelectorInstance {
    std::vector<Mat> operators;  // T_i for i = 0..n-1
    std::vector<std::vector<int>> blocks;
    double epsilon = 0;
    std::vector<int> block_dims;  // layout shared by every T_i, for block variants
    std::vector<double> block_eps;

    int dim() const { return operators.empty() ? 0 : static_cast<int>(operators[0].rows()); }
    Mat total() const {
        Mat t = Mat::Zero(dim(), dim());
        for (auto& a : operators) t += a;
        return t;
    }
};

struct SelectorCertificate {
    std::string kind;
    std::vector<int> selected;
    std::vector<double> achieved;
    std::vector<double> promised;
    std::string bound_formula;
    std::string mode;
    std::optional<RealPolynomial> witness;
    double witness_sum_norm = 0;  // norm of the chosen random-matrix outcomes' sum
    int r = 0;
};

namespace detail {

inline void check_blocks(const SelectorInstance& in) {
    int n = static_cast<int>(in.operators.size());
    std::vector<int> seen(n, 0);
    for (auto& b : in.blocks)
        for (int i : b) {
            if (i < 0 || i >= n) throw Error("hypothesis:block_index", "block refers to an unknown index");
            if (seen[i]++) throw Error("hypothesis:blocks_disjoint", "blocks are not disjoint");
        }
    for (auto& t : in.operators) {
        if (t.rows() != in.dim()) throw Error("dimension", "operators differ in dimension");
        if (!is_psd(HermitianMatrix(t))) throw Error("hypothesis:psd", "operator is not positive semidefinite");
    }
}

inline void check_trace_cap(const SelectorInstance& in) {
    for (auto& t : in.operators)
        if (trace(t) > in.epsilon + tol().eq) throw Error("hypothesis:trace", "tr T_i exceeds epsilon");
}

inline void check_sum_below_identity(const Mat& t) {
    if (!psd_order_leq(t, Mat(Mat::Identity(t.rows(), t.cols())), tol().psd))
        throw Error("hypothesis:sum_leq_identity", "sum of operators exceeds the identity");
}

inline Mat sum_over(const std::vector<Mat>& ops, const std::vector<int>& idx, int d) {
    Mat s = Mat::Zero(d, d);
    for (int i : idx) s += ops[i];
    return s;
}

inline std::vector<int> offsets(const std::vector<int>& dims) {
    std::vector<int> off{0};
    for (int x : dims) off.push_back(off.back() + x);
    return off;
}

inline Mat block_of(const Mat& a, const std::vector<int>& dims, int j) {
    auto off = offsets(dims);
    return a.block(off[j], off[j], dims[j], dims[j]);
}

inline double witness_norm(const std::vector<FiniteRandomPsd>& fam, const std::vector<int>& asg) {
    if (fam.empty()) return 0.0;
    Mat s = Mat::Zero(fam[0].dim(), fam[0].dim());
    for (size_t i = 0; i < fam.size(); ++i) s += fam[i].outcomes[asg[i]].m;
    return operator_norm(s);
}

}  // namespace detail

inline std::vector<int> complement_of(const std::vector<int>& sel, int n) {
    std::vector<char> in(n, 0);
    for (int i : sel) in[i] = 1;
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

// Recomputes the achieved quantities of a certificate from the instance.
inline std::vector<double> selector_achieved(const std::string& kind, const SelectorInstance& in, const std::vector<int>& sel) {
    int d = in.dim();
    Mat s = detail::sum_over(in.operators, sel, d);
    if (kind == "weaver") return {operator_norm(s)};
    if (kind == "ks2") {
        Mat half = in.total() / 2.0;
        Mat c = detail::sum_over(in.operators, complement_of(sel, int(in.operators.size())), d);
        return {operator_norm(Mat(s - half)), operator_norm(Mat(c - half))};
    }
    if (kind == "block") {
        std::vector<double> out;
        for (size_t j = 0; j < in.block_dims.size(); ++j) out.push_back(operator_norm(detail::block_of(s, in.block_dims, int(j))));
        return out;
    }
    throw Error("unknown_kind", "unknown selector kind " + kind);
}

inline bool selector_valid(const SelectorInstance& in, const std::vector<int>& sel) {
    for (auto& b : in.blocks) {
        int hit = 0;
        for (int i : b) hit += std::count(sel.begin(), sel.end(), i) > 0;
        if (hit != 1) return false;
    }
    return sel.size() == in.blocks.size();
}

inline SelectorCertificate weaver_ksr_select(const SelectorInstance& in, int r, const GreedyOptions& opt = {}) {
    detail::check_blocks(in);
    detail::check_trace_cap(in);
    detail::check_sum_below_identity(in.total());
    if (r < 1) throw Error("hypothesis:r", "r must be positive");
    std::vector<FiniteRandomPsd> fam;
    std::vector<std::vector<int>> used;
    for (auto& b : in.blocks) {
        if (int(b.size()) < r) throw Error("hypothesis:block_size", "a block has fewer than r elements");
        std::vector<int> u(b.begin(), b.begin() + r);
        std::vector<Mat> outs;
        for (int i : u) outs.push_back(double(r) * in.operators[i]);
        fam.push_back(FiniteRandomPsd::uniform(outs));
        used.push_back(u);
    }
    SelectorCertificate c;
    c.kind = "weaver";
    c.r = r;
    if (fam.empty()) {
        c.achieved = {0.0};
        c.promised = {std::pow(1 / std::sqrt(double(r)) + std::sqrt(in.epsilon), 2)};
        c.bound_formula = "(1/sqrt(r)+sqrt(eps))^2";
        c.mode = "exact";
        return c;
    }
    auto g = greedy_interlacing_select(fam, opt);
    for (size_t k = 0; k < used.size(); ++k) c.selected.push_back(used[k][g.assignment[k]]);
    std::sort(c.selected.begin(), c.selected.end());
    c.achieved = selector_achieved("weaver", in, c.selected);
    c.promised = {std::pow(1 / std::sqrt(double(r)) + std::sqrt(in.epsilon), 2)};
    c.bound_formula = "(1/sqrt(r)+sqrt(eps))^2";
    c.mode = mode_name(g.mode);
    c.witness = g.witness;
    c.witness_sum_norm = detail::witness_norm(fam, g.assignment);
    return c;
}

inline SelectorCertificate ks2_select(const SelectorInstance& in, const GreedyOptions& opt = {}) {
    detail::check_blocks(in);
    detail::check_trace_cap(in);
    int n = static_cast<int>(in.operators.size());
    size_t covered = 0;
    for (auto& b : in.blocks) {
        if (b.size() != 2) throw Error("hypothesis:pair_partition", "blocks must be pairs");
        covered += 2;
    }
    if (int(covered) != n) throw Error("hypothesis:pair_partition", "pairs must cover the index set");
    int d = in.dim();
    Mat t = in.total();
    detail::check_sum_below_identity(t);
    double eps = in.epsilon;
    std::vector<FiniteRandomPsd> fam;
    for (auto& b : in.blocks) {
        Mat x0 = direct_sum({Mat(2.0 * in.operators[b[0]]), Mat(2.0 * in.operators[b[1]])});
        Mat x1 = direct_sum({Mat(2.0 * in.operators[b[1]]), Mat(2.0 * in.operators[b[0]])});
        fam.push_back({{{x0, 0.5}, {x1, 0.5}}});
    }
    Mat rest = Mat::Identity(d, d) - t;
    double tr_rest = std::max(0.0, trace(rest));
    if (eps > 0 && tr_rest > tol().eq) {
        double pf = std::ceil(tr_rest / (2 * eps) - 1e-12);
        // beyond the exact budget only the sum of the pieces matters
        int p = static_cast<int>(std::min(pf, opt.exact_budget + 1));
        Mat piece = rest / double(std::max(p, 1));
        for (int k = 0; k < p; ++k) fam.push_back(FiniteRandomPsd::constant(direct_sum({piece, piece})));
    }
    SelectorCertificate c;
    c.kind = "ks2";
    c.bound_formula = "2*sqrt(eps)+eps";
    double bound = 2 * std::sqrt(eps) + eps;
    c.promised = {bound, bound};
    auto g = greedy_interlacing_select(fam, opt);
    for (size_t k = 0; k < in.blocks.size(); ++k) c.selected.push_back(in.blocks[k][g.assignment[k]]);
    std::sort(c.selected.begin(), c.selected.end());
    c.achieved = selector_achieved("ks2", in, c.selected);
    c.mode = mode_name(g.mode);
    c.witness = g.witness;
    c.witness_sum_norm = detail::witness_norm(fam, g.assignment);
    return c;
}

inline std::vector<double> block_weaver_bounds(const std::vector<double>& eps, int r) {
    double s = 0;
    for (double e : eps) s += e;
    std::vector<double> out;
    for (double e : eps) out.push_back(1.0 / r + e + 2 * std::sqrt(s / r));
    return out;
}

inline SelectorCertificate block_weaver_select(const SelectorInstance& in, int r, const GreedyOptions& opt = {}) {
    detail::check_blocks(in);
    int nb = static_cast<int>(in.block_dims.size());
    if (nb == 0 || int(in.block_eps.size()) != nb) throw Error("hypothesis:block_layout", "block dims and block eps must be given");
    int dsum = 0;
    for (int x : in.block_dims) dsum += x;
    if (dsum != in.dim()) throw Error("hypothesis:block_layout", "block dims do not add up to the dimension");
    Mat t = in.total();
    for (int j = 0; j < nb; ++j) {
        detail::check_sum_below_identity(detail::block_of(t, in.block_dims, j));
        for (auto& op : in.operators)
            if (trace(detail::block_of(op, in.block_dims, j)) > in.block_eps[j] + tol().eq)
                throw Error("hypothesis:block_trace", "tr T_i^(j) exceeds eps_j");
    }
    std::vector<FiniteRandomPsd> fam;
    std::vector<std::vector<int>> used;
    for (auto& b : in.blocks) {
        if (int(b.size()) < r) throw Error("hypothesis:block_size", "a block has fewer than r elements");
        std::vector<int> u(b.begin(), b.begin() + r);
        std::vector<Mat> outs;
        for (int i : u) outs.push_back(double(r) * in.operators[i]);
        fam.push_back(FiniteRandomPsd::uniform(outs));
        used.push_back(u);
    }
    SelectorCertificate c;
    c.kind = "block";
    c.r = r;
    c.bound_formula = "1/r+eps_j+2*sqrt(sum_l eps_l/r)";
    c.promised = block_weaver_bounds(in.block_eps, r);
    auto g = greedy_interlacing_select(fam, opt);
    for (size_t k = 0; k < used.size(); ++k) c.selected.push_back(used[k][g.assignment[k]]);
    std::sort(c.selected.begin(), c.selected.end());
    c.achieved = selector_achieved("block", in, c.selected);
    c.mode = mode_name(g.mode);
    c.witness = g.witness;
    c.witness_sum_norm = fam.empty() ? 0.0 : detail::witness_norm(fam, g.assignment);
    return c;
}

struct PartitionResult {
    std::vector<std::vector<int>> parts;
    SelectorCertificate certificate;  // of the duplicated family
};

// Copy (i,k) of T_i lives in the k-th summand of H^n; a selector of the pairs
// {(i,1)..(i,n)} assigns i to part k.
inline PartitionResult partition_from_selector(const std::vector<Mat>& ops, int n, double eps, const GreedyOptions& opt = {}) {
    int m = static_cast<int>(ops.size());
    PartitionResult out;
    out.parts.assign(n, {});
    if (n == 1) {
        for (int i = 0; i < m; ++i) out.parts[0].push_back(i);
        return out;
    }
    int d = m ? static_cast<int>(ops[0].rows()) : 0;
    SelectorInstance dup;
    dup.epsilon = eps;
    for (int i = 0; i < m; ++i) {
        std::vector<int> blk;
        for (int k = 0; k < n; ++k) {
            std::vector<Mat> parts(n, Mat::Zero(d, d));
            parts[k] = ops[i];
            blk.push_back(int(dup.operators.size()));
            dup.operators.push_back(direct_sum(parts));
        }
        dup.blocks.push_back(blk);
    }
    out.certificate = n == 2 ? ks2_select(dup, opt) : weaver_ksr_select(dup, n, opt);
    for (int s : out.certificate.selected) out.parts[s % n].push_back(s / n);
    return out;
}

}  // namespace mcpsel
