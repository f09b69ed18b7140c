#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mcpsel/frames.hpp"
#include "mcpsel/linalg.hpp"
#include "mcpsel/parallel.hpp"
#include "mcpsel/selector.hpp"

namespace mcpsel {

// ---------------------------------------------------------------------------
// B_j recursion

inline std::vector<double> bj_values(double delta, int N) {
    std::vector<double> b{1.0};
    for (int j = 0; j < N; ++j) {
        double p = std::ldexp(delta, j);
        b.push_back(b.back() + 4 * std::sqrt(p * b.back()) + 2 * p);
    }
    return b;
}

// 1.1 * sup of sum_{j=1..N}(B_j - 1)/sqrt(2^N delta) over delta = 2^-k, k = 1..40,
// and every N with 2^N delta < 1.
inline double c_derived() {
    static const double c = [] {
        double best = 0;
        for (int k = 1; k <= 40; ++k) {
            double delta = std::ldexp(1.0, -k);
            for (int N = 1; std::ldexp(delta, N) < 1; ++N) {
                auto b = bj_values(delta, N);
                double s = 0;
                for (int j = 1; j <= N; ++j) s += b[j] - 1;
                best = std::max(best, s / std::sqrt(std::ldexp(delta, N)));
            }
        }
        return 1.1 * best;
    }();
    return c;
}

struct BjSequence {
    std::vector<double> B;
    double leaf_bound = 0;   // B_N - 1, what a depth-N leaf is certified against
    double partial_sum = 0;  // sum_{j=1..N} (B_j - 1)
    double C = 0;
    double rhs = 0;          // C sqrt(2^N delta)
    bool certified = false;  // partial_sum <= rhs
};

inline BjSequence bj_sequence(double delta, int N) {
    if (!(delta > 0)) throw Error("hypothesis:delta", "delta must be positive");
    if (N < 0 || !(std::ldexp(delta, N) < 1)) throw Error("hypothesis:depth", "depth needs 2^N delta < 1");
    BjSequence s;
    s.B = bj_values(delta, N);
    for (int j = 1; j <= N; ++j) s.partial_sum += s.B[j] - 1;
    s.leaf_bound = s.B[N] - 1;
    s.C = c_derived();
    s.rhs = s.C * std::sqrt(std::ldexp(delta, N));
    s.certified = s.partial_sum <= s.rhs + 1e-12;
    return s;
}

// The closed-form chain B_k <= prod(1 + 6 sqrt(2^j delta)) <= exp(6(2+sqrt2) sqrt(2^k delta)),
// and B_k - 1 <= 12(2+sqrt2) sqrt(2^k delta) wherever the exponent is at most 1.
inline bool closed_form_chain_holds(double delta, int N) {
    auto b = bj_values(delta, N);
    double prod = 1;
    for (int k = 0; k <= N; ++k) {
        double x = 6 * (2 + std::sqrt(2.0)) * std::sqrt(std::ldexp(delta, k));
        if (b[k] > prod * (1 + 1e-12)) return false;
        if (prod > std::exp(x) * (1 + 1e-12)) return false;
        if (x <= 1 && b[k] - 1 > 2 * x + 1e-12) return false;
        prod *= 1 + 6 * std::sqrt(std::ldexp(delta, k));
    }
    return true;
}

// ---------------------------------------------------------------------------
// Binary selector trees

using Pair = std::array<int, 2>;

struct TreeNode {
    std::string b;
    std::vector<int> members;  // includes phantom ids (>= the real count)
    std::vector<Pair> pairs;   // partition used to split this node, empty at leaves
    double deviation = 0;      // ||2^j sum T - T||
    double bound = 0;          // B_j - 1
    double split_achieved = 0, split_promised = 0;
    std::string mode;
};

struct BinarySelectorTree {
    int depth = 0;
    int real_count = 0;
    int phantom_count = 0;
    std::vector<std::vector<TreeNode>> levels;

    const std::vector<TreeNode>& leaves() const { return levels.back(); }
    std::vector<int> real_members(const TreeNode& n) const {
        std::vector<int> out;
        for (int i : n.members)
            if (i < real_count) out.push_back(i);
        return out;
    }
};

// Hands out pair-partitions of a node; ids >= real count are phantoms and
// `next_phantom` allocates fresh ones.
using PairSupplier = std::function<std::vector<Pair>(int level, const std::vector<int>& node, int& next_phantom)>;

inline std::vector<Pair> index_pairing(int, const std::vector<int>& node, int& next_phantom) {
    std::vector<int> v = node;
    if (v.size() % 2) v.push_back(next_phantom++);
    std::vector<Pair> p;
    for (size_t k = 0; k < v.size(); k += 2) p.push_back({v[k], v[k + 1]});
    return p;
}

struct SplitOutcome {
    std::vector<int> first;  // element of each pair sent to child 0
    std::string mode;
    double achieved = 0, promised = 0;
};

using Splitter = std::function<SplitOutcome(int level, const TreeNode& node)>;

inline BinarySelectorTree build_tree(int n, int N, const PairSupplier& supplier, const Splitter& split) {
    BinarySelectorTree t;
    t.depth = N;
    t.real_count = n;
    TreeNode root;
    for (int i = 0; i < n; ++i) root.members.push_back(i);
    t.levels.push_back({root});
    int next_phantom = n;
    for (int j = 0; j < N; ++j) {
        auto& cur = t.levels[j];
        // pairings are fixed sequentially so phantom ids do not depend on scheduling
        for (auto& node : cur) node.pairs = supplier(j, node.members, next_phantom);
        std::vector<SplitOutcome> out(cur.size());
        parallel_for(static_cast<int>(cur.size()), [&](int k) { out[k] = split(j, cur[k]); });
        std::vector<TreeNode> next;
        for (size_t k = 0; k < cur.size(); ++k) {
            cur[k].mode = out[k].mode;
            cur[k].split_achieved = out[k].achieved;
            cur[k].split_promised = out[k].promised;
            TreeNode c0, c1;
            c0.b = cur[k].b + "0";
            c1.b = cur[k].b + "1";
            for (size_t p = 0; p < cur[k].pairs.size(); ++p) {
                int a = out[k].first[p];
                int o = cur[k].pairs[p][0] == a ? cur[k].pairs[p][1] : cur[k].pairs[p][0];
                c0.members.push_back(a);
                c1.members.push_back(o);
            }
            std::sort(c0.members.begin(), c0.members.end());
            std::sort(c1.members.begin(), c1.members.end());
            next.push_back(std::move(c0));
            next.push_back(std::move(c1));
        }
        t.levels.push_back(std::move(next));
    }
    t.phantom_count = next_phantom - n;
    return t;
}

inline bool tree_structure_ok(const BinarySelectorTree& t) {
    for (int j = 0; j < t.depth; ++j)
        for (size_t k = 0; k < t.levels[j].size(); ++k) {
            auto& p = t.levels[j][k];
            auto& a = t.levels[j + 1][2 * k];
            auto& b = t.levels[j + 1][2 * k + 1];
            std::vector<int> u = a.members;
            u.insert(u.end(), b.members.begin(), b.members.end());
            std::sort(u.begin(), u.end());
            std::vector<int> real;
            for (int i : u)
                if (i < t.real_count) real.push_back(i);
            std::vector<int> preal;
            for (int i : p.members)
                if (i < t.real_count) preal.push_back(i);
            if (real != preal) return false;
            for (auto& pr : p.pairs) {
                bool a0 = std::binary_search(a.members.begin(), a.members.end(), pr[0]);
                bool a1 = std::binary_search(a.members.begin(), a.members.end(), pr[1]);
                if (a0 == a1) return false;
            }
        }
    return true;
}

inline double leaf_deviation(const std::vector<Mat>& ops, const std::vector<int>& leaf, int level) {
    int d = ops.empty() ? 0 : static_cast<int>(ops[0].rows());
    Mat t = Mat::Zero(d, d), s = Mat::Zero(d, d);
    for (auto& op : ops) t += op;
    for (int i : leaf) s += ops[i];
    return d ? operator_norm(Mat(std::ldexp(1.0, level) * s - t)) : 0.0;
}

struct Ks2TreeResult {
    BinarySelectorTree tree;
    BjSequence bj;
    double delta = 0;
    bool certified = false;  // every node within B_j - 1
};

inline Ks2TreeResult iterate_ks2(const std::vector<Mat>& ops, int N, PairSupplier supplier = index_pairing, double delta = -1,
                                 const GreedyOptions& opt = {}) {
    int n = static_cast<int>(ops.size());
    if (n == 0) throw Error("hypothesis:empty", "no operators");
    int d = static_cast<int>(ops[0].rows());
    Mat total = Mat::Zero(d, d);
    double tmax = 0;
    for (auto& op : ops) {
        total += op;
        tmax = std::max(tmax, trace(op));
    }
    detail::check_sum_below_identity(total);
    if (delta < 0) delta = tmax;
    if (tmax > delta + tol().eq) throw Error("hypothesis:trace_cap", "tr T_i exceeds delta");
    Ks2TreeResult res;
    res.delta = delta;
    res.bj = bj_sequence(std::max(delta, 1e-300), N);
    auto op_of = [&](int i) -> Mat { return i < n ? ops[i] : Mat::Zero(d, d); };
    Splitter split = [&](int j, const TreeNode& node) {
        SplitOutcome o;
        double bj = res.bj.B[j];
        double scale = std::ldexp(1.0, j) / bj;
        SelectorInstance in;
        std::map<int, int> pos;
        for (auto& pr : node.pairs)
            for (int i : pr) {
                pos[i] = static_cast<int>(in.operators.size());
                in.operators.push_back(Mat(scale * op_of(i)));
            }
        for (auto& pr : node.pairs) in.blocks.push_back({pos[pr[0]], pos[pr[1]]});
        in.epsilon = std::max(scale * delta, 0.0);
        if (in.operators.empty()) {
            o.mode = "exact";
            return o;
        }
        auto c = ks2_select(in, opt);
        std::vector<int> inv(in.operators.size());
        for (auto& [g, l] : pos) inv[l] = g;
        std::vector<char> chosen(in.operators.size(), 0);
        for (int s : c.selected) chosen[s] = 1;
        for (auto& pr : node.pairs) o.first.push_back(chosen[pos[pr[0]]] ? pr[0] : pr[1]);
        o.mode = c.mode;
        // in the unscaled family: ||2^{j+1} sum_child - 2^j sum_node|| = 2 B_j * achieved
        o.achieved = 2 * bj * std::max(c.achieved[0], c.achieved[1]);
        o.promised = 2 * bj * c.promised[0];
        return o;
    };
    res.tree = build_tree(n, N, supplier, split);
    res.certified = true;
    for (int j = 0; j <= N; ++j)
        for (auto& node : res.tree.levels[j]) {
            node.deviation = leaf_deviation(ops, res.tree.real_members(node), j);
            node.bound = res.bj.B[j] - 1;
            if (node.deviation > node.bound + tol().eq) res.certified = false;
        }
    return res;
}

// ---------------------------------------------------------------------------
// Doubling metric spaces and separated pairings

struct DoublingPointSet {
    std::vector<std::vector<double>> points;
    double doubling_constant = 0;

    int size() const { return static_cast<int>(points.size()); }
    double dist(int a, int b) const {
        double s = 0;
        for (size_t k = 0; k < points[a].size(); ++k) s += (points[a][k] - points[b][k]) * (points[a][k] - points[b][k]);
        return std::sqrt(s);
    }
    // open ball
    int ball_count(int x, double r) const {
        int c = 0;
        for (int y = 0; y < size(); ++y)
            if (dist(x, y) < r) ++c;
        return c;
    }
    int sup_ball(double r) const {
        int m = 0;
        for (int x = 0; x < size(); ++x) m = std::max(m, ball_count(x, r));
        return m;
    }

    static DoublingPointSet integers(int lo, int hi) {
        DoublingPointSet s;
        for (int k = lo; k < hi; ++k) s.points.push_back({double(k)});
        s.doubling_constant = s.estimate_doubling();
        return s;
    }

    // max #B(x,2r)/#B(x,r) over every x and dyadic r up to the diameter
    double estimate_doubling() const {
        double diam = 0;
        for (int a = 0; a < size(); ++a)
            for (int b = a + 1; b < size(); ++b) diam = std::max(diam, dist(a, b));
        double c = 1;
        for (double r = 0.5; r <= 2 * diam + 1; r *= 2)
            for (int x = 0; x < size(); ++x) c = std::max(c, double(ball_count(x, 2 * r)) / ball_count(x, r));
        return c;
    }

    bool metric_axioms_hold(double t = 1e-12) const {
        for (int a = 0; a < size(); ++a)
            for (int b = 0; b < size(); ++b) {
                if (a != b && dist(a, b) <= 0) return false;
                for (int c = 0; c < size(); ++c)
                    if (dist(a, c) > dist(a, b) + dist(b, c) + t) return false;
            }
        return true;
    }
};

// Two-stage pairing: cells around a maximal r-net first, then proximity-first.
class SeparatedPairing {
public:
    SeparatedPairing(const DoublingPointSet& space, double r) : space_(space), r_(r) {
        int n = space.size();
        cell_.assign(n, -1);
        // maximal set with pairwise disjoint open r-balls, scanned in index order
        for (int x = 0; x < n; ++x) {
            bool ok = true;
            for (int y : net_) {
                for (int z = 0; z < n && ok; ++z)
                    if (space.dist(z, x) < r && space.dist(z, y) < r) ok = false;
                if (!ok) break;
            }
            if (ok) net_.push_back(x);
        }
        for (size_t c = 0; c < net_.size(); ++c)
            for (int z = 0; z < n; ++z)
                if (space.dist(z, net_[c]) < r) cell_[z] = static_cast<int>(c);
        for (int z = 0; z < n; ++z) {
            if (cell_[z] >= 0) continue;
            double best = std::numeric_limits<double>::infinity();
            for (size_t c = 0; c < net_.size(); ++c) {
                double dz = space.dist(z, net_[c]);
                if (dz < best) {
                    best = dz;
                    cell_[z] = static_cast<int>(c);
                }
            }
        }
        std::vector<int> sz(net_.size(), 0);
        for (int c : cell_) ++sz[c];
        max_cell_ = sz.empty() ? 0 : *std::max_element(sz.begin(), sz.end());
        stage_one_levels_ = 0;
        while ((1 << stage_one_levels_) < max_cell_) ++stage_one_levels_;
    }

    int stage_one_levels() const { return stage_one_levels_; }
    int max_cell() const { return max_cell_; }
    const std::vector<int>& net() const { return net_; }
    const std::vector<int>& cells() const { return cell_; }

    std::vector<Pair> operator()(int level, const std::vector<int>& node, int& next_phantom) const {
        int n = space_.size();
        std::vector<int> real, phantoms;
        for (int i : node) (i < n ? real : phantoms).push_back(i);
        std::vector<Pair> out;
        std::vector<int> orphans;
        if (level < stage_one_levels_) {
            std::map<int, std::vector<int>> by_cell;
            for (int i : real) by_cell[cell_[i]].push_back(i);
            for (auto& [c, v] : by_cell) {
                size_t k = 0;
                for (; k + 1 < v.size(); k += 2) out.push_back({v[k], v[k + 1]});
                if (k < v.size()) orphans.push_back(v[k]);
            }
        } else {
            std::vector<char> used(n, 0);
            std::vector<int> live = real;
            while (true) {
                int bx = -1, by = -1;
                for (int x : live) {
                    if (used[x]) continue;
                    double best = std::numeric_limits<double>::infinity();
                    int arg = -1;
                    for (int y : live) {
                        if (y == x || used[y]) continue;
                        double dxy = space_.dist(x, y);
                        if (dxy < r_ && dxy < best) {
                            best = dxy;
                            arg = y;
                        }
                    }
                    if (arg >= 0) {
                        bx = x;
                        by = arg;
                        break;
                    }
                }
                if (bx < 0) break;
                used[bx] = used[by] = 1;
                out.push_back({std::min(bx, by), std::max(bx, by)});
            }
            std::vector<int> rest;
            for (int x : live)
                if (!used[x]) rest.push_back(x);
            size_t k = 0;
            for (; k + 1 < rest.size(); k += 2) out.push_back({rest[k], rest[k + 1]});
            if (k < rest.size()) orphans.push_back(rest[k]);
        }
        // orphans take existing phantoms first, then fresh ones
        size_t p = 0;
        for (int o : orphans) out.push_back({o, p < phantoms.size() ? phantoms[p++] : next_phantom++});
        for (; p + 1 < phantoms.size(); p += 2) out.push_back({phantoms[p], phantoms[p + 1]});
        if (p < phantoms.size()) out.push_back({phantoms[p], next_phantom++});
        return out;
    }

private:
    const DoublingPointSet& space_;
    double r_;
    std::vector<int> net_, cell_;
    int max_cell_ = 0, stage_one_levels_ = 0;
};

struct SeparationRow {
    std::string leaf;
    double min_dist;
};

struct SeparationCertificate {
    double r = 0;
    std::vector<SeparationRow> rows;
    int phantom_count = 0;
    bool separated = true;
};

inline SeparationCertificate separation_certificate(const DoublingPointSet& space, const BinarySelectorTree& t, double r) {
    SeparationCertificate c;
    c.r = r;
    c.phantom_count = t.phantom_count;
    for (auto& leaf : t.leaves()) {
        auto m = t.real_members(leaf);
        double md = std::numeric_limits<double>::infinity();
        for (size_t a = 0; a < m.size(); ++a)
            for (size_t b = a + 1; b < m.size(); ++b) md = std::min(md, space.dist(m[a], m[b]));
        c.rows.push_back({leaf.b, md});
        if (md < r) c.separated = false;
    }
    return c;
}

inline void check_cep(const DoublingPointSet& space, double r, int N, int eta) {
    if (space.sup_ball(r) > std::ldexp(1.0, N - eta)) throw Error("hypothesis:cep", "sup #B(x,r) exceeds 2^(N-eta)");
}

struct SeparatedScheduleResult {
    BinarySelectorTree tree;
    SeparationCertificate certificate;
    int stage_one_levels = 0;
};

// Runs the pairing schedule to depth N with an arbitrary split rule; the
// `choice` callback picks which element of a pair goes to child 0.
inline SeparatedScheduleResult separated_pair_partitions(const DoublingPointSet& space, double r, int N, int eta = 2,
                                                         std::function<int(const Pair&)> choice = nullptr) {
    check_cep(space, r, N, eta);
    SeparatedPairing plan(space, r);
    SeparatedScheduleResult res;
    res.stage_one_levels = plan.stage_one_levels();
    Splitter split = [&](int, const TreeNode& node) {
        SplitOutcome o;
        for (auto& p : node.pairs) o.first.push_back(choice ? choice(p) : p[0]);
        o.mode = "schedule";
        return o;
    };
    PairSupplier sup = [&](int level, const std::vector<int>& node, int& np) { return plan(level, node, np); };
    res.tree = build_tree(space.size(), N, sup, split);
    res.certificate = separation_certificate(space, res.tree, r);
    return res;
}

// ---------------------------------------------------------------------------
// Sparse selector partitions

struct SparseOptions {
    double C = -1;        // constant of the B_j lemma; <= 0 selects the derived one
    int eta = 2;
    int depth = -1;       // explicit N; the a-priori depth rule is skipped
    GreedyOptions greedy;
};

struct SparseResult {
    Ks2TreeResult ks2;
    SeparationCertificate separation;
    int N = 0;
    double C = 0, c_hat = 0, eps = 0, delta = 0;
    std::string depth_rule;
    std::vector<double> deviations;  // per leaf
    bool deviation_ok = false;
    std::vector<std::vector<int>> leaves;
};

inline int depth_from_rule(double eps, double delta, double C) {
    // largest N with 2^N <= eps^2/(C^2 delta) and 2^N < 1/delta
    int N = -1;
    for (int k = 0; k < 62; ++k) {
        double p = std::ldexp(1.0, k);
        if (p <= eps * eps / (C * C * delta) && p * delta < 1) N = k;
    }
    return N;
}

inline SparseResult sparse_selector_partition(const DoublingPointSet& space, const std::vector<Mat>& ops, double eps, double r,
                                              const SparseOptions& opt = {}) {
    if (int(ops.size()) != space.size()) throw Error("hypothesis:index", "one operator per point is required");
    if (!(eps > 0 && eps < 1)) throw Error("hypothesis:eps", "eps must lie in (0,1)");
    SparseResult res;
    res.eps = eps;
    res.C = opt.C > 0 ? opt.C : c_derived();
    res.c_hat = std::ldexp(1.0, opt.eta - 1) / (res.C * res.C);
    double delta = 0;
    for (auto& op : ops) delta = std::max(delta, trace(op));
    res.delta = delta;
    if (opt.depth >= 0) {
        res.N = opt.depth;
        res.depth_rule = "override";
    } else {
        if (delta > 0 && space.sup_ball(r) > res.c_hat * eps * eps / delta) throw Error("hypothesis:tx2", "sup #B(x,r) exceeds c_hat eps^2/delta");
        res.N = delta > 0 ? depth_from_rule(eps, delta, res.C) : 0;
        if (res.N < 0) throw Error("hypothesis:tx4", "no depth satisfies the dyadic window");
        res.depth_rule = "dyadic";
    }
    check_cep(space, r, res.N, opt.eta);
    SeparatedPairing plan(space, r);
    PairSupplier sup = [&](int level, const std::vector<int>& node, int& np) { return plan(level, node, np); };
    res.ks2 = iterate_ks2(ops, res.N, sup, delta > 0 ? delta : -1, opt.greedy);
    res.separation = separation_certificate(space, res.ks2.tree, r);
    res.deviation_ok = true;
    for (auto& leaf : res.ks2.tree.leaves()) {
        res.leaves.push_back(res.ks2.tree.real_members(leaf));
        res.deviations.push_back(leaf.deviation);
        if (leaf.deviation > eps + tol().eq) res.deviation_ok = false;
    }
    return res;
}

struct RemovalResult {
    SparseResult sparse;
    std::vector<int> removed;
    int leaf = -1;
    double delta0 = 0;
    double leaf_deviation = 0;
    double promised_lower = 0;  // 2^{-N-1} when the chosen leaf deviates by at most 1/2
    std::vector<double> lower;  // lambda_min of each Gram matrix on the kept indices
    double min_gap = 0;
};

inline RemovalResult remove_sparse_set(const DoublingPointSet& space, const std::vector<VectorSystem>& systems, const std::vector<double>& eps, double r,
                                       const SparseOptions& opt = {}) {
    if (systems.empty() || systems.size() != eps.size()) throw Error("hypothesis:systems", "one eps per system is required");
    int n = space.size();
    RemovalResult res;
    std::vector<Mat> grams;
    std::vector<VectorSystem> comps;
    for (size_t j = 0; j < systems.size(); ++j) {
        if (systems[j].size() != n) throw Error("hypothesis:index", "systems must be indexed by the points");
        Mat g = gram(systems[j]);
        if (lambda_max(g) > 1 + tol().eq) throw Error("hypothesis:bessel", "Bessel bound exceeds 1");
        for (int i = 0; i < n; ++i)
            if (g(i, i).real() < eps[j] - tol().eq) throw Error("hypothesis:norm", "||u_x||^2 below eps_j");
        res.delta0 += 1 - eps[j];
        grams.push_back(g);
        comps.push_back(gram_coordinates(Mat(Mat::Identity(n, n) - g)));
    }
    double C = opt.C > 0 ? opt.C : c_derived();
    double c_hat = std::ldexp(1.0, opt.eta - 1) / (C * C);
    if (opt.depth < 0) {
        if (res.delta0 > c_hat / 4) throw Error("hypothesis:delta0", "delta0 exceeds c_hat/4");
        if (space.sup_ball(r) > c_hat / (4 * res.delta0)) throw Error("hypothesis:mpa2", "sup #B(x,r) exceeds c_hat/(4 delta0)");
    }
    std::vector<Mat> ops;
    for (int i = 0; i < n; ++i) {
        std::vector<Mat> parts;
        for (auto& c : comps) parts.push_back(c.dim ? Mat(c.vectors[i] * c.vectors[i].adjoint()) : Mat(0, 0));
        ops.push_back(direct_sum(parts));
    }
    if (ops[0].rows() == 0) {
        // every system is orthonormal; nothing needs removing
        res.lower.assign(systems.size(), 1.0);
        res.promised_lower = 1;
        res.min_gap = std::numeric_limits<double>::infinity();
        return res;
    }
    res.sparse = sparse_selector_partition(space, ops, 0.5, r, opt);
    auto score = [&](const std::vector<int>& leaf) {
        std::vector<int> keep = complement_of(leaf, n);
        std::vector<double> lo;
        for (auto& g : grams) lo.push_back(keep.empty() ? 1.0 : lambda_min(principal(g, keep)));
        return lo;
    };
    // among leaves within the 1/2 deviation, keep the best achieved bound;
    // if none qualifies, keep the best achieved bound without a promise
    double best = -1;
    bool best_ok = false;
    for (size_t k = 0; k < res.sparse.leaves.size(); ++k) {
        bool ok = res.sparse.deviations[k] <= 0.5 + tol().eq;
        auto lo = score(res.sparse.leaves[k]);
        double m = *std::min_element(lo.begin(), lo.end());
        if ((ok && !best_ok) || (ok == best_ok && m > best)) {
            best = m;
            best_ok = ok;
            res.leaf = static_cast<int>(k);
            res.lower = lo;
        }
    }
    res.removed = res.sparse.leaves[res.leaf];
    res.leaf_deviation = res.sparse.deviations[res.leaf];
    res.promised_lower = best_ok ? std::ldexp(1.0, -res.sparse.N - 1) : 0.0;
    res.min_gap = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < res.removed.size(); ++a)
        for (size_t b = a + 1; b < res.removed.size(); ++b) res.min_gap = std::min(res.min_gap, space.dist(res.removed[a], res.removed[b]));
    return res;
}

}  // namespace mcpsel
