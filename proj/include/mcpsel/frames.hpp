#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mcpsel/linalg.hpp"
#include "mcpsel/selector.hpp"

namespace mcpsel {

struct VectorSystem {
    int dim = 0;
    std::vector<Vec> vectors;

    int size() const { return static_cast<int>(vectors.size()); }
    // d x n matrix with the vectors as columns
    Mat synthesis() const {
        Mat u(dim, size());
        for (int i = 0; i < size(); ++i) u.col(i) = vectors[i];
        return u;
    }
    Mat frame_operator() const {
        Mat u = synthesis();
        return u * u.adjoint();
    }
    VectorSystem subset(const std::vector<int>& idx) const {
        VectorSystem s{dim, {}};
        for (int i : idx) s.vectors.push_back(vectors[i]);
        return s;
    }
};

// entry (i,j) = <u_j, u_i>
inline Mat gram(const VectorSystem& s) {
    Mat u = s.synthesis();
    return u.adjoint() * u;
}

struct FrameBounds {
    double bessel;
    double riesz_lower;
    double riesz_upper;
};

inline FrameBounds frame_bounds(const VectorSystem& s) {
    if (s.size() == 0) throw Error("empty_system", "frame bounds of an empty system");
    RVec ev = eigenvalues(gram(s));
    return {ev.maxCoeff(), std::max(0.0, ev.minCoeff()), ev.maxCoeff()};
}

// Vectors whose Gram matrix is g: u_i = L^(1/2) Q* e_i over the nonzero spectrum.
inline VectorSystem gram_coordinates(const Mat& g, double cut = 1e-12) {
    int n = static_cast<int>(g.rows());
    VectorSystem s{0, {}};
    if (n == 0) return s;
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    std::vector<int> keep;
    for (int k = 0; k < n; ++k)
        if (es.eigenvalues()(k) > cut) keep.push_back(k);
    s.dim = static_cast<int>(keep.size());
    for (int i = 0; i < n; ++i) {
        Vec v(s.dim);
        for (int a = 0; a < s.dim; ++a) v(a) = std::sqrt(es.eigenvalues()(keep[a])) * std::conj(es.eigenvectors()(i, keep[a]));
        s.vectors.push_back(v);
    }
    return s;
}

inline VectorSystem complete_to_parseval(const VectorSystem& s) {
    Mat S = s.size() ? s.frame_operator() : Mat::Zero(s.dim, s.dim);
    if (lambda_max(S) > 1 + tol().eq) throw Error("hypothesis:bessel", "Bessel bound exceeds 1");
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(Mat::Identity(s.dim, s.dim) - S));
    VectorSystem out = s;
    for (int k = s.dim - 1; k >= 0; --k) {
        double l = es.eigenvalues()(k);
        if (l > tol().eq) out.vectors.push_back(std::sqrt(l) * es.eigenvectors().col(k));
    }
    return out;
}

struct NaimarkPair {
    VectorSystem original;
    VectorSystem complement;
};

inline bool is_parseval(const VectorSystem& s, double t = tol().eq) {
    Mat S = s.size() ? s.frame_operator() : Mat::Zero(s.dim, s.dim);
    return (S - Mat::Identity(s.dim, s.dim)).cwiseAbs().maxCoeff() <= t;
}

// v_i are the coordinates of (I - P) e_i in an orthonormal basis of the
// orthocomplement, P = A A* with A the n x d analysis matrix.
inline NaimarkPair naimark_complement(const VectorSystem& s) {
    if (!is_parseval(s)) throw Error("hypothesis:parseval", "system is not Parseval");
    int n = s.size(), d = s.dim;
    if (n < d) throw Error("hypothesis:parseval", "Parseval system needs n >= d");
    NaimarkPair p{s, {n - d, {}}};
    Mat a = s.synthesis().adjoint();
    Mat q = Mat::Identity(n, n) - a * a.adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(q);
    Mat basis = es.eigenvectors().rightCols(n - d);
    for (int i = 0; i < n; ++i) p.complement.vectors.push_back(basis.row(i).adjoint());
    return p;
}

inline std::pair<double, double> riesz_bessel_duality_check(const NaimarkPair& p, const std::vector<int>& J) {
    Mat gu = principal(gram(p.original), J), gv = principal(gram(p.complement), J);
    return {lambda_min(gu), J.empty() ? 0.0 : lambda_max(gv)};
}

inline VectorSystem dual_riesz_basis(const VectorSystem& basis) {
    if (basis.size() != basis.dim) throw Error("hypothesis:basis", "a basis needs n = d");
    Mat u = basis.synthesis();
    Eigen::FullPivLU<Mat> lu(u);
    if (!lu.isInvertible() || lambda_min(gram(basis)) < tol().eq) throw Error("singular_gram", "Gram matrix is singular");
    Mat dual = lu.inverse().adjoint();
    VectorSystem out{basis.dim, {}};
    for (int i = 0; i < basis.size(); ++i) out.vectors.push_back(dual.col(i));
    return out;
}

// ---------------------------------------------------------------------------
// Selectors for families of systems

struct SystemsCertificate {
    std::string kind;
    std::vector<int> selected;
    std::vector<int> redundant;  // first-stage selector, when one ran
    std::vector<double> lower, upper;
    std::vector<double> promised_lower, promised_upper;
    double c = 0;           // lower >= c * eps_j, the constant of the rule used
    double constant_C = 0;  // block-size constant, when the rule has one
    std::string rule;
    int r = 0;
    std::vector<std::string> modes;
};

namespace detail {

// Operators T_i = (+)_j v_i^(j) v_i^(j)* over the chosen indices, each system in
// its own diagonal block.
inline SelectorInstance conglomerate(const std::vector<VectorSystem>& sys, const std::vector<double>& eps) {
    SelectorInstance in;
    int n = sys.empty() ? 0 : sys[0].size();
    for (auto& s : sys) in.block_dims.push_back(s.dim);
    in.block_eps = eps;
    for (int i = 0; i < n; ++i) {
        std::vector<Mat> parts;
        for (auto& s : sys) parts.push_back(s.vectors[i] * s.vectors[i].adjoint());
        in.operators.push_back(direct_sum(parts));
    }
    double e = 0;
    for (double x : eps) e += x;
    in.epsilon = e;
    return in;
}

// Blocks restricted to a subset of indices and renumbered to positions in it.
inline std::vector<std::vector<int>> restrict_blocks(const std::vector<std::vector<int>>& blocks, const std::vector<int>& sub) {
    std::vector<int> pos(1 + (sub.empty() ? 0 : *std::max_element(sub.begin(), sub.end())), -1);
    for (size_t a = 0; a < sub.size(); ++a) pos[sub[a]] = int(a);
    std::vector<std::vector<int>> out;
    for (auto& b : blocks) {
        std::vector<int> nb;
        for (int i : b)
            if (i < int(pos.size()) && pos[i] >= 0) nb.push_back(pos[i]);
        out.push_back(nb);
    }
    return out;
}

inline int min_block(const std::vector<std::vector<int>>& blocks) {
    int m = std::numeric_limits<int>::max();
    for (auto& b : blocks) m = std::min(m, int(b.size()));
    return blocks.empty() ? 0 : m;
}

// Runs the block selector on the conglomerate of Gram-coordinate systems built
// from Gram matrices over `ground`; returns the chosen global indices.
inline std::vector<int> select_on(const std::vector<Mat>& grams, const std::vector<double>& eps, const std::vector<int>& ground,
                                  const std::vector<std::vector<int>>& blocks, int r, const GreedyOptions& opt, std::string& mode) {
    std::vector<VectorSystem> sys;
    std::vector<double> e;
    for (size_t k = 0; k < grams.size(); ++k) {
        VectorSystem s = gram_coordinates(principal(grams[k], ground));
        if (s.dim == 0) continue;
        sys.push_back(s);
        e.push_back(eps[k]);
    }
    auto local = restrict_blocks(blocks, ground);
    std::vector<int> out;
    if (sys.empty()) {
        for (auto& b : local) out.push_back(ground[b.at(0)]);
        mode = "exact";
        std::sort(out.begin(), out.end());
        return out;
    }
    SelectorInstance in = conglomerate(sys, e);
    in.blocks = local;
    auto cert = block_weaver_select(in, r, opt);
    mode = cert.mode;
    for (int i : cert.selected) out.push_back(ground[i]);
    std::sort(out.begin(), out.end());
    return out;
}

inline Mat normalize_gram(const Mat& g, double eps) {
    // u -> sqrt(eps) u / ||u|| where ||u||^2 > eps
    int n = static_cast<int>(g.rows());
    RVec s(n);
    for (int i = 0; i < n; ++i) {
        double nn = g(i, i).real();
        s(i) = nn > eps ? std::sqrt(eps / nn) : 1.0;
    }
    return s.asDiagonal() * g * s.asDiagonal();
}

inline std::vector<int> all_indices(const std::vector<std::vector<int>>& blocks) {
    std::vector<int> u;
    for (auto& b : blocks) u.insert(u.end(), b.begin(), b.end());
    std::sort(u.begin(), u.end());
    return u;
}

// Splits every block into consecutive chunks of at least `size` elements.
inline std::vector<std::vector<int>> chunk_blocks(const std::vector<std::vector<int>>& blocks, int size) {
    std::vector<std::vector<int>> out;
    for (auto& b : blocks) {
        int pieces = std::max(1, int(b.size()) / size);
        int base = int(b.size()) / pieces, extra = int(b.size()) % pieces, at = 0;
        for (int p = 0; p < pieces; ++p) {
            int len = base + (p < extra ? 1 : 0);
            out.emplace_back(b.begin() + at, b.begin() + at + len);
            at += len;
        }
    }
    return out;
}

inline void fill_bounds(SystemsCertificate& c, const std::vector<Mat>& grams) {
    c.lower.clear();
    c.upper.clear();
    for (auto& g : grams) {
        Mat s = principal(g, c.selected);
        c.lower.push_back(c.selected.empty() ? 1.0 : lambda_min(s));
        c.upper.push_back(c.selected.empty() ? 0.0 : lambda_max(s));
    }
}

}  // namespace detail

struct FeichtingerOptions {
    double C = 64;  // block-size constant for the two-stage rule
    GreedyOptions greedy;
};

inline int bl2_block_size(double delta0, double eps_min) {
    if (delta0 < 1.5 - std::sqrt(2.0)) return 2;
    return static_cast<int>(std::ceil(21 * delta0 / (eps_min * eps_min) - 1e-12));
}

inline double bl2_constant(double delta0) {
    if (delta0 < 1.5 - std::sqrt(2.0)) return 0.5 - delta0 - std::sqrt(2 * delta0);
    return 1 - (1 / (21 * delta0) + 2 / std::sqrt(21.0));
}

namespace detail {

// One-stage selector on Gram matrices with ||u_i||^2 >= eps_j and Bessel bound 1.
inline std::vector<int> bl2_core(const std::vector<Mat>& grams, const std::vector<double>& eps, const std::vector<int>& ground,
                                 const std::vector<std::vector<int>>& blocks, const GreedyOptions& opt, int& r_used,
                                 std::vector<double>& promised, double& c, std::string& mode) {
    double delta0 = 0, emin = 1;
    for (double e : eps) {
        delta0 += 1 - e;
        emin = std::min(emin, e);
    }
    int r = bl2_block_size(delta0, emin);
    auto local = restrict_blocks(blocks, ground);
    if (min_block(local) < r) throw Error("hypothesis:block_size", "blocks are smaller than the rule requires (r = " + std::to_string(r) + ")");
    std::vector<Mat> comp;
    std::vector<double> ceps;
    for (size_t j = 0; j < grams.size(); ++j) {
        int n = static_cast<int>(grams[j].rows());
        comp.push_back(Mat(Mat::Identity(n, n) - grams[j]));
        ceps.push_back(1 - eps[j]);
    }
    r_used = r;
    c = bl2_constant(delta0);
    promised.clear();
    for (double e : eps) promised.push_back(e - 1.0 / r - 2 * std::sqrt(delta0 / r));
    return select_on(comp, ceps, ground, blocks, r, opt, mode);
}

}  // namespace detail

inline SystemsCertificate feichtinger_select(const std::vector<VectorSystem>& systems, const std::vector<double>& eps,
                                             const std::vector<std::vector<int>>& blocks, const FeichtingerOptions& opt = {}) {
    if (systems.empty() || systems.size() != eps.size()) throw Error("hypothesis:systems", "one eps per system is required");
    int n = systems[0].size();
    std::vector<Mat> grams;
    for (size_t j = 0; j < systems.size(); ++j) {
        if (systems[j].size() != n) throw Error("hypothesis:systems", "systems must share the index set");
        if (!(eps[j] > 0 && eps[j] < 1)) throw Error("hypothesis:eps", "eps_j must lie in (0,1)");
        Mat g = gram(systems[j]);
        if (lambda_max(g) > 1 + tol().eq) throw Error("hypothesis:bessel", "Bessel bound exceeds 1");
        for (int i = 0; i < n; ++i)
            if (g(i, i).real() < eps[j] - tol().eq) throw Error("hypothesis:norm", "||u_i||^2 below eps_j");
        grams.push_back(detail::normalize_gram(g, eps[j]));
    }
    SystemsCertificate c;
    c.kind = "feichtinger";
    std::vector<int> ground = detail::all_indices(blocks);
    double emin = *std::min_element(eps.begin(), eps.end());
    std::string mode;
    if (emin >= 0.5) {
        c.selected = detail::bl2_core(grams, eps, ground, blocks, opt.greedy, c.r, c.promised_lower, c.c, mode);
        c.rule = "one-stage";
        c.modes = {mode};
    } else {
        // bring the small eps_j above 1/2 with a redundant selector first
        double sN = 0, tail = 0, ratio = 0;
        for (double e : eps) {
            if (e < 0.5) {
                sN += e;
                ratio += emin / e;
            } else {
                tail += 1 - e;
            }
        }
        double rfull = opt.C * (1 + sN / (emin * emin)) * (ratio + tail);
        int need = static_cast<int>(std::ceil(rfull - 1e-9));
        if (detail::min_block(blocks) < need) throw Error("hypothesis:block_size", "blocks are smaller than the two-stage rule requires (r = " + std::to_string(need) + ")");
        int rp = static_cast<int>(std::ceil(6 / (emin * emin) * sN - 1e-12));
        auto chunks = detail::chunk_blocks(blocks, rp);
        std::vector<Mat> small;
        std::vector<double> seps;
        for (size_t j = 0; j < eps.size(); ++j)
            if (eps[j] < 0.5) {
                small.push_back(grams[j]);
                seps.push_back(eps[j]);
            }
        std::string m1;
        c.redundant = detail::select_on(small, seps, ground, chunks, rp, opt.greedy, m1);
        std::vector<Mat> g2;
        std::vector<double> e2, scale;
        for (size_t j = 0; j < eps.size(); ++j) {
            Mat g = principal(grams[j], c.redundant);
            double beta = 1;
            if (eps[j] < 0.5) beta = std::max(lambda_max(g), eps[j]);
            // embed back into the full index range so block indices stay global
            Mat full = Mat::Zero(n, n);
            for (size_t a = 0; a < c.redundant.size(); ++a)
                for (size_t b = 0; b < c.redundant.size(); ++b) full(c.redundant[a], c.redundant[b]) = g(a, b) / beta;
            g2.push_back(full);
            e2.push_back(std::min(eps[j] / beta, 1.0 - 1e-12));
            scale.push_back(beta);
        }
        std::vector<double> pl;
        std::string m2;
        c.selected = detail::bl2_core(g2, e2, c.redundant, blocks, opt.greedy, c.r, pl, c.c, m2);
        c.promised_lower.clear();
        for (size_t j = 0; j < eps.size(); ++j) c.promised_lower.push_back(pl[j] * scale[j]);
        c.rule = "two-stage";
        c.constant_C = opt.C;
        c.modes = {m1, m2};
    }
    detail::fill_bounds(c, [&] {
        std::vector<Mat> g;
        for (auto& s : systems) g.push_back(gram(s));
        return g;
    }());
    c.promised_upper.assign(eps.size(), 1.0);
    return c;
}

struct RepsOptions {
    double C = 12 * (3 + 2 * std::sqrt(2.0)) + 1;
    GreedyOptions greedy;
};

inline double reps_block_size(const std::vector<double>& bessel, double eps, double C) {
    double emin = 1, sN = 0, tail = 0;
    for (double b : bessel) {
        double e = 1 / b;
        emin = std::min(emin, e);
        if (e < 0.5 - tol().eq) sN += e;
        if (e < 1 / (1 + eps)) tail += e;
        tail += 1 - e;
    }
    return C / (eps * eps) * (1 + sN / (emin * emin)) * std::max(1.0, tail);
}

inline SystemsCertificate r_eps_select(const std::vector<VectorSystem>& systems, const std::vector<std::vector<int>>& blocks, double eps,
                                       const RepsOptions& opt = {}) {
    if (systems.empty()) throw Error("hypothesis:systems", "no systems");
    if (!(eps > 0 && eps < 1)) throw Error("hypothesis:eps", "eps must lie in (0,1)");
    int n = systems[0].size();
    std::vector<Mat> grams;
    std::vector<double> B, e;
    for (auto& s : systems) {
        if (s.size() != n) throw Error("hypothesis:systems", "systems must share the index set");
        Mat g = gram(s);
        for (int i = 0; i < n; ++i)
            if (std::abs(g(i, i).real() - 1) > tol().eq) throw Error("hypothesis:unit_norm", "vectors must have unit norm");
        grams.push_back(g);
        B.push_back(std::max(1.0, lambda_max(g)));
        e.push_back(1 / B.back());
    }
    SystemsCertificate c;
    c.kind = "r_eps";
    c.constant_C = opt.C;
    double r = reps_block_size(B, eps, opt.C);
    if (detail::min_block(blocks) < int(std::ceil(r - 1e-9)))
        throw Error("hypothesis:block_size", "blocks are smaller than the rule requires (r = " + std::to_string(int(std::ceil(r - 1e-9))) + ")");
    std::vector<int> ground = detail::all_indices(blocks);
    double emin = *std::min_element(e.begin(), e.end());
    c.redundant = ground;
    bool stage_one = emin < 0.5 - tol().eq;
    if (stage_one) {
        double sN = 0;
        std::vector<Mat> small;
        std::vector<double> seps;
        for (size_t j = 0; j < e.size(); ++j)
            if (e[j] < 0.5 - tol().eq) {
                sN += e[j];
                small.push_back(Mat(e[j] * grams[j]));
                seps.push_back(e[j]);
            }
        int rp = static_cast<int>(std::ceil(6 / (emin * emin) * sN - 1e-12));
        std::string m1;
        c.redundant = detail::select_on(small, seps, ground, detail::chunk_blocks(blocks, rp), rp, opt.greedy, m1);
        c.modes.push_back(m1);
        for (size_t j = 0; j < e.size(); ++j)
            if (lambda_max(principal(grams[j], c.redundant)) > 2 + tol().eq)
                throw Error("stage_one_failed", "redundant selector did not bring the Bessel bound below 2");
    }
    std::vector<double> ep(e.size());
    for (size_t j = 0; j < e.size(); ++j) ep[j] = std::max(e[j], 0.5);
    std::vector<Mat> parts;
    std::vector<double> peps;
    double S = 0;
    for (size_t j = 0; j < e.size(); ++j)
        if (ep[j] < 1 / (1 + eps)) {
            parts.push_back(Mat(ep[j] * grams[j]));
            peps.push_back(ep[j]);
            S += ep[j];
        }
    for (size_t j = 0; j < e.size(); ++j) {
        // complement of sqrt(eps'_j) u over the redundant selector, embedded in the full range
        Mat full = Mat::Zero(n, n);
        Mat loc = Mat::Identity(c.redundant.size(), c.redundant.size()) - ep[j] * principal(grams[j], c.redundant);
        for (size_t a = 0; a < c.redundant.size(); ++a)
            for (size_t b = 0; b < c.redundant.size(); ++b) full(c.redundant[a], c.redundant[b]) = loc(a, b);
        parts.push_back(full);
        peps.push_back(1 - ep[j]);
        S += 1 - ep[j];
    }
    auto local = detail::restrict_blocks(blocks, c.redundant);
    int rt = detail::min_block(local);
    std::string m2;
    c.selected = detail::select_on(parts, peps, c.redundant, blocks, rt, opt.greedy, m2);
    c.modes.push_back(m2);
    c.r = rt;
    double slack = 1.0 / rt + 2 * std::sqrt(S / rt);
    for (size_t j = 0; j < e.size(); ++j) {
        c.promised_lower.push_back(std::max(0.0, (ep[j] - slack) / ep[j]));
        c.promised_upper.push_back(ep[j] < 1 / (1 + eps) ? (ep[j] + slack) / ep[j] : 1 / ep[j]);
    }
    c.c = 1 - eps;
    c.rule = stage_one ? "two-stage" : "one-stage";
    detail::fill_bounds(c, grams);
    return c;
}

struct PavingResult {
    std::vector<std::vector<int>> parts;
    std::vector<std::vector<double>> bessel;  // [part][system]
    double bound;
    std::string mode;
};

// Copies u_i^(j) into r compartments; a selector of {i} x [r] is a partition.
inline PavingResult multi_pave_projections(const std::vector<VectorSystem>& systems, double eps, int r, const GreedyOptions& opt = {}) {
    if (systems.empty()) throw Error("hypothesis:systems", "no systems");
    int n = systems[0].size();
    int m = (static_cast<int>(systems.size()) + 1) / 2;
    if (r < 18.0 * m / (eps * eps) - 1e-9) throw Error("hypothesis:r", "r below 18 m / eps^2");
    std::vector<VectorSystem> coords;
    for (auto& s : systems) {
        if (s.size() != n) throw Error("hypothesis:systems", "systems must share the index set");
        Mat g = gram(s);
        if (lambda_max(g) > 1 + tol().eq) throw Error("hypothesis:bessel", "Bessel bound exceeds 1");
        for (int i = 0; i < n; ++i)
            if (std::abs(g(i, i).real() - 0.5) > tol().eq) throw Error("hypothesis:norm", "||u_i||^2 must equal 1/2");
        coords.push_back(gram_coordinates(g));
    }
    SelectorInstance in;
    for (auto& s : coords) in.block_dims.push_back(r * s.dim);
    in.block_eps.assign(coords.size(), 0.5);
    for (int i = 0; i < n; ++i) {
        std::vector<int> blk;
        for (int k = 0; k < r; ++k) {
            std::vector<Mat> parts;
            for (auto& s : coords) {
                std::vector<Mat> copies(r, Mat::Zero(s.dim, s.dim));
                copies[k] = s.vectors[i] * s.vectors[i].adjoint();
                parts.push_back(direct_sum(copies));
            }
            blk.push_back(static_cast<int>(in.operators.size()));
            in.operators.push_back(direct_sum(parts));
        }
        in.blocks.push_back(blk);
    }
    PavingResult out;
    out.parts.assign(r, {});
    auto cert = block_weaver_select(in, r, opt);
    for (int s : cert.selected) out.parts[s % r].push_back(s / r);
    out.mode = cert.mode;
    out.bound = (1 + eps) / 2;
    for (auto& p : out.parts) {
        std::vector<double> b;
        for (auto& s : systems) b.push_back(p.empty() ? 0.0 : lambda_max(principal(gram(s), p)));
        out.bessel.push_back(b);
    }
    return out;
}

}  // namespace mcpsel
