#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "mcpsel/mcp.hpp"
#include "mcpsel/random.hpp"

namespace mcpsel {

// One randomized check over many instances. For identities `worst` is the
// largest scaled residual; for inequalities it is the largest excess of the
// side that should be smaller (negative when every instance holds with room).
struct CheckSummary {
    std::string name;
    std::string kind;  // identity | inequality
    int instances = 0;
    double worst = 0;
    int violations = 0;
    double tolerance = 0;
    bool real_rooted = true;
};

namespace detail {

inline double poly_residual(const RealPolynomial& a, const RealPolynomial& b) {
    double s = 1;
    for (double c : a.coeffs) s = std::max(s, std::abs(c));
    for (double c : b.coeffs) s = std::max(s, std::abs(c));
    return max_coeff_diff(a, b) / s;
}

inline RealPolynomial times_power(const RealPolynomial& p, int k) {
    std::vector<double> c(k, 0.0);
    c.insert(c.end(), p.coeffs.begin(), p.coeffs.end());
    return {c};
}

inline std::vector<Mat> random_psd_family(Rng& g, int d, int m) {
    std::vector<Mat> a;
    for (int i = 0; i < m; ++i) a.push_back(random_psd(g, d, g.integer(1, d)) * g.uniform(0.2, 1.5));
    return a;
}

inline std::vector<Mat> conjugate_all(const std::vector<Mat>& a, const Mat& u) {
    std::vector<Mat> out;
    for (auto& x : a) out.push_back(u * x * u.adjoint());
    return out;
}

inline double top(const std::vector<Mat>& a, bool& real) {
    auto r = maxroot(mcp(a));
    real = real && r.all_real;
    return r.value;
}

inline void record_identity(CheckSummary& s, double res) {
    ++s.instances;
    s.worst = std::max(s.worst, res);
    if (res > s.tolerance) ++s.violations;
}

inline void record_inequality(CheckSummary& s, double lhs, double rhs) {
    double excess = (lhs - rhs) / std::max(1.0, std::abs(rhs));
    s.worst = s.instances ? std::max(s.worst, excess) : excess;
    ++s.instances;
    if (excess > s.tolerance) ++s.violations;
}

}  // namespace detail

// Identities of the mixed characteristic polynomial on random families with
// d <= max_d and m <= max_m.
inline std::vector<CheckSummary> identity_suite(std::uint64_t seed, int count, int max_d = 4, int max_m = 4, double t = 1e-7) {
    Rng g(seed);
    CheckSummary aff{"multi_affine", "identity", 0, 0, 0, t}, sym{"symmetric", "identity", 0, 0, 0, t},
        uni{"unitary_invariance", "identity", 0, 0, 0, t}, shift{"shift", "identity", 0, 0, 0, t},
        orth{"orthogonal_product", "identity", 0, 0, 0, t}, tr{"maxroot_single_is_trace", "identity", 0, 0, 0, t};
    for (int it = 0; it < count; ++it) {
        int d = g.integer(1, max_d), m = g.integer(1, max_m);
        // affine in the first slot, over Hermitian arguments
        std::vector<Mat> a;
        for (int i = 0; i < m; ++i) a.push_back(random_hermitian(g, d));
        Mat b = random_hermitian(g, d);
        double s = g.uniform(-1, 2);
        int slot = g.integer(0, m - 1);
        auto mix = a, with_b = a;
        mix[slot] = s * a[slot] + (1 - s) * b;
        with_b[slot] = b;
        detail::record_identity(aff, detail::poly_residual(mcp(mix), mcp(a) * s + mcp(with_b) * (1 - s)));

        std::vector<int> perm(m);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = m - 1; i > 0; --i) std::swap(perm[i], perm[g.integer(0, i)]);
        std::vector<Mat> pa;
        for (int i : perm) pa.push_back(a[i]);
        detail::record_identity(sym, detail::poly_residual(mcp(pa), mcp(a)));

        Mat u = random_unitary(g, d);
        detail::record_identity(uni, detail::poly_residual(mcp(detail::conjugate_all(a, u)), mcp(a)));

        // block diagonal [delta E_i, A_i] shifts the reduced polynomial by delta
        int ms = std::min(m, d);
        std::vector<Mat> sa(a.begin(), a.begin() + ms), big;
        double delta = g.uniform(0.05, 2);
        for (int i = 0; i < ms; ++i) {
            Mat e = Mat::Zero(ms, ms);
            e(i, i) = delta;
            big.push_back(direct_sum({e, sa[i]}));
        }
        detail::record_identity(shift, detail::poly_residual(reduced_mcp(big), reduced_mcp(sa).shifted(delta)));

        // mutually orthogonal ranges factor after rotation
        if (d >= 2) {
            int k = g.integer(1, d - 1);
            int na = g.integer(1, std::max(1, max_m / 2)), nb = g.integer(1, std::max(1, max_m / 2));
            std::vector<Mat> fa, fb, all;
            for (int i = 0; i < na; ++i) fa.push_back(direct_sum({random_hermitian(g, k), Mat(Mat::Zero(d - k, d - k))}));
            for (int i = 0; i < nb; ++i) fb.push_back(direct_sum({Mat(Mat::Zero(k, k)), random_hermitian(g, d - k)}));
            Mat w = random_unitary(g, d);
            fa = detail::conjugate_all(fa, w);
            fb = detail::conjugate_all(fb, w);
            all = fa;
            all.insert(all.end(), fb.begin(), fb.end());
            detail::record_identity(orth, detail::poly_residual(detail::times_power(mcp(all), d), mcp(fa) * mcp(fb)));
        }

        Mat p = random_psd(g, d, g.integer(1, d)) * g.uniform(0.1, 3);
        double mr = maxroot(mcp({p})).value;
        detail::record_identity(tr, std::abs(mr - trace(p)) / std::max(1.0, trace(p)));
    }
    return {aff, sym, uni, shift, orth, tr};
}

// Maxroot inequalities; every instance is built to satisfy the hypotheses.
inline std::vector<CheckSummary> inequality_suite(std::uint64_t seed, int count, int max_d = 4, int max_m = 4, double t = 1e-7) {
    Rng g(seed);
    CheckSummary mono{"monotone", "inequality", 0, 0, 0, t}, norm{"norm_below_maxroot", "inequality", 0, 0, 0, t},
        mixed{"mixed_bound", "inequality", 0, 0, 0, t}, blocks{"block_trace_shift", "inequality", 0, 0, 0, t},
        pert{"orthogonal_perturbation", "inequality", 0, 0, 0, t};
    for (int it = 0; it < count; ++it) {
        int d = g.integer(1, max_d), m = g.integer(1, max_m);
        auto a = detail::random_psd_family(g, d, m);
        std::vector<Mat> b;
        for (auto& x : a) b.push_back(x + random_psd(g, d, g.integer(0, d)) * g.uniform(0, 0.5));
        bool rr = true;
        detail::record_inequality(mono, detail::top(a, rr), detail::top(b, rr));
        Mat s = Mat::Zero(d, d);
        for (auto& x : a) s += x;
        detail::record_inequality(norm, operator_norm(s), detail::top(a, rr));
        mono.real_rooted = mono.real_rooted && rr;

        // sum <= I and traces <= eps
        {
            auto p = detail::random_psd_family(g, d, m);
            Mat tot = Mat::Zero(d, d);
            for (auto& x : p) tot += x + 1e-3 * Mat::Identity(d, d) / double(m);
            Eigen::SelfAdjointEigenSolver<Mat> es(tot);
            Mat isq = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
            double shrink = g.uniform(0.5, 1);
            std::vector<Mat> q;
            double eps = 0;
            for (auto& x : p) {
                q.push_back(Mat(shrink * isq * (x + 1e-3 * Mat::Identity(d, d) / double(m)) * isq));
                eps = std::max(eps, trace(q.back()));
            }
            bool r2 = true;
            double v = detail::top(q, r2);
            detail::record_inequality(mixed, v, std::pow(1 + std::sqrt(eps), 2));
            mixed.real_rooted = mixed.real_rooted && r2;
        }

        // k blocks of size db, block j of every argument has trace eps_j
        {
            int k = g.integer(2, 3), db = g.integer(1, 2), mm = g.integer(1, 3);
            std::vector<double> eps(k);
            for (auto& e : eps) e = g.uniform(0.05, 1);
            std::vector<std::vector<Mat>> parts(mm, std::vector<Mat>(k));
            std::vector<Mat> full;
            for (int i = 0; i < mm; ++i) {
                for (int j = 0; j < k; ++j) parts[i][j] = random_psd(g, db, g.integer(1, db)) * eps[j];
                full.push_back(direct_sum(parts[i]));
            }
            bool r3 = true;
            double whole = detail::top(full, r3);
            double total = std::accumulate(eps.begin(), eps.end(), 0.0);
            for (int j = 0; j < k; ++j) {
                std::vector<Mat> bj;
                for (int i = 0; i < mm; ++i) bj.push_back(parts[i][j]);
                detail::record_inequality(blocks, detail::top(bj, r3), whole - (total - eps[j]));
            }
            blocks.real_rooted = blocks.real_rooted && r3;
        }

        // Z0 lives on the orthogonal complement of every range of A_j
        if (d >= 2) {
            int k = g.integer(1, d - 1), mm = g.integer(1, 3);
            Mat w = random_unitary(g, d);
            std::vector<Mat> aa;
            for (int i = 0; i < mm; ++i) aa.push_back(direct_sum({Mat(random_psd(g, k) * g.uniform(0.1, 1.5)), Mat(Mat::Zero(d - k, d - k))}));
            Mat z0 = direct_sum({Mat(Mat::Zero(k, k)), Mat(random_psd(g, d - k) * g.uniform(0.1, 1.5))});
            aa = detail::conjugate_all(aa, w);
            z0 = w * z0 * w.adjoint();
            Mat z = random_psd(g, d, d) + 1e-3 * Mat::Identity(d, d);
            z *= (trace(z0) * g.uniform(1, 1.5)) / trace(z);
            auto with_z = aa, with_z0 = aa;
            with_z[0] += z;
            with_z0[0] += z0;
            bool r4 = true;
            // the larger side is with Z
            detail::record_inequality(pert, detail::top(with_z0, r4), detail::top(with_z, r4));
            pert.real_rooted = pert.real_rooted && r4;
        }
    }
    return {mono, norm, mixed, blocks, pert};
}

}  // namespace mcpsel
