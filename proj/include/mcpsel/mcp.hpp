#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mcpsel/linalg.hpp"
#include "mcpsel/polynomial.hpp"

namespace mcpsel {

namespace detail {

inline double binom(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0.0;
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

inline double factorial(int n) {
    double r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline int shared_dim(const std::vector<Mat>& mats, int d) {
    for (auto& a : mats) {
        if (a.rows() != a.cols()) throw Error("dimension", "non-square argument");
        if (d < 0) d = static_cast<int>(a.rows());
        if (a.rows() != d) throw Error("dimension", "arguments differ in dimension");
    }
    if (d < 0) throw Error("dimension", "empty family needs an explicit dimension");
    return d;
}

// Connected components of the union sparsity pattern; every argument is
// block diagonal with respect to them (up to a permutation).
inline std::vector<std::vector<int>> common_blocks(const std::vector<Mat>& mats, int d) {
    std::vector<int> parent(d);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto& a : mats)
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                if (a(i, j) != 0.0) parent[find(i)] = find(j);
    std::vector<std::vector<int>> comp;
    std::vector<int> slot(d, -1);
    for (int i = 0; i < d; ++i) {
        int r = find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(comp.size());
            comp.emplace_back();
        }
        comp[slot[r]].push_back(i);
    }
    return comp;
}

inline void spectrum_by_blocks(const Mat& a, const std::vector<std::vector<int>>& blocks, std::vector<double>& out) {
    out.clear();
    for (auto& b : blocks) {
        if (b.size() == 1) {
            out.push_back(a(b[0], b[0]).real());
            continue;
        }
        RVec ev = eigenvalues(principal(a, b));
        out.insert(out.end(), ev.data(), ev.data() + ev.size());
    }
}

// e_0..e_K of a list of eigenvalues.
inline std::vector<double> elementary_symmetric(const std::vector<double>& ev, int K) {
    std::vector<double> e(K + 1, 0.0);
    e[0] = 1.0;
    for (double x : ev)
        for (int k = K; k >= 1; --k) e[k] += x * e[k - 1];
    return e;
}

struct ArgClass {
    Mat m;
    int mult;
};

inline std::vector<ArgClass> group_identical(const std::vector<Mat>& mats) {
    std::vector<ArgClass> cls;
    for (auto& a : mats) {
        auto it = std::find_if(cls.begin(), cls.end(), [&](const ArgClass& c) { return c.m == a; });
        if (it == cls.end()) cls.push_back({a, 1});
        else ++it->mult;
    }
    return cls;
}

}  // namespace detail

// Number of subset-sum eigensolves an exact evaluation of mu costs.
inline double mcp_cost(const std::vector<Mat>& mats) {
    double c = 1;
    for (auto& g : detail::group_identical(mats)) c *= g.mult + 1;
    return c;
}

// D(A_1..A_k), padded with identities to d arguments and divided by (d-k)!.
// Column i of the assembled matrix is column i of A_sigma(i).
inline double mixed_discriminant(const std::vector<Mat>& mats, int d = -1) {
    d = detail::shared_dim(mats, d);
    int k = static_cast<int>(mats.size());
    if (k > d) throw Error("too_many_arguments", "mixed discriminant needs k <= d");
    if (d > 8) throw Error("dimension_cap", "permutation expansion is capped at d <= 8");
    if (d == 0) return 1.0;
    std::vector<Mat> args(mats);
    for (int i = k; i < d; ++i) args.push_back(Mat::Identity(d, d));
    std::vector<int> sigma(d);
    std::iota(sigma.begin(), sigma.end(), 0);
    cplx total = 0;
    Mat m(d, d);
    do {
        for (int i = 0; i < d; ++i) m.col(i) = args[sigma[i]].col(i);
        total += m.determinant();
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return total.real() / detail::factorial(d - k);
}

// mu[A_1..A_m](z) = prod (1 - d/dz_i) det(zI + sum z_i A_i) at z_i = 0.
// Computed by polarisation over subset sums: the coefficient of z^(d-k) is
// sum_U (-1)^|U| C(m-|U|, k-|U|) e_k(A_U). Identical arguments are grouped.
inline RealPolynomial mcp(const std::vector<Mat>& mats, int d = -1) {
    d = detail::shared_dim(mats, d);
    int m = static_cast<int>(mats.size());
    int K = std::min(m, d);
    auto cls = detail::group_identical(mats);
    int nc = static_cast<int>(cls.size());
    std::vector<double> acc(K + 1, 0.0);
    std::vector<int> cnt(nc, 0);
    Mat sum = Mat::Zero(d, d);
    auto blocks = detail::common_blocks(mats, d);
    std::vector<double> ev;
    while (true) {
        int u = 0;
        double w = 1;
        for (int j = 0; j < nc; ++j) {
            u += cnt[j];
            w *= detail::binom(cls[j].mult, cnt[j]);
        }
        if (u <= K) {
            detail::spectrum_by_blocks(sum, blocks, ev);
            auto e = detail::elementary_symmetric(ev, K);
            double sgn = (u % 2) ? -1.0 : 1.0;
            for (int k = u; k <= K; ++k) acc[k] += sgn * w * detail::binom(m - u, k - u) * e[k];
        }
        int j = 0;
        while (j < nc && cnt[j] == cls[j].mult) cnt[j++] = 0;
        if (j == nc) break;
        ++cnt[j];
        if (j == 0) {
            sum += cls[0].m;
        } else {
            // rebuild on carries so rounding does not accumulate across 2^m steps
            sum.setZero();
            for (int i = 0; i < nc; ++i)
                if (cnt[i]) sum += double(cnt[i]) * cls[i].m;
        }
    }
    RealPolynomial p;
    p.coeffs.assign(d + 1, 0.0);
    for (int k = 0; k <= K; ++k) p.coeffs[d - k] = acc[k];
    p.coeffs[d] = 1.0;
    return p;
}

inline RealPolynomial reduced_mcp(const std::vector<Mat>& mats, int d = -1) {
    d = detail::shared_dim(mats, d);
    int m = static_cast<int>(mats.size());
    if (m > d) throw Error("too_many_arguments", "reduced polynomial needs m <= d");
    RealPolynomial p = mcp(mats, d);
    return {std::vector<double>(p.coeffs.begin() + (d - m), p.coeffs.end())};
}

namespace detail {

// Lattice nodes for a variable of degree <= n, centred on 0 for conditioning.
inline std::vector<double> lattice_nodes(int n) {
    std::vector<double> x(n + 1);
    for (int j = 0; j <= n; ++j) x[j] = j - n / 2;
    return x;
}

// Weights w_j with sum_j w_j f(x_j) = f'(0) for polynomials of degree <= n.
inline std::vector<double> derivative_weights(int n) {
    auto x = lattice_nodes(n);
    std::vector<double> w(n + 1, 0.0);
    for (int j = 0; j <= n; ++j) {
        double den = 1;
        for (int k = 0; k <= n; ++k)
            if (k != j) den *= x[j] - x[k];
        // derivative at 0 of prod_{k != j} (t - x_k)
        double num = 0;
        for (int l = 0; l <= n; ++l) {
            if (l == j) continue;
            double p = 1;
            for (int k = 0; k <= n; ++k)
                if (k != j && k != l) p *= -x[k];
            num += p;
        }
        w[j] = num / den;
    }
    return w;
}

// Weights c_j with sum_j c_j f(x_j) = f(0) - f'(0).
inline std::vector<double> one_minus_derivative_weights(int n) {
    auto x = lattice_nodes(n);
    auto c = derivative_weights(n);
    for (int j = 0; j <= n; ++j) c[j] = (x[j] == 0.0 ? 1.0 : 0.0) - c[j];
    return c;
}

template <class F>
void lattice_for_each(int vars, int n, F&& f) {
    std::vector<int> idx(vars, 0);
    while (true) {
        f(idx);
        int i = 0;
        while (i < vars && idx[i] == n) idx[i++] = 0;
        if (i == vars) return;
        ++idx[i];
    }
}

}  // namespace detail

// Definitional pathway: lattice values of det(zI + sum z_i A_i), the operator
// prod (1 - d/dz_i) applied through exact finite-difference weights, then
// interpolation in z. Exponential in m; intended for cross-checks.
inline RealPolynomial mcp_oracle(const std::vector<Mat>& mats, int d = -1) {
    d = detail::shared_dim(mats, d);
    int m = static_cast<int>(mats.size());
    auto c = detail::one_minus_derivative_weights(d);
    auto x = detail::lattice_nodes(d);
    Eigen::VectorXd vals(d + 1);
    for (int t = 0; t <= d; ++t) {
        double z = t - d / 2.0;
        double s = 0;
        detail::lattice_for_each(m, d, [&](const std::vector<int>& idx) {
            double w = 1;
            Mat a = z * Mat::Identity(d, d);
            for (int i = 0; i < m; ++i) {
                w *= c[idx[i]];
                if (x[idx[i]] != 0.0) a += x[idx[i]] * mats[i];
            }
            if (w != 0.0) s += w * (d ? a.determinant().real() : 1.0);
        });
        vals(t) = s;
    }
    Eigen::MatrixXd V(d + 1, d + 1);
    for (int t = 0; t <= d; ++t)
        for (int k = 0; k <= d; ++k) V(t, k) = std::pow(t - d / 2.0, k);
    Eigen::VectorXd co = V.fullPivLu().solve(vals);
    return {std::vector<double>(co.data(), co.data() + co.size())};
}

// Coefficient of z_1...z_d in det(sum z_i B_i) with B padded by identities.
inline double mixed_discriminant_oracle(const std::vector<Mat>& mats, int d = -1) {
    d = detail::shared_dim(mats, d);
    int k = static_cast<int>(mats.size());
    if (k > d) throw Error("too_many_arguments", "mixed discriminant needs k <= d");
    std::vector<Mat> args(mats);
    for (int i = k; i < d; ++i) args.push_back(Mat::Identity(d, d));
    auto w = detail::derivative_weights(d);
    auto x = detail::lattice_nodes(d);
    double s = 0;
    detail::lattice_for_each(d, d, [&](const std::vector<int>& idx) {
        double c = 1;
        Mat a = Mat::Zero(d, d);
        for (int i = 0; i < d; ++i) {
            c *= w[idx[i]];
            if (x[idx[i]] != 0.0) a += x[idx[i]] * args[i];
        }
        if (c != 0.0) s += c * a.determinant().real();
    });
    return s / detail::factorial(d - k);
}

}  // namespace mcpsel
